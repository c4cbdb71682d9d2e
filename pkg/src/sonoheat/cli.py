"""Command-line interface: toy, estimate, regime, evolve, sideband, sweep.

Every run writes its outputs atomically into ``--out`` and finishes with a
``manifest.json`` listing the config hash, tool version, wall-clock times,
per-run statuses, and the produced files.  Exit codes: 0 success,
1 validation error, 2 runtime/integration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass, field, replace
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, config_hash, load_config
from .dynamics import fit_heating_rate, heating_exponent
from .estimate import (
    SPECIES_MASS,
    BubbleScenario,
    confinement_length,
    lamb_dicke,
    phonon_frequency,
)
from .lindblad import IntegrationError, TruncationError, TruncationWarning, evolve
from .matio import read_complex_matrix, write_complex_matrix
from .measurement import (
    BipartiteSystem,
    absorb_measure,
    excess_energy_prob,
    ground_state,
    two_qubit_demo,
)
from .sideband import locate_peak, scan_detuning


@dataclass
class RunManifest:
    """What a CLI invocation did: traceability record written last."""

    config_hash: str
    tool_version: str
    subcommand: str
    started_at: str
    finished_at: str = ""
    status: str = "ok"
    outputs: list = field(default_factory=list)
    runs: list = field(default_factory=list)

    def write(self, out_dir: Path) -> None:
        path = out_dir / "manifest.json"
        payload = {
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "subcommand": self.subcommand,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "status": self.status,
            "outputs": sorted(self.outputs),
            "runs": self.runs,
        }
        tmp = Path(str(path) + ".tmp")
        tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        os.replace(tmp, path)


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())


def _ensure_out(path_str: str) -> Path:
    path = Path(path_str)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_text(path: Path, text: str) -> None:
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _args_hash(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _check_finite(label: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise RuntimeError(f"non-finite value in {label}: {v!r}")


# Subcommands ---------------------------------------------------------------


def _cmd_toy(args) -> int:
    if args.ha or args.hb or args.hint:
        if not (args.ha and args.hb and args.hint):
            raise ConfigError("--ha, --hb, and --hint must be given together")
        sys_ = BipartiteSystem(read_complex_matrix(args.ha),
                               read_complex_matrix(args.hb),
                               read_complex_matrix(args.hint))
        label = "user-supplied system"
        payload = {"ha": str(args.ha), "hb": str(args.hb), "hint": str(args.hint),
                   "dt": args.dt}
    else:
        sys_ = two_qubit_demo(args.chi)
        label = f"built-in two-qubit system (chi = {args.chi})"
        payload = {"chi": args.chi, "dt": args.dt}

    e0, psi0 = ground_state(sys_)
    record = absorb_measure(psi0, sys_)
    p_excess = excess_energy_prob(record.post_state, sys_, args.dt)

    lines = [
        f"# {label}",
        f"joint ground energy          : {e0:+.12g}",
        f"<H> before measurement       : {record.mean_energy_before:+.12g}",
        f"<H> after ground collapse    : {record.mean_energy_after:+.12g}",
        f"energy gained by measurement : "
        f"{record.mean_energy_after - record.mean_energy_before:+.12g}",
        "B outcome probabilities      : "
        + ", ".join(f"E={e:.6g}: p={p:.6g}"
                    for e, p in zip(record.outcome_energies, record.outcome_probs)),
        f"P(E_B > E_0) after dt={args.dt:g} : {p_excess:.12g}",
    ]
    text = "\n".join(lines)
    print(text)

    out_dir = _ensure_out(args.out)
    manifest = RunManifest(_args_hash(payload), __version__, "toy", _now())
    _write_text(out_dir / "toy.txt", text + "\n")
    manifest.outputs.append("toy.txt")
    manifest.runs.append({"system": label, "status": "ok"})
    manifest.finished_at = _now()
    manifest.write(out_dir)
    return 0


def _cmd_estimate(args) -> int:
    if args.species is not None:
        key = args.species.lower()
        if key not in SPECIES_MASS:
            raise ConfigError(
                f"unknown species {args.species!r}; known: {', '.join(SPECIES_MASS)}")
        mass = SPECIES_MASS[key]
    elif args.mass is not None:
        mass = args.mass
    else:
        raise ConfigError("either --mass or --species is required")

    scn = BubbleScenario(radius=args.radius, particle_count=args.count,
                         particle_mass=mass)
    dx = confinement_length(scn)
    nu = phonon_frequency(mass, dx)
    lines = [
        "# order-of-magnitude estimates (crowding makes nu a lower bound)",
        f"confinement length dx = {dx:.6g} m",
        f"phonon frequency   nu = {nu:.6g} rad/s",
    ]
    payload = {"radius": args.radius, "count": args.count, "mass": mass,
               "wavelength": args.wavelength}
    if args.wavelength is not None:
        eta = lamb_dicke(dx, args.wavelength)
        lines.append(f"lamb-dicke        eta = {eta:.6g}  "
                     f"(wavelength {args.wavelength:.6g} m)")
    text = "\n".join(lines)
    print(text)

    out_dir = _ensure_out(args.out)
    manifest = RunManifest(_args_hash(payload), __version__, "estimate", _now())
    _write_text(out_dir / "estimate.txt", text + "\n")
    manifest.outputs.append("estimate.txt")
    manifest.runs.append({"status": "ok"})
    manifest.finished_at = _now()
    manifest.write(out_dir)
    return 0


def _load_scenario(args) -> tuple[ScenarioConfig, str]:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    cfg = load_config(args.config)
    return cfg, config_hash(cfg)


def _cmd_regime(args) -> int:
    cfg, digest = _load_scenario(args)
    if cfg.drive_mode != "field":
        raise ConfigError("'regime' applies to the field drive mode")
    report = heating_exponent(cfg.params)
    text = f"# config_hash={digest}\n" + report.to_text()
    print(text)

    out_dir = _ensure_out(args.out)
    manifest = RunManifest(digest, __version__, "regime", _now())
    _write_text(out_dir / "regime.txt", text + "\n")
    _write_text(out_dir / "regime.json", report.to_json() + "\n")
    manifest.outputs += ["regime.txt", "regime.json"]
    manifest.runs.append({"status": "ok", **report.to_dict()})
    manifest.finished_at = _now()
    manifest.write(out_dir)
    return 0


def _run_evolve(cfg: ScenarioConfig):
    space = cfg.space()
    rho0 = cfg.initial_density(space)
    schedule = cfg.schedule()
    return evolve(rho0, schedule, space, cfg.integrator, cfg.sample_every or 0.0)


def _cmd_evolve(args) -> int:
    cfg, digest = _load_scenario(args)
    out_dir = _ensure_out(args.out)
    manifest = RunManifest(digest, __version__, "evolve", _now())

    run_record: dict = {"status": "ok"}
    if cfg.drive_mode == "field":
        report = heating_exponent(cfg.params)
        _write_text(out_dir / "regime.json", report.to_json() + "\n")
        manifest.outputs.append("regime.json")
        run_record["regime"] = report.to_dict()
        if args.expect_heating and not report.above_threshold:
            print(f"warning: below heating threshold "
                  f"(4 Lambda^2 / (nu omega0) = {report.ratio_4l2:.4g} <= 1); "
                  "expect oscillation, not growth")
            run_record["below_threshold_warning"] = True

    traj, rho_final = _run_evolve(cfg)
    _check_finite("trajectory", float(traj.mean_phonon[-1]), float(traj.purity[-1]))
    traj.write_csv(out_dir / "trajectory.csv")
    manifest.outputs.append("trajectory.csv")

    run_record["final_mean_phonon"] = float(traj.mean_phonon[-1])
    run_record["max_trace_err"] = float(traj.trace_err.max())
    run_record["min_eig"] = float(traj.min_eig.min())
    try:
        run_record["fitted_rate"] = fit_heating_rate(traj)
    except ValueError:
        run_record["fitted_rate"] = None

    if cfg.dump_final_rho:
        write_complex_matrix(out_dir / "final_rho.txt", rho_final)
        manifest.outputs.append("final_rho.txt")

    print(f"evolved to t = {traj.times[-1]:g}: mean phonon "
          f"{traj.mean_phonon[0]:.6g} -> {traj.mean_phonon[-1]:.6g}"
          + (f", fitted rate {run_record['fitted_rate']:.6g}"
             if run_record["fitted_rate"] is not None else ""))

    manifest.runs.append(run_record)
    manifest.finished_at = _now()
    manifest.write(out_dir)
    return 0


def _cmd_sideband(args) -> int:
    cfg, digest = _load_scenario(args)
    if cfg.drive_mode != "laser":
        raise ConfigError("'sideband' requires drive.mode = laser")
    if cfg.scan is None:
        raise ConfigError("'sideband' requires a 'scan' section")
    if cfg.t_final is None:
        raise ConfigError("'sideband' requires 'run.t_final'")

    space = cfg.space()
    m0 = cfg.initial_phonon if cfg.initial_phonon is not None else 1
    scan = scan_detuning(cfg.params, space, cfg.scan.grid(), cfg.t_final,
                         cfg.integrator, m0=m0,
                         sample_every=cfg.sample_every, workers=args.workers)

    out_dir = _ensure_out(args.out)
    manifest = RunManifest(digest, __version__, "sideband", _now())
    scan.write_csv(out_dir / "scan.csv")
    manifest.outputs.append("scan.csv")

    n_failed = sum(1 for s in scan.statuses if s != "ok")
    for d, s in zip(scan.detunings, scan.statuses):
        manifest.runs.append({"detuning": float(d), "status": s})
    if n_failed == 0:
        delta_star, rate_star = locate_peak(scan)
        print(f"peak heating rate {rate_star:.6g} at detuning {delta_star:.6g}")
        manifest.runs.append({"peak_detuning": delta_star, "peak_rate": rate_star,
                              "status": "ok"})
    manifest.status = "ok" if n_failed == 0 else "partial"
    manifest.finished_at = _now()
    manifest.write(out_dir)
    return 0 if n_failed == 0 else 2


_SWEEP_AXES = {
    "drive.omega_rabi": "omega_rabi",
    "drive.lambda_coupling": "lambda_coupling",
    "drive.detuning": "detuning",
}


def _cmd_sweep(args) -> int:
    cfg, digest = _load_scenario(args)
    if args.axis not in _SWEEP_AXES:
        raise ConfigError(
            f"unknown sweep axis {args.axis!r}; choose from "
            f"{', '.join(sorted(_SWEEP_AXES))}")
    try:
        grid = [float(tok) for tok in args.grid.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad --grid value: {exc}") from exc
    if not grid:
        raise ConfigError("empty sweep grid")
    if len(set(grid)) != len(grid):
        raise ConfigError("sweep grid has duplicate values")
    grid = sorted(grid)
    field_name = _SWEEP_AXES[args.axis]

    out_dir = _ensure_out(args.out)
    manifest = RunManifest(digest, __version__, "sweep", _now())

    if field_name == "detuning":
        # Detuning sweeps are exactly the sideband scan.
        if cfg.drive_mode != "laser":
            raise ConfigError("detuning sweeps require drive.mode = laser")
        if cfg.t_final is None:
            raise ConfigError("sweep requires 'run.t_final'")
        space = cfg.space()
        m0 = cfg.initial_phonon if cfg.initial_phonon is not None else 1
        scan = scan_detuning(cfg.params, space, np.array(grid), cfg.t_final,
                             cfg.integrator, m0=m0,
                             sample_every=cfg.sample_every, workers=args.workers)
        scan.write_csv(out_dir / "scan.csv")
        manifest.outputs.append("scan.csv")
        rows = []
        for d, rate, status in zip(scan.detunings, scan.rates, scan.statuses):
            rows.append((float(d),
                         float(rate) if status == "ok" else math.nan,
                         math.nan, math.nan,
                         status if status == "ok" else "error"))
            manifest.runs.append({"value": float(d), "status": status})
        n_failed = sum(1 for s in scan.statuses if s != "ok")
    else:
        if cfg.t_final is None:
            raise ConfigError("sweep requires 'run.t_final'")

        def run_point(value: float):
            point_cfg = replace(cfg, params=replace(cfg.params,
                                                    **{field_name: value}))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                traj, _ = _run_evolve(point_cfg)
            rate = fit_heating_rate(traj)
            if point_cfg.drive_mode == "field":
                lam = heating_exponent(point_cfg.params).lambda_exponent
            else:
                lam = math.nan
            return rate, lam

        results: list = [None] * len(grid)
        if args.workers > 1:
            with ThreadPoolExecutor(max_workers=args.workers) as pool:
                futures = [pool.submit(run_point, v) for v in grid]
                for k, fut in enumerate(futures):
                    try:
                        results[k] = fut.result()
                    except Exception as exc:
                        results[k] = exc
        else:
            for k, v in enumerate(grid):
                try:
                    results[k] = run_point(v)
                except Exception as exc:
                    results[k] = exc

        rows = []
        n_failed = 0
        for value, res in zip(grid, results):
            if isinstance(res, Exception):
                n_failed += 1
                rows.append((value, math.nan, math.nan, math.nan, "error"))
                manifest.runs.append({"value": value, "status": f"error: {res}"})
            else:
                rate, lam = res
                # The asymptotic growth rate of the phonon number is 2 lam.
                rel = abs(rate - 2.0 * lam) / (2.0 * lam) if lam > 0 else math.nan
                rows.append((value, rate, lam, rel, "ok"))
                manifest.runs.append({"value": value, "status": "ok",
                                      "fitted_rate": rate,
                                      "analytic_lambda": lam})

    lines = ["value,fitted_rate,analytic_lambda,rel_deviation,status"]
    for value, rate, lam, rel, status in rows:
        lines.append(f"{value!r},{rate!r},{lam!r},{rel!r},{status}")
    _write_text(out_dir / "summary.csv", "\n".join(lines) + "\n")
    manifest.outputs.append("summary.csv")

    manifest.status = "ok" if n_failed == 0 else "partial"
    manifest.finished_at = _now()
    manifest.write(out_dir)
    print(f"swept {args.axis} over {len(grid)} points "
          f"({n_failed} failed); summary.csv written")
    return 0 if n_failed == 0 else 2


# Entry point ---------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sonoheat",
        description="Quantum-optical heating simulator for strongly confined "
                    "particles",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario YAML file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel workers for sweeps/scans")
        p.add_argument("--seed", type=int, default=None,
                       help="reserved; the pipeline is deterministic")

    p = sub.add_parser("toy", help="energy gain from a ground-collapse "
                                   "measurement on subsystem B")
    common(p)
    p.add_argument("--chi", type=float, default=0.3,
                   help="interaction strength of the built-in two-qubit system")
    p.add_argument("--ha", help="matrix file for H_A")
    p.add_argument("--hb", help="matrix file for H_B")
    p.add_argument("--hint", help="matrix file for H_int (joint space)")
    p.add_argument("--dt", type=float, default=0.0,
                   help="delay before the follow-up measurement")
    p.set_defaults(func=_cmd_toy)

    p = sub.add_parser("estimate", help="confinement length, trap frequency, "
                                        "Lamb-Dicke parameter")
    common(p)
    p.add_argument("--radius", type=float, required=True, help="bubble radius, m")
    p.add_argument("--count", type=float, required=True, help="particle count")
    p.add_argument("--mass", type=float, help="particle mass, kg")
    p.add_argument("--species", help=f"named preset: {', '.join(SPECIES_MASS)}")
    p.add_argument("--wavelength", type=float, help="laser wavelength, m")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("regime", help="heating-regime report for a config")
    common(p)
    p.set_defaults(func=_cmd_regime)

    p = sub.add_parser("evolve", help="integrate the master equation")
    common(p)
    p.add_argument("--expect-heating", action="store_true",
                   help="warn when the config sits below the heating threshold")
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("sideband", help="detuning scan for heating/cooling rates")
    common(p)
    p.set_defaults(func=_cmd_sideband)

    p = sub.add_parser("sweep", help="one evolve per grid point along an axis")
    common(p)
    p.add_argument("--axis", required=True,
                   help="parameter path, e.g. drive.lambda_coupling")
    p.add_argument("--grid", required=True, help="comma-separated values")
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; those are validation.
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationError, TruncationError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
