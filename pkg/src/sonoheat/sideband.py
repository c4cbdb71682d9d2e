"""Laser-detuning scans: heating and cooling rates across the sidebands.

Detuning convention: delta = omega0 - omega_L, so the blue sideband
(omega_L = omega0 + nu, which creates a phonon per scattered photon) sits
at delta = -nu and the red sideband at delta = +nu.  This sign choice is
used everywhere in the package.

Each scan point integrates the full master equation in the laser frame and
extracts a phonon-change rate.  Two rate definitions are reported: the
log-slope d log m / dt (meaningful while m grows) and the linear slope
d m / dt (robust when cooling drives m toward zero, where log fits are
ill-conditioned).  The primary ``rates`` column holds the log-slope when
the phonon number grew over the run and the linear slope otherwise.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import FockSpace, PhysParams, fock_density
from .dynamics import fit_heating_rate
from .lindblad import (
    IntegratorConfig,
    Schedule,
    Trajectory,
    TruncationWarning,
    evolve,
)

SCAN_CSV_HEADER = "detuning,rate,status"


@dataclass(frozen=True)
class DetuningScan:
    """Rates on a strictly increasing detuning grid, plus scan metadata."""

    detunings: np.ndarray
    rates: np.ndarray
    rates_log: np.ndarray
    rates_linear: np.ndarray
    statuses: tuple[str, ...]
    params_base: PhysParams
    t_final: float
    m0: int
    cutoff: int

    def __post_init__(self) -> None:
        n = len(self.detunings)
        if not (len(self.rates) == len(self.rates_log)
                == len(self.rates_linear) == len(self.statuses) == n):
            raise ValueError("scan columns must have equal length")
        if n > 1 and not np.all(np.diff(self.detunings) > 0):
            raise ValueError("detunings must be strictly increasing")

    def write_csv(self, path: str | Path) -> None:
        lines = [SCAN_CSV_HEADER]
        for d, r, s in zip(self.detunings, self.rates, self.statuses):
            if s == "ok" and not (math.isfinite(d) and math.isfinite(r)):
                raise ValueError(f"non-finite scan row ({d}, {r})")
            lines.append(f"{float(d)!r},{float(r)!r},{s}")
        tmp = Path(str(path) + ".tmp")
        tmp.write_text("\n".join(lines) + "\n")
        os.replace(tmp, path)


def _linear_rate(traj: Trajectory, window: tuple[float, float]) -> float:
    t = traj.times
    mask = (t >= window[0]) & (t <= window[1])
    slope, _ = np.polyfit(t[mask], traj.mean_phonon[mask], 1)
    return float(slope)


def phonon_rate(traj: Trajectory) -> tuple[float, float, float]:
    """(primary, log_slope, linear_slope) phonon rates from a trajectory.

    Fits over the last half of the run, after transients from switching on
    the drive have settled.
    """
    t = traj.times
    window = (t[0] + 0.5 * (t[-1] - t[0]), t[-1])
    linear = _linear_rate(traj, window)
    grew = traj.mean_phonon[-1] > traj.mean_phonon[0]
    try:
        log_slope = fit_heating_rate(traj, window)
    except ValueError:
        log_slope = math.nan
        grew = False
    primary = log_slope if grew else linear
    return primary, log_slope, linear


def scan_detuning(
    base: PhysParams,
    space: FockSpace,
    detunings: np.ndarray,
    t_final: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    m0: int = 2,
    sample_every: float | None = None,
    workers: int = 1,
) -> DetuningScan:
    """Evolve one run per detuning and record phonon-change rates.

    Runs are independent (order- and parallelization-insensitive); failures
    are recorded per point with the offending detuning, not raised.
    """
    detunings = np.asarray(detunings, dtype=float)
    if detunings.size == 0:
        raise ValueError("empty detuning grid")
    if sample_every is None:
        sample_every = t_final / 50.0 if t_final > 0 else 0.0
    rho0 = fock_density(space, atom=0, m=m0)

    def run_one(delta: float):
        params = replace(base, detuning=delta)
        schedule = Schedule.constant(params, t_final, drive="laser")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            traj, _ = evolve(rho0, schedule, space, cfg, sample_every)
        return phonon_rate(traj)

    results: list[tuple[float, float, float] | Exception] = [None] * detunings.size
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_one, d) for d in detunings]
            for k, fut in enumerate(futures):
                try:
                    results[k] = fut.result()
                except Exception as exc:  # per-point failure, recorded
                    results[k] = exc
    else:
        for k, d in enumerate(detunings):
            try:
                results[k] = run_one(d)
            except Exception as exc:
                results[k] = exc

    primary = np.full(detunings.size, math.nan)
    logs = np.full(detunings.size, math.nan)
    linears = np.full(detunings.size, math.nan)
    statuses: list[str] = []
    for k, res in enumerate(results):
        if isinstance(res, Exception):
            statuses.append(f"error: {res} (detuning {detunings[k]!r})")
        else:
            primary[k], logs[k], linears[k] = res
            statuses.append("ok")

    return DetuningScan(
        detunings=detunings,
        rates=primary,
        rates_log=logs,
        rates_linear=linears,
        statuses=tuple(statuses),
        params_base=base,
        t_final=t_final,
        m0=m0,
        cutoff=space.cutoff,
    )


def locate_peak(scan: DetuningScan) -> tuple[float, float]:
    """Maximum-rate detuning with parabolic refinement around the grid argmax.

    The refined location never leaves the bracketing grid interval.
    """
    ok = np.array([s == "ok" for s in scan.statuses])
    if not ok.any():
        raise ValueError("all scan points failed")
    rates = np.where(ok, scan.rates, -np.inf)
    k = int(np.argmax(rates))
    if scan.detunings.size == 1:
        return float(scan.detunings[0]), float(scan.rates[0])
    lo = max(0, k - 1)
    hi = min(scan.detunings.size - 1, k + 1)
    if not (ok[lo] and ok[hi]):
        raise ValueError(
            f"failed scan point adjacent to the maximum at detuning "
            f"{scan.detunings[k]!r}")
    if k == 0 or k == scan.detunings.size - 1:
        return float(scan.detunings[k]), float(scan.rates[k])
    d0, d1, d2 = scan.detunings[k - 1: k + 2]
    r0, r1, r2 = scan.rates[k - 1: k + 2]
    denom = (r0 - 2.0 * r1 + r2)
    if denom >= 0.0:
        # No curvature maximum; keep the grid point.
        return float(d1), float(r1)
    # Parabola through three (approximately uniform) grid points.
    shift = 0.5 * (r0 - r2) / denom
    shift = min(1.0, max(-1.0, shift))
    step = 0.5 * (d2 - d0)
    d_star = d1 + shift * step
    r_star = r1 - 0.25 * (r0 - r2) * shift
    return float(d_star), float(r_star)
