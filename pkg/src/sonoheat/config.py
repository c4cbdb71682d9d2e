"""Scenario configuration: strict YAML parsing, canonical serialization, hashing.

A scenario file is a YAML mapping with sections ``drive``, ``space``,
``initial``, ``integrator``, ``run``, ``schedule``, ``scan``, ``output``.
Parsing is strict: unknown keys are rejected with their full path, every
constraint violation names the offending key, and the validated form
(defaults materialized) round-trips through :func:`serialize_config`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

import numpy as np
import yaml

from .core import FockSpace, PhysParams, diagonal_mixture, fock_density
from .lindblad import IntegratorConfig, Schedule, Segment

RAMPABLE_KEYS = ("omega_rabi", "lambda_coupling", "detuning")


class ConfigError(ValueError):
    """Configuration syntax or constraint violation."""


def _reject_unknown(mapping: dict, known: tuple[str, ...], path: str) -> None:
    for key in mapping:
        if key not in known:
            raise ConfigError(f"unknown key '{path}.{key}'" if path else
                              f"unknown key '{key}'")


def _get(mapping: dict, key: str, path: str, kind, required: bool = False,
         default=None):
    if key not in mapping or mapping[key] is None:
        if required:
            raise ConfigError(f"missing required key '{path}.{key}'")
        return default
    value = mapping[key]
    if kind is float:
        if isinstance(value, str):
            # YAML 1.1 reads exponents without a sign ("1e7") as strings.
            try:
                return float(value)
            except ValueError:
                raise ConfigError(
                    f"'{path}.{key}' must be a number, got {value!r}") from None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{path}.{key}' must be a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{path}.{key}' must be an integer, got {value!r}")
        return int(value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"'{path}.{key}' must be a boolean, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"'{path}.{key}' must be a string, got {value!r}")
        return value
    if kind is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"'{path}.{key}' must be a mapping, got {value!r}")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ConfigError(f"'{path}.{key}' must be a list, got {value!r}")
        return value
    raise AssertionError(kind)


@dataclass(frozen=True)
class SegmentSpec:
    """One schedule entry: constant overrides and/or linear ramps."""

    t_start: float
    t_end: float
    const: tuple[tuple[str, float], ...]
    ramp: tuple[tuple[str, tuple[float, float]], ...]


@dataclass(frozen=True)
class ScanSpec:
    """Detuning grid for sideband scans."""

    minimum: float
    maximum: float
    points: int

    def grid(self) -> np.ndarray:
        return np.linspace(self.minimum, self.maximum, self.points)


@dataclass(frozen=True)
class ScenarioConfig:
    drive_mode: str
    params: PhysParams
    cutoff: int
    initial_atom: int
    initial_phonon: int | None
    initial_mixture: tuple[tuple[int, float], ...] | None
    integrator: IntegratorConfig
    t_final: float | None
    sample_every: float | None
    schedule_spec: tuple[SegmentSpec, ...] | None
    scan: ScanSpec | None
    dump_final_rho: bool

    # Derived objects -----------------------------------------------------

    def space(self) -> FockSpace:
        return FockSpace(self.cutoff)

    def initial_density(self, space: FockSpace) -> np.ndarray:
        if self.initial_mixture is not None:
            return diagonal_mixture(space, self.initial_atom,
                                    dict(self.initial_mixture))
        m = self.initial_phonon if self.initial_phonon is not None else 1
        if m > space.cutoff:
            raise ConfigError(
                f"'initial.phonon' = {m} exceeds 'space.cutoff' = {space.cutoff}")
        return fock_density(space, self.initial_atom, m)

    def schedule(self) -> Schedule:
        if self.t_final is None:
            raise ConfigError("missing required key 'run.t_final'")
        if not self.schedule_spec:
            return Schedule.constant(self.params, self.t_final, drive=self.drive_mode)
        segments = []
        for spec in self.schedule_spec:
            start_kw = dict(spec.const)
            end_kw = dict(spec.const)
            for name, (v0, v1) in spec.ramp:
                start_kw[name] = v0
                end_kw[name] = v1
            segments.append(Segment(
                spec.t_start, spec.t_end,
                replace(self.params, **start_kw),
                replace(self.params, **end_kw),
            ))
        try:
            schedule = Schedule(tuple(segments), drive=self.drive_mode)
        except ValueError as exc:
            raise ConfigError(f"'schedule': {exc}") from exc
        if abs(schedule.span - self.t_final) > 1e-12 * max(1.0, self.t_final):
            raise ConfigError(
                f"'schedule' covers [0, {schedule.span}] but 'run.t_final' "
                f"is {self.t_final}")
        return schedule

    # Canonical form -------------------------------------------------------

    def to_dict(self) -> dict:
        drive: dict = {"mode": self.drive_mode, "nu": self.params.nu,
                       "gamma": self.params.gamma,
                       "omega_rabi": self.params.omega_rabi}
        if self.drive_mode == "field":
            drive["omega0"] = self.params.omega0
            drive["lambda_coupling"] = self.params.lambda_coupling
        else:
            drive["omega0"] = self.params.omega0
            drive["detuning"] = self.params.detuning
            drive["eta"] = self.params.eta
        initial: dict = {"atom": self.initial_atom}
        if self.initial_mixture is not None:
            initial["mixture"] = {str(k): v for k, v in self.initial_mixture}
        else:
            initial["phonon"] = self.initial_phonon
        integ = {
            "method": self.integrator.method,
            "dt": self.integrator.dt,
            "atol": self.integrator.atol,
            "rtol": self.integrator.rtol,
            "max_steps": self.integrator.max_steps,
            "trunc_threshold": self.integrator.trunc_threshold,
            "trunc_action": self.integrator.trunc_action,
        }
        doc: dict = {
            "drive": drive,
            "space": {"cutoff": self.cutoff},
            "initial": initial,
            "integrator": integ,
            "output": {"dump_final_rho": self.dump_final_rho},
        }
        if self.t_final is not None:
            doc["run"] = {"t_final": self.t_final, "sample_every": self.sample_every}
        if self.schedule_spec:
            doc["schedule"] = [
                {
                    "t_start": s.t_start,
                    "t_end": s.t_end,
                    **({"params": dict(s.const)} if s.const else {}),
                    **({"ramp": {k: list(v) for k, v in s.ramp}} if s.ramp else {}),
                }
                for s in self.schedule_spec
            ]
        if self.scan is not None:
            doc["scan"] = {"min": self.scan.minimum, "max": self.scan.maximum,
                           "points": self.scan.points}
        return doc


def _parse_drive(section: dict) -> tuple[str, PhysParams]:
    _reject_unknown(section, ("mode", "omega0", "nu", "omega_rabi",
                              "lambda_coupling", "gamma", "detuning", "eta"),
                    "drive")
    mode = _get(section, "mode", "drive", str, required=True)
    if mode not in ("field", "laser"):
        raise ConfigError(f"'drive.mode' must be 'field' or 'laser', got {mode!r}")
    nu = _get(section, "nu", "drive", float, required=True)
    gamma = _get(section, "gamma", "drive", float, required=True)
    omega_rabi = _get(section, "omega_rabi", "drive", float, required=True)
    if mode == "field":
        omega0 = _get(section, "omega0", "drive", float, required=True)
        lam = _get(section, "lambda_coupling", "drive", float, required=True)
        for key in ("detuning", "eta"):
            if key in section:
                raise ConfigError(f"'drive.{key}' only applies to laser mode")
        detuning, eta = 0.0, 0.0
    else:
        omega0 = _get(section, "omega0", "drive", float, default=0.0)
        detuning = _get(section, "detuning", "drive", float, default=0.0)
        eta = _get(section, "eta", "drive", float, required=True)
        if "lambda_coupling" in section:
            raise ConfigError("'drive.lambda_coupling' only applies to field mode")
        lam = 0.0
    try:
        params = PhysParams(omega0=omega0, nu=nu, omega_rabi=omega_rabi,
                            lambda_coupling=lam, gamma=gamma,
                            detuning=detuning, eta=eta)
    except ValueError as exc:
        raise ConfigError(f"'drive': {exc}") from exc
    return mode, params


def _parse_initial(section: dict) -> tuple[int, int | None, tuple | None]:
    _reject_unknown(section, ("atom", "phonon", "mixture"), "initial")
    atom = _get(section, "atom", "initial", int, default=0)
    if atom not in (0, 1):
        raise ConfigError(f"'initial.atom' must be 0 or 1, got {atom}")
    has_mixture = "mixture" in section and section["mixture"] is not None
    if has_mixture and section.get("phonon") is not None:
        raise ConfigError("'initial.phonon' and 'initial.mixture' are exclusive")
    if has_mixture:
        raw = _get(section, "mixture", "initial", dict, required=True)
        mixture = []
        for key, val in raw.items():
            try:
                level = int(key)
            except (TypeError, ValueError):
                raise ConfigError(
                    f"'initial.mixture' keys must be phonon levels, got {key!r}")
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(
                    f"'initial.mixture.{key}' must be a number, got {val!r}")
            if level < 0 or float(val) < 0:
                raise ConfigError(
                    f"'initial.mixture.{key}' has negative level or weight")
            mixture.append((level, float(val)))
        total = sum(w for _, w in mixture)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"'initial.mixture' weights sum to {total}, expected 1")
        return atom, None, tuple(sorted(mixture))
    phonon = _get(section, "phonon", "initial", int, default=1)
    if phonon < 0:
        raise ConfigError(f"'initial.phonon' must be >= 0, got {phonon}")
    return atom, phonon, None


def _parse_integrator(section: dict) -> IntegratorConfig:
    _reject_unknown(section, ("method", "dt", "atol", "rtol", "max_steps",
                              "trunc_threshold", "trunc_action"), "integrator")
    kwargs = dict(
        method=_get(section, "method", "integrator", str, default="rk4"),
        dt=_get(section, "dt", "integrator", float, default=None),
        atol=_get(section, "atol", "integrator", float, default=1e-10),
        rtol=_get(section, "rtol", "integrator", float, default=1e-8),
        max_steps=_get(section, "max_steps", "integrator", int, default=50_000_000),
        trunc_threshold=_get(section, "trunc_threshold", "integrator", float,
                             default=1e-3),
        trunc_action=_get(section, "trunc_action", "integrator", str,
                          default="warn"),
    )
    try:
        return IntegratorConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"'integrator': {exc}") from exc


def _parse_schedule(entries: list, drive_mode: str) -> tuple[SegmentSpec, ...]:
    specs = []
    for idx, entry in enumerate(entries):
        path = f"schedule[{idx}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"'{path}' must be a mapping")
        _reject_unknown(entry, ("t_start", "t_end", "params", "ramp"), path)
        t_start = _get(entry, "t_start", path, float, required=True)
        t_end = _get(entry, "t_end", path, float, required=True)
        const = []
        for name, val in _get(entry, "params", path, dict, default={}).items():
            if name not in RAMPABLE_KEYS:
                raise ConfigError(
                    f"'{path}.params.{name}' is not schedulable "
                    f"(allowed: {', '.join(RAMPABLE_KEYS)})")
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"'{path}.params.{name}' must be a number")
            const.append((name, float(val)))
        ramp = []
        for name, val in _get(entry, "ramp", path, dict, default={}).items():
            if name not in RAMPABLE_KEYS:
                raise ConfigError(
                    f"'{path}.ramp.{name}' is not schedulable "
                    f"(allowed: {', '.join(RAMPABLE_KEYS)})")
            if (not isinstance(val, list) or len(val) != 2
                    or any(isinstance(v, bool) or not isinstance(v, (int, float))
                           for v in val)):
                raise ConfigError(f"'{path}.ramp.{name}' must be a [start, end] pair")
            ramp.append((name, (float(val[0]), float(val[1]))))
        overlap = {n for n, _ in const} & {n for n, _ in ramp}
        if overlap:
            raise ConfigError(
                f"'{path}' sets {sorted(overlap)} in both params and ramp")
        for name, _ in const + ramp:
            if name == "detuning" and drive_mode == "field":
                raise ConfigError(f"'{path}': detuning ramps require laser mode")
            if name == "lambda_coupling" and drive_mode == "laser":
                raise ConfigError(
                    f"'{path}': lambda_coupling ramps require field mode")
        specs.append(SegmentSpec(t_start, t_end, tuple(sorted(const)),
                                 tuple(sorted(ramp))))
    return tuple(specs)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and fully validate a scenario document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"config syntax error{where}: {exc}") from exc
    if doc is None:
        raise ConfigError("empty config")
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping of sections")
    _reject_unknown(doc, ("drive", "space", "initial", "integrator", "run",
                          "schedule", "scan", "output"), "")

    drive_mode, params = _parse_drive(_get(doc, "drive", "", dict, required=True))

    space_sec = _get(doc, "space", "", dict, required=True)
    _reject_unknown(space_sec, ("cutoff",), "space")
    cutoff = _get(space_sec, "cutoff", "space", int, required=True)
    if cutoff < 1:
        raise ConfigError(f"'space.cutoff' must be >= 1, got {cutoff}")

    atom, phonon, mixture = _parse_initial(_get(doc, "initial", "", dict, default={}))
    integrator = _parse_integrator(_get(doc, "integrator", "", dict, default={}))

    run_sec = _get(doc, "run", "", dict, default=None)
    t_final = sample_every = None
    if run_sec is not None:
        _reject_unknown(run_sec, ("t_final", "sample_every"), "run")
        t_final = _get(run_sec, "t_final", "run", float, required=True)
        if t_final < 0:
            raise ConfigError(f"'run.t_final' must be >= 0, got {t_final}")
        sample_every = _get(run_sec, "sample_every", "run", float,
                            default=t_final / 100.0 if t_final > 0 else 0.0)
        if sample_every < 0:
            raise ConfigError(f"'run.sample_every' must be >= 0, got {sample_every}")

    schedule_spec = None
    if "schedule" in doc and doc["schedule"] is not None:
        entries = _get(doc, "schedule", "", list, required=True)
        schedule_spec = _parse_schedule(entries, drive_mode)

    scan = None
    if "scan" in doc and doc["scan"] is not None:
        scan_sec = _get(doc, "scan", "", dict, required=True)
        _reject_unknown(scan_sec, ("min", "max", "points"), "scan")
        lo = _get(scan_sec, "min", "scan", float, required=True)
        hi = _get(scan_sec, "max", "scan", float, required=True)
        points = _get(scan_sec, "points", "scan", int, required=True)
        if points < 1:
            raise ConfigError(f"'scan.points' must be >= 1, got {points}")
        if points > 1 and hi <= lo:
            raise ConfigError(f"'scan.max' must exceed 'scan.min' ({lo} .. {hi})")
        scan = ScanSpec(lo, hi, points)

    out_sec = _get(doc, "output", "", dict, default={})
    _reject_unknown(out_sec, ("dump_final_rho",), "output")
    dump = _get(out_sec, "dump_final_rho", "output", bool, default=False)

    cfg = ScenarioConfig(
        drive_mode=drive_mode,
        params=params,
        cutoff=cutoff,
        initial_atom=atom,
        initial_phonon=phonon,
        initial_mixture=mixture,
        integrator=integrator,
        t_final=t_final,
        sample_every=sample_every,
        schedule_spec=schedule_spec,
        scan=scan,
        dump_final_rho=dump,
    )
    # Surface schedule structural problems (overlap/gap/coverage) at parse time.
    if cfg.schedule_spec and cfg.t_final is not None:
        cfg.schedule()
    if cfg.initial_phonon is not None and cfg.initial_phonon > cutoff:
        raise ConfigError(
            f"'initial.phonon' = {cfg.initial_phonon} exceeds 'space.cutoff' = {cutoff}")
    if cfg.initial_mixture is not None:
        top = max(level for level, _ in cfg.initial_mixture)
        if top > cutoff:
            raise ConfigError(
                f"'initial.mixture' uses level {top} above 'space.cutoff' = {cutoff}")
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical YAML of the validated form (defaults materialized)."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True, default_flow_style=False)


def config_hash(cfg: ScenarioConfig) -> str:
    """SHA-256 of the canonical JSON form; stable under key reordering."""
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
