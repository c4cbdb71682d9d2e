"""Benchmark the jitted kernels against the pure-numpy fallback.

The fallback path is selected exactly the way a user would select it, by
setting SONOHEAT_PURE_NUMPY=1 before the package is imported, so each
variant runs in its own subprocess.

Usage: python benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json
import time
import warnings

import numpy as np

import sonoheat._kernels as kernels
from sonoheat.core import FockSpace, PhysParams, fock_density
from sonoheat.lindblad import IntegratorConfig, Schedule, TruncationWarning, evolve

results = {"numba": kernels.USE_NUMBA}

# Small system, many steps: the regime where call overhead dominates.
p_small = PhysParams(omega0=0.0, nu=1.0, omega_rabi=0.2, lambda_coupling=0.0,
                     gamma=0.05, detuning=-1.0, eta=0.1)
sp_small = FockSpace(15)
sched_small = Schedule.constant(p_small, 25.0, drive="laser")
with warnings.catch_warnings():
    warnings.simplefilter("ignore", TruncationWarning)
    evolve(fock_density(sp_small, 0, 2), sched_small, sp_small,
           IntegratorConfig(), 5.0)  # warm-up/compile
    t0 = time.perf_counter()
    evolve(fock_density(sp_small, 0, 2), sched_small, sp_small,
           IntegratorConfig(), 5.0)
    results["sideband_point_dim32_s"] = time.perf_counter() - t0

# Medium system, BLAS-dominated: the heating anchor shortened.
p_big = PhysParams(omega0=1000.0, nu=1.0, omega_rabi=0.05,
                   lambda_coupling=50.0, gamma=10.0)
sp_big = FockSpace(60)
sched_big = Schedule.constant(p_big, 0.1)
with warnings.catch_warnings():
    warnings.simplefilter("ignore", TruncationWarning)
    t0 = time.perf_counter()
    evolve(fock_density(sp_big, 0, 1), sched_big, sp_big,
           IntegratorConfig(), 0.05)
    results["anchor_slice_dim122_s"] = time.perf_counter() - t0

print(json.dumps(results))
"""


def run_variant(pure_numpy: bool) -> dict:
    env = dict(os.environ)
    if pure_numpy:
        env["SONOHEAT_PURE_NUMPY"] = "1"
    else:
        env.pop("SONOHEAT_PURE_NUMPY", None)
    out = subprocess.run([sys.executable, "-c", WORKLOAD], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    print("running jitted variant ...")
    jit = run_variant(pure_numpy=False)
    print("running pure-numpy variant (SONOHEAT_PURE_NUMPY=1) ...")
    plain = run_variant(pure_numpy=True)

    if not jit["numba"]:
        print("note: numba unavailable; both variants ran the numpy path")
    rows = [
        ("sideband scan point (dim 32, ~7e4 steps)", "sideband_point_dim32_s"),
        ("heating anchor slice (dim 122, ~1e3 steps)", "anchor_slice_dim122_s"),
    ]
    print(f"\n{'workload':<45} {'numba':>10} {'numpy':>10} {'speedup':>9}")
    for label, key in rows:
        a, b = jit[key], plain[key]
        print(f"{label:<45} {a:>9.3f}s {b:>9.3f}s {b / a:>8.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
