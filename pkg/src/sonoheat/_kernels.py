"""Hot numerical kernels: master-equation right-hand side and RK steppers.

The master equation evolved here is

    drho/dt = -i [H(t), rho]
              + gamma * (s- rho s+ - 1/2 {s+ s-, rho})

with a single decay channel s- = |0><1| (x) I_phonon.  In the atom-major
basis the dissipator never needs a matrix product: s- rho s+ copies the
excited-excited block into the ground-ground block, and s+ s- is a block
diagonal mask.  Only the commutator costs matrix multiplies.

H(t) is assembled per stage as sum_k c_k(t) * terms[k] with coefficients
linear in time, c_k(t) = c0[k] + cslope[k] * t, which is exactly what the
piecewise-linear schedules produce on each segment.

Every kernel is compiled with numba when available; setting the
environment variable SONOHEAT_PURE_NUMPY=1 (before import) selects the
pure-numpy path instead.  Both paths run the identical code.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

ENV_FLAG = "SONOHEAT_PURE_NUMPY"
USE_NUMBA = numba is not None and os.environ.get(ENV_FLAG, "").lower() not in (
    "1", "true", "yes", "on",
)

# Statuses returned by the adaptive stepper.
OK = 0
MAX_STEPS_EXCEEDED = 1
STEP_UNDERFLOW = 2


def assemble_h(terms, c0, cslope, t, out):
    """out = sum_k (c0[k] + cslope[k] * t) * terms[k]."""
    out[:] = 0.0
    for k in range(terms.shape[0]):
        c = c0[k] + cslope[k] * t
        out += c * terms[k]


def block_rhs(h, rho, gamma, nlev):
    """Lindblad right-hand side using the block structure of the decay channel."""
    drho = -1j * (h @ rho - rho @ h)
    if gamma > 0.0:
        drho[:nlev, :nlev] += gamma * rho[nlev:, nlev:]
        drho[nlev:, :] -= (0.5 * gamma) * rho[nlev:, :]
        drho[:, nlev:] -= (0.5 * gamma) * rho[:, nlev:]
    return drho


def rk4_segment(rho, terms, c0, cslope, gamma, nlev, dt, n_steps):
    """n_steps fixed RK4 steps; time is measured from the segment start."""
    h = np.empty_like(rho)
    t = 0.0
    for _ in range(n_steps):
        assemble_h(terms, c0, cslope, t, h)
        k1 = block_rhs(h, rho, gamma, nlev)
        assemble_h(terms, c0, cslope, t + 0.5 * dt, h)
        k2 = block_rhs(h, rho + (0.5 * dt) * k1, gamma, nlev)
        k3 = block_rhs(h, rho + (0.5 * dt) * k2, gamma, nlev)
        assemble_h(terms, c0, cslope, t + dt, h)
        k4 = block_rhs(h, rho + dt * k3, gamma, nlev)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
    return rho


# Dormand-Prince 4(5) coefficients.
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
# b5 - b4, including the k7 term.
_E1, _E3, _E4, _E5, _E6, _E7 = (
    35.0 / 384.0 - 5179.0 / 57600.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
)


def rk45_segment(rho, terms, c0, cslope, gamma, nlev, span, dt0, atol, rtol,
                 max_steps):
    """Adaptive Dormand-Prince 4(5) over [0, span] of one schedule segment.

    Returns (rho, status, steps_taken, next_dt).  ``next_dt`` lets the
    caller carry the step size across segment/sample boundaries.
    """
    h = np.empty_like(rho)
    t = 0.0
    dt = min(dt0, span) if span > 0.0 else dt0
    steps = 0
    min_dt = span * 1e-14
    while t < span:
        if steps >= max_steps:
            return rho, MAX_STEPS_EXCEEDED, steps, dt
        if dt < min_dt:
            return rho, STEP_UNDERFLOW, steps, dt
        clipped = t + dt >= span
        dt_try = span - t if clipped else dt

        assemble_h(terms, c0, cslope, t, h)
        k1 = block_rhs(h, rho, gamma, nlev)
        assemble_h(terms, c0, cslope, t + 0.2 * dt_try, h)
        k2 = block_rhs(h, rho + dt_try * (_A21 * k1), gamma, nlev)
        assemble_h(terms, c0, cslope, t + 0.3 * dt_try, h)
        k3 = block_rhs(h, rho + dt_try * (_A31 * k1 + _A32 * k2), gamma, nlev)
        assemble_h(terms, c0, cslope, t + 0.8 * dt_try, h)
        k4 = block_rhs(h, rho + dt_try * (_A41 * k1 + _A42 * k2 + _A43 * k3),
                       gamma, nlev)
        assemble_h(terms, c0, cslope, t + (8.0 / 9.0) * dt_try, h)
        k5 = block_rhs(h, rho + dt_try * (_A51 * k1 + _A52 * k2 + _A53 * k3
                                          + _A54 * k4), gamma, nlev)
        assemble_h(terms, c0, cslope, t + dt_try, h)
        k6 = block_rhs(h, rho + dt_try * (_A61 * k1 + _A62 * k2 + _A63 * k3
                                          + _A64 * k4 + _A65 * k5), gamma, nlev)
        rho5 = rho + dt_try * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5
                               + _B6 * k6)
        k7 = block_rhs(h, rho5, gamma, nlev)

        err = dt_try * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6
                        + _E7 * k7)
        scale = atol + rtol * np.maximum(np.abs(rho), np.abs(rho5))
        ratio = np.max(np.abs(err) / scale)
        steps += 1
        if ratio <= 1.0:
            rho = rho5
            if ratio == 0.0:
                factor = 5.0
            else:
                factor = min(5.0, max(0.2, 0.9 * ratio ** -0.2))
            if clipped:
                # Endpoint reached; keep the pre-clip dt for the next call.
                t = span
            else:
                t += dt_try
                dt = dt_try * factor
        else:
            dt = dt_try * min(1.0, max(0.2, 0.9 * ratio ** -0.2))
    return rho, OK, steps, dt


if USE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
    assemble_h = _jit(assemble_h)
    block_rhs = _jit(block_rhs)
    rk4_segment = _jit(rk4_segment)
    rk45_segment = _jit(rk45_segment)
