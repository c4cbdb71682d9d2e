"""Cross-checks between the block-structured kernels, the reference
right-hand side, and the pure-numpy fallback path."""

import importlib

import numpy as np
import pytest

import sonoheat._kernels as kernels
from sonoheat.core import FockSpace, PhysParams, fock_density
from sonoheat.hamiltonian import build_hamiltonian, field_drive, hamiltonian_terms
from sonoheat.lindblad import rhs

from conftest import random_density


def _setup(cutoff=4, seed=2):
    rng = np.random.default_rng(seed)
    sp = FockSpace(cutoff)
    p = PhysParams(omega0=3.0, nu=1.0, omega_rabi=0.4, lambda_coupling=0.9,
                   gamma=0.6)
    h = build_hamiltonian(p, field_drive(p), sp)
    rho = random_density(rng, sp.dim)
    return sp, p, h, rho


def test_block_rhs_matches_reference_operators():
    sp, p, h, rho = _setup()
    got = kernels.block_rhs(np.ascontiguousarray(h), rho.copy(), p.gamma, sp.nlev)
    want = rhs(rho, h, p.gamma, sp.sigma_minus.copy(), sp.sigma_plus.copy())
    np.testing.assert_allclose(got, want, atol=1e-13)


def test_block_rhs_gamma_zero_is_pure_commutator():
    sp, _, h, rho = _setup()
    got = kernels.block_rhs(np.ascontiguousarray(h), rho.copy(), 0.0, sp.nlev)
    want = -1j * (h @ rho - rho @ h)
    np.testing.assert_allclose(got, want, atol=1e-14)


def _python_rk4(rho, h_of_t, gamma, sm, sp_op, dt, n_steps):
    t = 0.0
    for _ in range(n_steps):
        k1 = rhs(rho, h_of_t(t), gamma, sm, sp_op)
        k2 = rhs(rho + 0.5 * dt * k1, h_of_t(t + 0.5 * dt), gamma, sm, sp_op)
        k3 = rhs(rho + 0.5 * dt * k2, h_of_t(t + 0.5 * dt), gamma, sm, sp_op)
        k4 = rhs(rho + dt * k3, h_of_t(t + dt), gamma, sm, sp_op)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return rho


def test_rk4_segment_matches_plain_python_rk4():
    sp, p, _, rho = _setup()
    terms = np.ascontiguousarray(hamiltonian_terms(sp))
    c0 = np.array([p.omega0, p.nu, p.omega_rabi, p.lambda_coupling])
    slope = np.array([0.0, 0.0, 0.2, -0.1])

    def h_of_t(t):
        coeffs = c0 + slope * t
        return sum(c * term for c, term in zip(coeffs, terms))

    got = kernels.rk4_segment(rho.copy(), terms, c0, slope, p.gamma, sp.nlev,
                              0.01, 25)
    want = _python_rk4(rho.copy(), h_of_t, p.gamma, sp.sigma_minus.copy(),
                       sp.sigma_plus.copy(), 0.01, 25)
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_rk45_segment_agrees_with_fine_rk4():
    sp, p, _, _ = _setup()
    rho = fock_density(sp, 1, 2)
    terms = np.ascontiguousarray(hamiltonian_terms(sp))
    c0 = np.array([p.omega0, p.nu, p.omega_rabi, p.lambda_coupling])
    slope = np.zeros(4)
    span = 2.0
    fine = kernels.rk4_segment(rho.copy(), terms, c0, slope, p.gamma, sp.nlev,
                               span / 20000, 20000)
    adaptive, status, steps, _ = kernels.rk45_segment(
        rho.copy(), terms, c0, slope, p.gamma, sp.nlev, span, 0.1, 1e-12,
        1e-10, 1_000_000)
    assert status == kernels.OK
    assert steps < 20000
    np.testing.assert_allclose(adaptive, fine, atol=1e-8)


def test_rk45_zero_span_returns_input():
    sp, p, _, rho = _setup()
    terms = np.ascontiguousarray(hamiltonian_terms(sp))
    c0 = np.array([p.omega0, p.nu, p.omega_rabi, p.lambda_coupling])
    out, status, steps, _ = kernels.rk45_segment(
        rho.copy(), terms, c0, np.zeros(4), p.gamma, sp.nlev, 0.0, 0.1,
        1e-10, 1e-8, 100)
    assert status == kernels.OK
    assert steps == 0
    np.testing.assert_array_equal(out, rho)


def test_rk45_reports_step_budget_exhaustion():
    sp, p, _, rho = _setup()
    terms = np.ascontiguousarray(hamiltonian_terms(sp))
    c0 = np.array([p.omega0, p.nu, p.omega_rabi, p.lambda_coupling])
    _, status, _, _ = kernels.rk45_segment(
        rho.copy(), terms, c0, np.zeros(4), p.gamma, sp.nlev, 50.0, 0.01,
        1e-12, 1e-10, 3)
    assert status == kernels.MAX_STEPS_EXCEEDED


def test_pure_numpy_fallback_matches_numba(monkeypatch):
    sp, p, _, rho = _setup(cutoff=3, seed=8)
    terms = np.ascontiguousarray(hamiltonian_terms(sp))
    c0 = np.array([p.omega0, p.nu, p.omega_rabi, p.lambda_coupling])
    slope = np.array([0.0, 0.0, 0.05, 0.1])
    args = (terms, c0, slope, p.gamma, sp.nlev)

    res_default = kernels.rk4_segment(rho.copy(), *args, 0.02, 10)
    rhs_default = kernels.block_rhs(
        np.ascontiguousarray(terms[0] + terms[3]), rho.copy(), p.gamma, sp.nlev)
    ad_default = kernels.rk45_segment(rho.copy(), *args, 0.5, 0.05, 1e-10,
                                      1e-8, 100000)

    monkeypatch.setenv(kernels.ENV_FLAG, "1")
    try:
        importlib.reload(kernels)
        assert kernels.USE_NUMBA is False
        res_numpy = kernels.rk4_segment(rho.copy(), *args, 0.02, 10)
        rhs_numpy = kernels.block_rhs(
            np.ascontiguousarray(terms[0] + terms[3]), rho.copy(), p.gamma,
            sp.nlev)
        ad_numpy = kernels.rk45_segment(rho.copy(), *args, 0.5, 0.05, 1e-10,
                                        1e-8, 100000)
    finally:
        monkeypatch.delenv(kernels.ENV_FLAG)
        importlib.reload(kernels)

    np.testing.assert_allclose(res_numpy, res_default, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(rhs_numpy, rhs_default, rtol=1e-13, atol=1e-15)
    assert ad_numpy[1] == ad_default[1]
    np.testing.assert_allclose(ad_numpy[0], ad_default[0], rtol=1e-12, atol=1e-14)
