"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.  The desk-scale heating anchor used throughout is
nu = 1, omega0 = 1e3, Lambda = 50, Omega = 0.05, Gamma = 10, phonon cutoff
M = 60, starting from the atom ground state with one phonon; its closed-form
exponent is lam = 3 exactly.

Every master-equation run performed here is immediately checked against the
conservation budgets (trace error <= 1e-9, Hermiticity drift <= 1e-10,
smallest eigenvalue >= -1e-8).
"""

import json
import math
import warnings

import numpy as np
import pytest

import sonoheat as sh
from sonoheat import cli
from sonoheat.core import FockSpace, PhysParams, fock_density
from sonoheat.dynamics import (
    MOMENT_LABELS,
    fit_heating_rate,
    heating_exponent,
    mean_phonon_analytic,
    moment_growth_rate,
    moment_rhs,
    moments_from_density,
)
from sonoheat.hamiltonian import build_hamiltonian, field_drive
from sonoheat.lindblad import (
    IntegratorConfig,
    Schedule,
    Segment,
    TruncationWarning,
    evolve,
    rhs,
)
from sonoheat.measurement import BipartiteSystem, absorb_measure
from sonoheat.sideband import locate_peak, scan_detuning

from conftest import random_density, random_hermitian

ANCHOR = PhysParams(omega0=1000.0, nu=1.0, omega_rabi=0.05,
                    lambda_coupling=50.0, gamma=10.0)
ANCHOR_LAMBDA = 3.0

HEADLINE = PhysParams(omega0=1e15, nu=1e7, omega_rabi=1e6,
                      lambda_coupling=1e12, gamma=1e13)


def _report(criterion: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


def _check_conservation(traj, label: str) -> None:
    assert traj.trace_err.max() <= 1e-9, \
        f"{label}: trace error {traj.trace_err.max():.3e}"
    assert traj.herm_err.max() <= 1e-10, \
        f"{label}: hermiticity drift {traj.herm_err.max():.3e}"
    assert traj.min_eig.min() >= -1e-8, \
        f"{label}: min eigenvalue {traj.min_eig.min():.3e}"


def _run(params, space, t_final, sample_every, cfg=None, m0=1, drive="field",
         schedule=None, label="run"):
    cfg = cfg or IntegratorConfig(trunc_action="ignore")
    sched = schedule or Schedule.constant(params, t_final, drive=drive)
    rho0 = fock_density(space, 0, m0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        traj, rho = evolve(rho0, sched, space, cfg, sample_every)
    _check_conservation(traj, label)
    return traj, rho


@pytest.fixture(scope="module")
def anchor_trajectory():
    """Anchor run to lam * t = 3 (t = 1.0), sampled every 0.01."""
    traj, _ = _run(ANCHOR, FockSpace(60), 1.0, 0.01, label="anchor")
    return traj


def test_criterion_1_rate_and_regime_subcommand(anchor_trajectory, tmp_path):
    # Fitted late-window growth rate of <b'b> against 2 lam = 6, +-10%.
    # Window lam*t in [0.9, 1.5]: late enough that the exponential mode
    # dominates, early enough that the M = 60 cutoff still holds under 1%
    # of the population.
    rate = fit_heating_rate(anchor_trajectory, (0.30, 0.50))
    rate_ok = abs(rate - 2 * ANCHOR_LAMBDA) <= 0.1 * 2 * ANCHOR_LAMBDA

    cfg = tmp_path / "headline.yaml"
    cfg.write_text(
        "drive:\n  mode: field\n  omega0: 1.0e+15\n  nu: 1.0e+7\n"
        "  omega_rabi: 1.0e+6\n  lambda_coupling: 1.0e+12\n  gamma: 1.0e+13\n"
        "space:\n  cutoff: 2\n")
    assert cli.main(["regime", "--config", str(cfg),
                     "--out", str(tmp_path / "out")]) == 0
    report = json.loads((tmp_path / "out" / "regime.json").read_text())
    lam_expected = 1e7 * math.sqrt(399.0)
    regime_ok = (abs(report["lambda_exponent"] - lam_expected)
                 <= 1e-9 * lam_expected and report["above_threshold"])

    _report("1 (rate + regime)", rate_ok and regime_ok,
            f"fitted rate {rate:.4f} vs 6.0 "
            f"({(rate - 6.0) / 6.0:+.1%}); regime lambda "
            f"{report['lambda_exponent']:.6g} vs {lam_expected:.6g}")
    assert rate_ok and regime_ok


def test_criterion_1_pointwise_window(anchor_trajectory):
    # Trajectory vs the closed-form m(t)/m(0), +-20% pointwise over
    # lam * t in [0.5, 3] on the M = 60 anchor, exactly as specified.
    #
    # Known to be unattainable as stated (see the analysis in the run
    # report): at m0 = 1 the vacuum-seeded contribution puts the true
    # dynamics 25-35% above the multiplicative law at the window start
    # regardless of cutoff, and by lam * t >~ 1.7 any cutoff small enough
    # to integrate in minutes saturates (m(lam*t = 3) = 559 needs M well
    # above 1000).  The check is kept faithful rather than weakened.
    t = anchor_trajectory.times
    mask = (t >= 0.5 / ANCHOR_LAMBDA) & (t <= 3.0 / ANCHOR_LAMBDA + 1e-12)
    analytic = mean_phonon_analytic(t[mask], ANCHOR, 1.0)
    numeric = anchor_trajectory.mean_phonon[mask]
    deviation = np.abs(numeric / analytic - 1.0)
    worst = float(deviation.max())
    start_dev = float(deviation[0])
    ok = worst <= 0.20
    _report("1 (pointwise 20%, lam*t in [0.5, 3])", ok,
            f"max |m_num/m_ana - 1| = {worst:.1%} "
            f"(at window start {start_dev:+.1%}, vacuum-seeded surplus; "
            f"worst at window end, cutoff saturation)")
    assert ok, (
        f"pointwise deviation reaches {worst:.1%} over lam*t in [0.5, 3]; "
        "unattainable at m0 = 1 with a desk-scale cutoff, see ledger/report")


def test_criterion_2_orders_of_magnitude_in_nanoseconds():
    ratio = mean_phonon_analytic(10e-9, HEADLINE, 1.0)
    ok = ratio >= 1e3 and 2.5e3 < ratio < 2.75e3
    _report("2 (analytic nanosecond gain)", ok,
            f"m(10 ns)/m(0) = {ratio:.4g} >= 1e3")
    assert ok


def test_criterion_3_conservation_and_vacuum_stationarity():
    # Vacuum stationarity over 1e3 phonon periods with the couplings off.
    params = PhysParams(omega0=5.0, nu=1.0, omega_rabi=0.0,
                        lambda_coupling=0.0, gamma=2.0)
    space = FockSpace(4)
    rho0 = fock_density(space, 0, 0)
    span = 1e3 * 2 * math.pi
    traj, rho = evolve(rho0, Schedule.constant(params, span), space,
                       IntegratorConfig(), sample_every=span / 100)
    _check_conservation(traj, "vacuum")
    drift = float(np.abs(rho - rho0).max())
    ok = drift <= 1e-9
    _report("3 (conservation + vacuum stationarity)", ok,
            f"max |rho(t) - rho(0)| = {drift:.3e} over 1e3 phonon periods; "
            "trace/hermiticity/positivity budgets enforced on every run in "
            "this module")
    assert ok


def _regime_parameter_sets(n=20, seed=20240817):
    rng = np.random.default_rng(seed)
    sets = []
    while len(sets) < n:
        nu = rng.uniform(0.5, 2.0)
        omega0 = rng.uniform(300.0, 3000.0)
        ratio = rng.uniform(4.0, 100.0)
        lam_c = math.sqrt(ratio * nu * omega0) / 2.0
        omega_rabi = lam_c / (1e3 * rng.uniform(1.0, 10.0))
        gamma = nu * rng.uniform(1.0, 20.0)
        sets.append(PhysParams(omega0=omega0, nu=nu, omega_rabi=omega_rabi,
                               lambda_coupling=lam_c, gamma=gamma))
    return sets


def test_criterion_4_no_stationary_state():
    from sonoheat.lindblad import default_step

    sets = _regime_parameter_sets()
    space = FockSpace(24)
    grew = []
    for k, params in enumerate(sets):
        rep = heating_exponent(params)
        assert rep.above_threshold and rep.coupling_ratio >= 1e3
        t_final = 0.7 / rep.lambda_exponent
        sched = Schedule.constant(params, t_final)
        # Half the default step: the abrupt switch-on of a strong random
        # coupling needs extra accuracy to hold the positivity budget.
        cfg = IntegratorConfig(dt=0.5 * default_step(sched, space),
                               trunc_action="ignore")
        traj, _ = _run(params, space, t_final, t_final / 10, cfg=cfg,
                       label=f"regime set {k}")
        grew.append(traj.mean_phonon[-1] > traj.mean_phonon[0])
    ok = all(grew)
    _report("4 (no stationary state, 20 random sets)", ok,
            f"{sum(grew)}/20 runs strictly increased the phonon number")
    assert ok


def test_criterion_5_measurement_energy_gain():
    rng = np.random.default_rng(7130)
    dims = [(2, 2), (2, 3), (3, 2)]
    worst_gain = math.inf
    for k in range(50):
        da, db = dims[k % 3]
        sys_ = BipartiteSystem(
            random_hermitian(rng, da),
            random_hermitian(rng, db),
            random_hermitian(rng, da * db, scale=0.5),
        )
        # Independent oracle: exact diagonalization done right here.
        h = sys_.total()
        evals, evecs = np.linalg.eigh(h)
        psi0 = evecs[:, 0]
        rec = absorb_measure(psi0, sys_)
        gain = rec.mean_energy_after - rec.mean_energy_before
        oracle_after = float(np.vdot(rec.post_state, h @ rec.post_state).real)
        assert abs(rec.mean_energy_after - oracle_after) <= 1e-10
        assert abs(rec.mean_energy_before - evals[0]) <= 1e-10
        assert gain >= -1e-10
        if abs(np.vdot(rec.post_state, psi0)) < 1.0 - 1e-10:
            assert gain > 1e-10
        worst_gain = min(worst_gain, gain)
    _report("5 (measurement energy gain, 50 systems)", True,
            f"minimum gain {worst_gain:.3e} (never decreases)")


def test_criterion_6_sideband_split_and_peak():
    # Resolved-sideband configuration: Gamma = 0.05 nu, eta Omega = 0.02 nu.
    base = PhysParams(omega0=0.0, nu=1.0, omega_rabi=0.2,
                      lambda_coupling=0.0, gamma=0.05, detuning=0.0, eta=0.1)
    space = FockSpace(15)
    grid = np.linspace(-3.0, 3.0, 25)
    scan = scan_detuning(base, space, grid, t_final=25.0,
                         cfg=IntegratorConfig(trunc_action="ignore"), m0=2)
    assert all(s == "ok" for s in scan.statuses)
    rate_blue = scan.rates[np.argmin(np.abs(grid + 1.0))]
    rate_red = scan.rates[np.argmin(np.abs(grid - 1.0))]
    delta_star, rate_star = locate_peak(scan)
    ok = rate_blue > 0 and rate_red < 0 and abs(delta_star + 1.0) <= 0.2
    _report("6 (sideband split + peak)", ok,
            f"rate(-nu) = {rate_blue:+.4g}, rate(+nu) = {rate_red:+.4g}, "
            f"peak at {delta_star:+.3f} nu (within +-0.2 of -1)")
    assert ok


def test_criterion_7_estimate_anchors():
    from sonoheat.estimate import (SPECIES_MASS, BubbleScenario,
                                   confinement_length, phonon_frequency)
    argon = SPECIES_MASS["argon"]
    dx1 = confinement_length(BubbleScenario(500e-9, 1e5, argon))
    dx2 = confinement_length(BubbleScenario(500e-9, 1e10, argon))
    nu = phonon_frequency(argon, 10.77e-9)
    ok = (10e-9 <= dx1 <= 11e-9) and (2.2e-10 <= dx2 <= 2.4e-10) \
        and (5e6 <= nu <= 2e7)
    _report("7 (estimate anchors)", ok,
            f"dx(1e5) = {dx1:.3g} m, dx(1e10) = {dx2:.3g} m, "
            f"nu(Argon, 10.77 nm) = {nu:.3g} rad/s")
    assert ok


def test_criterion_8_moment_closure():
    # Dominant eigenvalue of the moment system against the closed-form
    # exponent over the criterion-4 parameter sets: the phonon second
    # moments grow at twice the exponent, so eig/2 is compared to lam.
    sets = _regime_parameter_sets()
    worst = 0.0
    for params in sets:
        lam = heating_exponent(params).lambda_exponent
        rate = moment_growth_rate(params)
        worst = max(worst, abs(rate / 2.0 - lam) / lam)
    eig_ok = worst <= 0.05

    # Short-time derivative match against the full master equation on a
    # random valid state in the closure's domain (atom in its ground
    # state, phonons supported below the cutoff).
    rng = np.random.default_rng(99)
    space = FockSpace(16)
    rho_ph = np.zeros((space.nlev, space.nlev), dtype=complex)
    rho_ph[:8, :8] = random_density(rng, 8)
    rho = np.kron(np.diag([1.0, 0.0]), rho_ph)
    params = _regime_parameter_sets(n=1, seed=5)[0]
    y = moments_from_density(rho, space)
    got = moment_rhs(y, params)
    h = build_hamiltonian(params, field_drive(params), space)
    drho = rhs(rho, h, params.gamma, space.sigma_minus, space.sigma_plus)
    x, p = space.position_quad, space.momentum_quad
    ops = {
        "unit": space.identity, "x": x, "p": p, "sx": space.sigma_x,
        "sy": space.sigma_y, "e": space.excited_projector, "n": space.number,
        "xx": x @ x, "pp": p @ p, "sxp": 0.5 * (x @ p + p @ x),
        "xsx": x @ space.sigma_x, "psx": p @ space.sigma_x,
        "xsy": x @ space.sigma_y, "psy": p @ space.sigma_y,
    }
    want = np.array([sh.expectation(ops[k], drho).real for k in MOMENT_LABELS])
    deriv_err = float(np.abs(got - want).max())
    deriv_ok = deriv_err <= 1e-8

    ok = eig_ok and deriv_ok
    _report("8 (moment-closure surrogate)", ok,
            f"worst eigenvalue mismatch {worst:.2%} (<= 5%), "
            f"derivative mismatch {deriv_err:.2e} (<= 1e-8)")
    assert ok


def test_criterion_9_truncation_convergence():
    # Doubling the cutoff changes the final phonon number by < 1% on an
    # anchor run sized so the occupation stays well below the cutoff.
    cfg = IntegratorConfig(dt=1.5e-4, trunc_action="ignore")
    t_final = 0.25
    traj60, _ = _run(ANCHOR, FockSpace(60), t_final, 0.05, cfg=cfg,
                     label="M=60")
    traj120, _ = _run(ANCHOR, FockSpace(120), t_final, 0.05, cfg=cfg,
                      label="M=120")
    m60 = traj60.mean_phonon[-1]
    m120 = traj120.mean_phonon[-1]
    change = abs(m120 - m60) / m60
    ok = change < 0.01
    _report("9 (truncation convergence)", ok,
            f"final m: {m60:.6f} (M=60) vs {m120:.6f} (M=120), "
            f"change {change:.2e}")
    assert ok


def test_criterion_10_time_dependent_speedup():
    base = PhysParams(omega0=1000.0, nu=1.0, omega_rabi=1e-3,
                      lambda_coupling=30.0, gamma=10.0)
    high = PhysParams(omega0=1000.0, nu=1.0, omega_rabi=1e-3,
                      lambda_coupling=50.0, gamma=10.0)
    space = FockSpace(40)
    t_final = 0.5
    constant = Schedule.constant(base, t_final)
    ramped = Schedule((
        Segment(0.0, 0.25, base, base),
        Segment(0.25, t_final, base, high),
    ))
    traj_const, _ = _run(base, space, t_final, 0.05, label="constant")
    traj_ramp, _ = _run(base, space, t_final, 0.05, schedule=ramped,
                        label="ramped")
    m_const = traj_const.mean_phonon[-1]
    m_ramp = traj_ramp.mean_phonon[-1]
    ok = m_ramp > m_const
    _report("10 (upward ramp speedup)", ok,
            f"final m: constant {m_const:.4f} vs ramped {m_ramp:.4f}")
    assert ok
