"""Quantum-optical heating of strongly confined particles.

A simulator for a two-level particle whose quantised motion couples to its
electronic transition through a field gradient or a laser, with photon
decay into a zero-temperature environment.  Provides full master-equation
integration, the closed-form exponential heating law and its moment-system
surrogate, laser sideband heating/cooling scans, and back-of-envelope
parameter estimates for cavitating-bubble scenarios.
"""

__version__ = "0.1.0"

from .core import (
    FockSpace,
    PhysParams,
    annihilation,
    atomic_ops,
    diagonal_mixture,
    expectation,
    fock_density,
    pure_to_density,
    validate_density_matrix,
)
from .dynamics import (
    RegimeError,
    RegimeReport,
    fit_heating_rate,
    heating_exponent,
    mean_phonon_analytic,
    moment_growth_rate,
    moment_matrix,
    moment_rhs,
)
from .estimate import (
    BubbleScenario,
    confinement_length,
    ground_state_spread,
    lamb_dicke,
    phonon_frequency,
)
from .hamiltonian import (
    FieldMode,
    InhomogeneousField,
    Laser,
    build_hamiltonian,
    couplings_from_modes,
    lambda_from_gradient,
)
from .lindblad import (
    IntegrationError,
    IntegratorConfig,
    Schedule,
    Segment,
    Trajectory,
    TruncationError,
    TruncationWarning,
    evolve,
    rhs,
)
from .measurement import (
    BipartiteSystem,
    MeasurementRecord,
    ZeroProjectionError,
    absorb_measure,
    excess_energy_prob,
    mean_total_energy,
    two_qubit_demo,
)
from .sideband import DetuningScan, locate_peak, scan_detuning

__all__ = [
    "__version__",
    "FockSpace", "PhysParams", "annihilation", "atomic_ops",
    "diagonal_mixture", "expectation", "fock_density", "pure_to_density",
    "validate_density_matrix",
    "RegimeError", "RegimeReport", "fit_heating_rate", "heating_exponent",
    "mean_phonon_analytic", "moment_growth_rate", "moment_matrix", "moment_rhs",
    "BubbleScenario", "confinement_length", "ground_state_spread",
    "lamb_dicke", "phonon_frequency",
    "FieldMode", "InhomogeneousField", "Laser", "build_hamiltonian",
    "couplings_from_modes", "lambda_from_gradient",
    "IntegrationError", "IntegratorConfig", "Schedule", "Segment",
    "Trajectory", "TruncationError", "TruncationWarning", "evolve", "rhs",
    "BipartiteSystem", "MeasurementRecord", "ZeroProjectionError",
    "absorb_measure", "excess_energy_prob", "mean_total_energy",
    "two_qubit_demo",
    "DetuningScan", "locate_peak", "scan_detuning",
]
