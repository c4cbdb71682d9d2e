"""Truncated atom-phonon Hilbert space, operators, and density-matrix tools.

Conventions used throughout the package:

* Every frequency is an angular frequency in rad/s and hbar = 1, so
  Hamiltonian matrix elements are rad/s as well.  Only frequency ratios
  enter the dynamics, which is what makes scaled desk-size runs
  equivalent to runs at physical parameter values.
* The joint basis is atom-major: the state with atom level ``a`` (0 ground,
  1 excited) and phonon Fock level ``m`` (0..M) sits at index
  ``a * (M + 1) + m``.  The ground-atom block therefore occupies the first
  M + 1 rows/columns of every joint operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# A plain float carrying an angular frequency in rad/s.
AngularFrequency = float

# Default validation tolerances for density matrices.  The trace and
# positivity budgets match what a healthy RK integration of desk-scale
# problems can hold over the spans exercised by the test suite.
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-8


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class PhysParams:
    """Physical parameter set of the driven atom-phonon model.

    All entries are angular frequencies in rad/s except ``eta`` which is
    dimensionless.  ``detuning`` is the (signed) atomic frequency minus the
    laser frequency; it is only used by the laser drive and is zero in the
    static inhomogeneous-field mode.  ``eta`` is the Lamb-Dicke parameter
    and is only used by the laser drive.
    """

    omega0: AngularFrequency
    nu: AngularFrequency
    omega_rabi: AngularFrequency
    lambda_coupling: AngularFrequency
    gamma: AngularFrequency
    detuning: float = 0.0
    eta: float = 0.0

    def __post_init__(self) -> None:
        for name in ("omega0", "nu", "omega_rabi", "lambda_coupling",
                     "gamma", "detuning", "eta"):
            _require_finite(name, getattr(self, name))
        if self.nu <= 0.0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        for name in ("omega0", "omega_rabi", "lambda_coupling", "gamma"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError(f"eta must lie in [0, 1), got {self.eta}")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockSpace:
    """Two-level atom tensored with a phonon mode truncated at level M.

    Operator matrices are built once and cached; they are returned
    read-only, so callers that need a scratch copy must ``.copy()``.
    """

    cutoff: int

    def __post_init__(self) -> None:
        if self.cutoff < 1:
            raise ValueError(f"phonon cutoff must be >= 1, got {self.cutoff}")

    @property
    def nlev(self) -> int:
        """Number of phonon levels, M + 1."""
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return 2 * self.nlev

    def index(self, atom: int, m: int) -> int:
        if atom not in (0, 1):
            raise ValueError(f"atom level must be 0 or 1, got {atom}")
        if not 0 <= m <= self.cutoff:
            raise ValueError(f"phonon level must lie in 0..{self.cutoff}, got {m}")
        return atom * self.nlev + m

    def basis_state(self, atom: int, m: int) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.complex128)
        vec[self.index(atom, m)] = 1.0
        return vec

    # Single-mode phonon factor operators -------------------------------

    @cached_property
    def annihilation_phonon(self) -> np.ndarray:
        b = np.zeros((self.nlev, self.nlev), dtype=np.complex128)
        for m in range(1, self.nlev):
            b[m - 1, m] = math.sqrt(m)
        return _frozen(b)

    # Joint-space operators ----------------------------------------------

    @cached_property
    def annihilation(self) -> np.ndarray:
        return _frozen(np.kron(np.eye(2), self.annihilation_phonon))

    @cached_property
    def creation(self) -> np.ndarray:
        return _frozen(self.annihilation.conj().T.copy())

    @cached_property
    def number(self) -> np.ndarray:
        diag = np.tile(np.arange(self.nlev, dtype=np.float64), 2)
        return _frozen(np.diag(diag).astype(np.complex128))

    @cached_property
    def position_quad(self) -> np.ndarray:
        """x = b + b^dagger on the joint space."""
        return _frozen(self.annihilation + self.creation)

    @cached_property
    def momentum_quad(self) -> np.ndarray:
        """p = i (b^dagger - b) on the joint space."""
        return _frozen(1j * (self.creation - self.annihilation))

    @cached_property
    def sigma_minus(self) -> np.ndarray:
        sm2 = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
        return _frozen(np.kron(sm2, np.eye(self.nlev)))

    @cached_property
    def sigma_plus(self) -> np.ndarray:
        return _frozen(self.sigma_minus.conj().T.copy())

    @cached_property
    def excited_projector(self) -> np.ndarray:
        """sigma^+ sigma^- on the joint space."""
        proj = np.zeros((self.dim, self.dim), dtype=np.complex128)
        proj[self.nlev:, self.nlev:] = np.eye(self.nlev)
        return _frozen(proj)

    @cached_property
    def sigma_x(self) -> np.ndarray:
        return _frozen(self.sigma_minus + self.sigma_plus)

    @cached_property
    def sigma_y(self) -> np.ndarray:
        return _frozen(1j * (self.sigma_minus - self.sigma_plus))

    @cached_property
    def identity(self) -> np.ndarray:
        return _frozen(np.eye(self.dim, dtype=np.complex128))


def annihilation(space: FockSpace) -> np.ndarray:
    """Joint-space phonon annihilation operator: b|m> = sqrt(m) |m-1>."""
    return space.annihilation


def atomic_ops(space: FockSpace) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Joint-space (sigma^-, sigma^+, sigma^+ sigma^-)."""
    return space.sigma_minus, space.sigma_plus, space.excited_projector


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    """trace(op @ rho).  Real up to tolerance for Hermitian op and valid rho."""
    op = np.asarray(op)
    rho = np.asarray(rho)
    if op.shape != rho.shape or op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"dimension mismatch: op {op.shape} vs rho {rho.shape}")
    return complex(np.einsum("ij,ji->", op, rho))


# Density-matrix helpers ---------------------------------------------------


def hermiticity_defect(rho: np.ndarray) -> float:
    """Largest absolute element of rho - rho^dagger."""
    return float(np.abs(rho - rho.conj().T).max())


def min_eigenvalue(rho: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())


def purity(rho: np.ndarray) -> float:
    """trace(rho^2) for Hermitian rho."""
    return float(np.vdot(rho, rho).real)


def validate_density_matrix(
    rho: np.ndarray,
    herm_tol: float = HERMITICITY_TOL,
    trace_tol: float = TRACE_TOL,
    psd_tol: float = PSD_TOL,
) -> None:
    """Raise ValueError unless rho is Hermitian, unit-trace, and PSD to tolerance."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    defect = hermiticity_defect(rho)
    if defect > herm_tol:
        raise ValueError(f"not Hermitian: max |rho - rho^dag| = {defect:.3e} > {herm_tol:.1e}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"trace differs from 1 by {abs(tr - 1.0):.3e} > {trace_tol:.1e}")
    lo = min_eigenvalue(rho)
    if lo < -psd_tol:
        raise ValueError(f"negative eigenvalue {lo:.3e} below -{psd_tol:.1e}")


def validate_pure_state(vec: np.ndarray, tol: float = 1e-10) -> None:
    vec = np.asarray(vec)
    if vec.ndim != 1:
        raise ValueError(f"pure state must be a vector, got shape {vec.shape}")
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state norm differs from 1 by {abs(norm - 1.0):.3e}")


def pure_to_density(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.complex128)
    return np.outer(vec, vec.conj())


def fock_density(space: FockSpace, atom: int, m: int) -> np.ndarray:
    """Projector |atom, m><atom, m| as a density matrix."""
    return pure_to_density(space.basis_state(atom, m))


def diagonal_mixture(space: FockSpace, atom: int, weights: dict[int, float]) -> np.ndarray:
    """Diagonal phonon mixture sum_m p_m |atom, m><atom, m|; weights must sum to 1."""
    total = sum(weights.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"mixture weights sum to {total}, expected 1")
    if any(p < 0 for p in weights.values()):
        raise ValueError("mixture weights must be non-negative")
    rho = np.zeros((space.dim, space.dim), dtype=np.complex128)
    for m, p in weights.items():
        rho[space.index(atom, m), space.index(atom, m)] = p
    return rho


def mean_phonon(rho: np.ndarray, space: FockSpace) -> float:
    """<b^dagger b> from the diagonal of rho."""
    diag = np.diagonal(rho).real
    m = np.arange(space.nlev)
    return float(m @ diag[: space.nlev] + m @ diag[space.nlev:])


def excited_population(rho: np.ndarray, space: FockSpace) -> float:
    """<sigma^+ sigma^-> from the diagonal of rho."""
    return float(np.diagonal(rho).real[space.nlev:].sum())


def level_population(rho: np.ndarray, space: FockSpace, m: int) -> float:
    """Total population of phonon level m (both atomic levels)."""
    return float(rho[space.index(0, m), space.index(0, m)].real
                 + rho[space.index(1, m), space.index(1, m)].real)
