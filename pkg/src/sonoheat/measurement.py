"""Energy-absorbing measurements on one half of a bipartite quantum system.

A projective measurement that collapses subsystem B to its local ground
eigenspace models photon absorption by an environment.  When the joint
ground state of H = H_A + H_B + H_int does not factorise into local ground
states, the collapse leaves the system in a superposition of total-energy
eigenstates and therefore raises the expected total energy: measurement
alone pumps energy in.  These small dense-matrix routines demonstrate and
quantify that effect.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import validate_pure_state

# Relative tolerance for grouping degenerate eigenvalues.
_DEGENERACY_RTOL = 1e-9


class ZeroProjectionError(ValueError):
    """The state has no overlap with the measured ground eigenspace."""


def _check_hermitian(name: str, matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{name} must be square, got shape {matrix.shape}")
    if np.abs(matrix - matrix.conj().T).max() > 1e-10 * max(1.0, np.abs(matrix).max()):
        raise ValueError(f"{name} is not Hermitian")
    return matrix


@dataclass(frozen=True)
class BipartiteSystem:
    """Subsystem energies H_A, H_B and a joint-space interaction H_int."""

    h_a: np.ndarray
    h_b: np.ndarray
    h_int: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "h_a", _check_hermitian("h_a", self.h_a))
        object.__setattr__(self, "h_b", _check_hermitian("h_b", self.h_b))
        object.__setattr__(self, "h_int", _check_hermitian("h_int", self.h_int))
        dim = self.h_a.shape[0] * self.h_b.shape[0]
        if self.h_int.shape != (dim, dim):
            raise ValueError(
                f"h_int shape {self.h_int.shape} does not match joint dim {dim}")

    @property
    def dim_a(self) -> int:
        return self.h_a.shape[0]

    @property
    def dim_b(self) -> int:
        return self.h_b.shape[0]

    def total(self) -> np.ndarray:
        """H = H_A (x) I + I (x) H_B + H_int."""
        return (np.kron(self.h_a, np.eye(self.dim_b))
                + np.kron(np.eye(self.dim_a), self.h_b)
                + self.h_int)


def two_qubit_demo(chi: float = 0.3) -> BipartiteSystem:
    """Two qubits with H_A = H_B = diag(0, 1) and H_int = chi * sx (x) sx."""
    h_local = np.diag([0.0, 1.0]).astype(np.complex128)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    return BipartiteSystem(h_local, h_local, chi * np.kron(sx, sx))


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome statistics of one energy-absorbing measurement on B.

    ``outcome_energies`` lists the distinct H_B eigenvalues ascending and
    ``outcome_probs`` the corresponding Born probabilities.  ``post_state``
    is the renormalized state after the ground outcome.
    """

    outcome_energies: np.ndarray
    outcome_probs: np.ndarray
    post_state: np.ndarray
    mean_energy_before: float
    mean_energy_after: float


def _distinct_eigengroups(evals: np.ndarray) -> list[np.ndarray]:
    """Indices of eigenvalues grouped by degeneracy (evals ascending)."""
    scale = max(1.0, float(np.abs(evals).max()))
    groups: list[list[int]] = [[0]]
    for k in range(1, len(evals)):
        if evals[k] - evals[groups[-1][0]] <= _DEGENERACY_RTOL * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    return [np.array(g) for g in groups]


def _b_projectors(sys: BipartiteSystem) -> tuple[np.ndarray, list[np.ndarray]]:
    """Distinct H_B eigenvalues and joint-space projectors I_A (x) P_i."""
    evals, evecs = np.linalg.eigh(sys.h_b)
    energies = []
    projectors = []
    for group in _distinct_eigengroups(evals):
        vecs = evecs[:, group]
        p_b = vecs @ vecs.conj().T
        energies.append(evals[group[0]])
        projectors.append(np.kron(np.eye(sys.dim_a), p_b))
    return np.array(energies), projectors


def mean_total_energy(state: np.ndarray, sys: BipartiteSystem) -> float:
    """<state| H |state> (real part; imaginary part is round-off)."""
    state = np.asarray(state, dtype=np.complex128)
    validate_pure_state(state)
    return float(np.vdot(state, sys.total() @ state).real)


def absorb_measure(state: np.ndarray, sys: BipartiteSystem) -> MeasurementRecord:
    """Project subsystem B onto its (possibly degenerate) ground eigenspace.

    Records the Born probabilities of every distinct B-energy outcome and
    the total-energy expectation before and after the ground-outcome
    collapse.  Raises :class:`ZeroProjectionError` when the state is
    orthogonal to the ground sector.
    """
    state = np.asarray(state, dtype=np.complex128)
    validate_pure_state(state)
    energies, projectors = _b_projectors(sys)
    probs = np.array([float(np.vdot(state, p @ state).real) for p in projectors])
    probs = np.clip(probs, 0.0, None)
    before = mean_total_energy(state, sys)

    ground_component = projectors[0] @ state
    norm = float(np.linalg.norm(ground_component))
    if norm ** 2 < 1e-14:
        raise ZeroProjectionError(
            "state has no overlap with the B ground eigenspace "
            f"(probability {norm ** 2:.3e})")
    post = ground_component / norm
    after = mean_total_energy(post, sys)
    return MeasurementRecord(
        outcome_energies=energies,
        outcome_probs=probs,
        post_state=post,
        mean_energy_before=before,
        mean_energy_after=after,
    )


def propagator(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) for Hermitian H via eigendecomposition."""
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1j * evals * dt)) @ evecs.conj().T


def excess_energy_prob(state: np.ndarray, sys: BipartiteSystem, dt: float) -> float:
    """Probability that measuring B after a delay dt yields energy above ground.

    The state evolves unitarily for dt under the full H, then B is
    measured; returns P(E_B > E_0) = 1 - ||(I (x) P_0) U(dt) |state>||^2.
    """
    if dt < 0.0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    state = np.asarray(state, dtype=np.complex128)
    validate_pure_state(state)
    _, projectors = _b_projectors(sys)
    evolved = propagator(sys.total(), dt) @ state
    p0 = float(np.vdot(evolved, projectors[0] @ evolved).real)
    return max(0.0, 1.0 - p0)


def ground_state(sys: BipartiteSystem) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue and eigenvector of the total Hamiltonian."""
    evals, evecs = np.linalg.eigh(sys.total())
    return float(evals[0]), evecs[:, 0]
