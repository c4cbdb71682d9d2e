"""Atom-phonon Hamiltonian builders and coupling constants from field data.

Two drive variants share one matrix structure,

    H = c_atom * s+ s-  +  nu * b'b  +  c_drive * (s- + s+)
        + c_couple * (b + b') (s- + s+)

with (c_atom, c_drive, c_couple) = (omega0, Omega, Lambda) for a static
inhomogeneous electric field, and (delta, Omega, eta * Omega) in the
frame rotating at the laser frequency, delta = omega0 - omega_L.  The
counter-rotating parts of the coupling term are kept in full; the heating
mechanism lives in them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import FockSpace, PhysParams


@dataclass(frozen=True)
class FieldMode:
    """One spatial Fourier component of the driving electric field.

    ``amplitude_projection`` is the complex dipole-projected amplitude
    e * D01 . E_k / hbar in rad/s, ``wavenumber`` is k in 1/m, and
    ``direction_overlap`` is the cosine between the mode direction and the
    quantised motion axis.
    """

    amplitude_projection: complex
    wavenumber: float
    direction_overlap: float

    def __post_init__(self) -> None:
        if self.wavenumber < 0.0:
            raise ValueError(f"wavenumber must be >= 0, got {self.wavenumber}")


@dataclass(frozen=True)
class InhomogeneousField:
    """Static-field drive: carrier strength Omega, gradient coupling Lambda."""

    omega_rabi: float
    lambda_coupling: float


@dataclass(frozen=True)
class Laser:
    """Laser drive in the rotating frame: Rabi frequency, Lamb-Dicke
    parameter, and detuning delta = omega0 - omega_L (blue detuning is
    delta < 0)."""

    omega_rabi: float
    eta: float
    detuning: float


DriveMode = InhomogeneousField | Laser


def field_drive(params: PhysParams) -> InhomogeneousField:
    return InhomogeneousField(params.omega_rabi, params.lambda_coupling)


def laser_drive(params: PhysParams) -> Laser:
    return Laser(params.omega_rabi, params.eta, params.detuning)


def couplings_from_modes(modes: list[FieldMode], dx: float) -> tuple[float, float]:
    """Carrier and gradient coupling constants from a field-mode expansion.

    Evaluated at the trap centre,

        Omega  =  2 * sum_k Re(proj_k)
        Lambda = -2 * dx * sum_k k * overlap_k * Im(proj_k)

    The returned values carry the signs the formulas produce; the dynamics
    depends only on their magnitudes (the heating law involves Lambda^2 and
    Lambda^4), and parameter sets absorb the signs on construction.
    An empty mode list gives (0, 0).
    """
    if dx <= 0.0:
        raise ValueError(f"dx must be positive, got {dx}")
    omega = 2.0 * sum(m.amplitude_projection.real for m in modes)
    lam = -2.0 * dx * sum(
        m.wavenumber * m.direction_overlap * m.amplitude_projection.imag
        for m in modes
    )
    return float(omega), float(lam)


def rabi_at(modes: list[FieldMode], displacement: float) -> float:
    """Carrier coupling 2 sum_k Re(proj_k e^{i k overlap s}) at displacement s.

    Used to check that the gradient coupling really is dx times the spatial
    derivative of the carrier coupling along the motion axis.
    """
    return 2.0 * sum(
        (m.amplitude_projection
         * cmath.exp(1j * m.wavenumber * m.direction_overlap * displacement)).real
        for m in modes
    )


def lambda_from_gradient(dx: float, grad_omega: float) -> float:
    """Gradient coupling from the carrier-coupling gradient along the motion axis."""
    if dx <= 0.0:
        raise ValueError(f"dx must be positive, got {dx}")
    return dx * grad_omega


def hamiltonian_terms(space: FockSpace) -> np.ndarray:
    """Stacked operator basis (s+s-, b'b, sigma_x, x sigma_x), shape (4, dim, dim).

    A Hamiltonian is a coefficient vector against this stack; the
    integrator assembles H(t) from per-segment linear coefficients.
    """
    terms = np.empty((4, space.dim, space.dim), dtype=np.complex128)
    terms[0] = space.excited_projector
    terms[1] = space.number
    terms[2] = space.sigma_x
    terms[3] = space.position_quad @ space.sigma_x
    return terms


def term_coefficients(params: PhysParams, drive: str) -> tuple[float, float, float, float]:
    """Coefficients against :func:`hamiltonian_terms` for a drive kind."""
    if drive == "field":
        return (params.omega0, params.nu, params.omega_rabi, params.lambda_coupling)
    if drive == "laser":
        return (params.detuning, params.nu, params.omega_rabi,
                params.eta * params.omega_rabi)
    raise ValueError(f"unknown drive kind {drive!r}, expected 'field' or 'laser'")


def build_hamiltonian(params: PhysParams, mode: DriveMode, space: FockSpace) -> np.ndarray:
    """Dense joint-space Hamiltonian for the given drive variant."""
    terms = hamiltonian_terms(space)
    if isinstance(mode, InhomogeneousField):
        coeffs = (params.omega0, params.nu, mode.omega_rabi, mode.lambda_coupling)
    elif isinstance(mode, Laser):
        coeffs = (mode.detuning, params.nu, mode.omega_rabi,
                  mode.eta * mode.omega_rabi)
    else:
        raise TypeError(f"unsupported drive mode {type(mode).__name__}")
    h = np.zeros((space.dim, space.dim), dtype=np.complex128)
    for c, term in zip(coeffs, terms):
        if c != 0.0:
            h += c * term
    return h


def lamb_dicke_parameter(wavelength: float, dx: float) -> float:
    """eta = k_L * dx = 2 pi dx / lambda_L for a laser of the given wavelength."""
    if wavelength <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    if dx < 0.0:
        raise ValueError(f"dx must be >= 0, got {dx}")
    return 2.0 * math.pi * dx / wavelength
