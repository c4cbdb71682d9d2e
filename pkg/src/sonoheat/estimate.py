"""Order-of-magnitude model parameters from physical bubble/particle inputs.

All outputs are rough estimates: the confinement length assumes each
particle occupies an equal share of the bubble volume, and crowding by the
other particles makes the resulting trap frequency a lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass

# CODATA reduced Planck constant, J s.
HBAR = 1.054571817e-34

# Particle masses in kg for the named-species CLI presets.
SPECIES_MASS = {
    "argon": 6.63e-26,
}


@dataclass(frozen=True)
class BubbleScenario:
    """Bubble radius (m), particle count, and particle mass (kg)."""

    radius: float
    particle_count: float
    particle_mass: float

    def __post_init__(self) -> None:
        for name in ("radius", "particle_count", "particle_mass"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


def confinement_length(scn: BubbleScenario) -> float:
    """Per-particle confinement length dx = R / N^(1/3) in metres."""
    return scn.radius / scn.particle_count ** (1.0 / 3.0)


def phonon_frequency(mass: float, dx: float) -> float:
    """Trap frequency nu = hbar / (2 M dx^2) in rad/s for ground-state spread dx."""
    if mass <= 0.0 or dx <= 0.0:
        raise ValueError("mass and dx must be positive")
    return HBAR / (2.0 * mass * dx ** 2)


def ground_state_spread(mass: float, nu: float) -> float:
    """dx = sqrt(hbar / (2 M nu)) in metres; inverse of :func:`phonon_frequency`."""
    if mass <= 0.0 or nu <= 0.0:
        raise ValueError("mass and nu must be positive")
    return (HBAR / (2.0 * mass * nu)) ** 0.5


def lamb_dicke(dx: float, laser_wavelength: float) -> float:
    """eta = 2 pi dx / lambda_L (dimensionless)."""
    if dx < 0.0:
        raise ValueError(f"dx must be >= 0, got {dx}")
    if laser_wavelength <= 0.0:
        raise ValueError(f"laser wavelength must be positive, got {laser_wavelength}")
    import math

    return 2.0 * math.pi * dx / laser_wavelength
