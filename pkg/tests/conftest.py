import numpy as np
import pytest

import sonoheat as sh


@pytest.fixture
def anchor_params():
    """Desk-scale heating anchor: ratio 4 L^2/(nu w0) = 10, exponent lam = 3."""
    return sh.PhysParams(omega0=1000.0, nu=1.0, omega_rabi=0.05,
                         lambda_coupling=50.0, gamma=10.0)


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (a + a.conj().T)
