import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_passive(rng, size=4, norm=0.95):
    """Random complex matrix scaled to spectral norm <= norm (strictly passive)."""
    m = random_complex(rng, (size, size))
    return m * (norm / np.linalg.norm(m, 2))
