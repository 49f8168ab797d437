import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_complex(rng, n):
    """A generic complex vector with O(1) entries."""
    return rng.normal(size=n) + 1j * rng.normal(size=n)
