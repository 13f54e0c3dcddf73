import numpy as np
import pytest

from bergmanops.quadrature import build_grid
from bergmanops.weights import WeightSpec


@pytest.fixture(scope="session")
def w11():
    return WeightSpec.exponential(1.0, 1.0)


@pytest.fixture(scope="session")
def grid95(w11):
    return build_grid(w11, 0.95, 1.0)


@pytest.fixture(scope="session")
def grid99(w11):
    """Deep truncation; monomial and transform oracles need the outer mass."""
    return build_grid(w11, 0.99, 1.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260823)
