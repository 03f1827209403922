import pytest

from srlab.maps import linear_map, sine_squared_map
from srlab.normalization import normalize_map


@pytest.fixture(scope="session")
def L2():
    return linear_map(2)


@pytest.fixture(scope="session")
def f0():
    return sine_squared_map(0.1)


@pytest.fixture(scope="session")
def g0():
    return sine_squared_map(-0.1)


@pytest.fixture(scope="session")
def g_near():
    """Normalized map close to the doubling map (C^2 distance about 0.4)."""
    return normalize_map(sine_squared_map(0.02))
