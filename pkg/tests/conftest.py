import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid1():
    from nonlocal_parabolic import Grid

    return Grid(1, 0.05, 2.0, 6.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
