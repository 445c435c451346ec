import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("geomflow", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("geomflow")


@pytest.fixture
def grid64():
    from geomflow.numerics import PeriodicGrid
    return PeriodicGrid(64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
