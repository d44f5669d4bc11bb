import datetime as dt

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def start_date() -> dt.date:
    return dt.date(2000, 1, 3)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
