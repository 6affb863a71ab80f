import numpy as np
import pytest
from hypothesis import settings

from cfmonitor import (
    default_ap_power_control, estimation_stats, generate_realization, reduced_params, SystemParams,
)

settings.register_profile("ci", deadline=None, max_examples=60)
settings.load_profile("ci")


class Setup:
    def __init__(self, params, index=0):
        self.params = params
        self.r = generate_realization(params, index)
        self.st = estimation_stats(self.r)
        self.eta = default_ap_power_control(self.r, self.st)


@pytest.fixture(scope="session")
def small():
    return Setup(reduced_params())


@pytest.fixture(scope="session")
def full():
    return Setup(SystemParams())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
