import math

import numpy as np
import pytest

from geocov.channel import default_network_config
from geocov.geometry import GeometryContext


@pytest.fixture(scope="session")
def ctx():
    return GeometryContext()


@pytest.fixture
def rng():
    return np.random.default_rng(20231021)


@pytest.fixture(scope="session")
def phi30():
    return math.radians(30.0)


@pytest.fixture(scope="session")
def phi37():
    return math.radians(37.0)


def make_config(n_sats, alpha=3.0, gain_ratio_db=20.0, m=1):
    return default_network_config(n_sats, alpha=alpha,
                                  gain_ratio_db=gain_ratio_db, m=m)


@pytest.fixture(scope="session")
def config_factory():
    return make_config
