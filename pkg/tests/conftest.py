import math

import numpy as np
import pytest

from lorentzconj.model import ModelSpace
from lorentzconj.spacetimes import ProductSpacetime

# compiled kernels are cached per metric, so spaces are shared across tests


@pytest.fixture(scope="session")
def mink():
    return ModelSpace(0.0, 2)


@pytest.fixture(scope="session")
def ads():
    return ModelSpace(-1.0, 2)


@pytest.fixture(scope="session")
def ads4():
    return ModelSpace(-4.0, 2)


@pytest.fixture(scope="session")
def ds():
    return ModelSpace(1.0, 2)


@pytest.fixture(scope="session")
def spheroid():
    return ProductSpacetime.spheroid(1.0, 0.6)


@pytest.fixture(scope="session")
def sphere():
    return ProductSpacetime.sphere(1.0)


# equator of the (1, 0.6) spheroid: first conjugate point at arclength 0.6 pi
SCHROEDER_V = np.array([3.0, 0.0, 0.6 * math.pi])


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)
