import numpy as np
import pytest
from helpers import chebyshev, random_recurrences

from hypermoment import build_hypergroup


@pytest.fixture(scope="session")
def cheb():
    return chebyshev()


@pytest.fixture(scope="session")
def cheb16(cheb):
    return build_hypergroup(cheb, 16)


@pytest.fixture(scope="session")
def random_recs():
    return random_recurrences(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
