from fractions import Fraction

import numpy as np
import pytest

from utils.core_params import make_params, named_params


@pytest.fixture
def worked():
    """(5,-6): phi = 3, phi' = 2, q = 2/3, all exact."""
    return make_params(5, -6)


@pytest.fixture
def fibonacci():
    return named_params("fibonacci")


@pytest.fixture
def pell():
    return named_params("pell")


@pytest.fixture
def degenerate():
    return make_params(2, -1)


@pytest.fixture
def expanding():
    """(-1,2): phi = 1, phi' = -2, q = -2."""
    return make_params(-1, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def half():
    return Fraction(1, 2)
