import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'core'))

from bases import BasisSpec  # noqa: E402
from continuation import PiecewiseParams  # noqa: E402
from densities import make_density  # noqa: E402


@pytest.fixture
def dd_string():
    return BasisSpec(1, 0.5, 'DD')


@pytest.fixture
def homogeneous_string():
    return make_density('constant', {'value': 1.0, 'L': 0.5})


@pytest.fixture
def sinusoidal_string():
    return make_density('sinusoidal', {'eta': 0.1, 'L': 0.5})


@pytest.fixture
def piecewise_params():
    return PiecewiseParams.from_invariants(1.0, 1 / 3, 0.1)
