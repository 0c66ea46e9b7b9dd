import numpy as np
import pytest

from brokersim import Exponential, Uniform


@pytest.fixture
def u01():
    return Uniform(0.0, 1.0)


@pytest.fixture
def exp1():
    return Exponential(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
