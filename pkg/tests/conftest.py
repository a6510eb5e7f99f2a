import numpy as np
import pytest

from dyndet.map_model import Observable, TrigMapFamily


@pytest.fixture
def doubling():
    return TrigMapFamily.linear(2)


@pytest.fixture
def sine_family():
    """L(x) = 2x + tau sin(2 pi x) / (2 pi) on tau in [-0.1, 0.1]."""
    return TrigMapFamily.sine_perturbation()


@pytest.fixture
def cosine():
    return Observable.cosine()


def rel_err(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
