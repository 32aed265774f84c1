import numpy as np
import pytest

from snlab import MapFamily, NormalFormField


@pytest.fixture(scope="session")
def canonical():
    return MapFamily.canonical()


@pytest.fixture(scope="session")
def arnold():
    return MapFamily.arnold()


@pytest.fixture(scope="session")
def doubling():
    return MapFamily.doubling()


@pytest.fixture(scope="session")
def quad():
    return NormalFormField()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
