import numpy as np
import pytest

from fracdisp.spectral import Grid1D, gaussian_datum


@pytest.fixture(scope="session")
def grid():
    return Grid1D(20.0, 2048)


@pytest.fixture(scope="session")
def small_grid():
    return Grid1D(8.0, 256)


@pytest.fixture(scope="session")
def gauss(grid):
    return gaussian_datum(grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
