import numpy as np
import pytest

from varlp import build_daubechies, make_grid


@pytest.fixture(scope="session")
def db3():
    return build_daubechies(3, 12)


@pytest.fixture(scope="session")
def haar():
    return build_daubechies(1, 10)


@pytest.fixture(scope="session")
def grid_l4_r10():
    return make_grid(4, 10)


@pytest.fixture(scope="session")
def grid_l2_r8():
    return make_grid(2, 8)


def l2_norm(f):
    return float(np.sqrt(f.grid.h * np.sum(f.samples**2)))
