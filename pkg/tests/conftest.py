import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mmslab import (circle_space, interval_space, ou_chain_space, torus_space,
                    two_point_space)


@pytest.fixture(scope="session")
def circle16():
    return circle_space(16)


@pytest.fixture(scope="session")
def circle64():
    return circle_space(64)


@pytest.fixture(scope="session")
def circle256():
    return circle_space(256)


@pytest.fixture(scope="session")
def circle512():
    return circle_space(512)


@pytest.fixture(scope="session")
def circle1024():
    return circle_space(1024)


@pytest.fixture(scope="session")
def interval24():
    return interval_space(24)


@pytest.fixture(scope="session")
def ou24():
    return ou_chain_space(24, 1.0)


@pytest.fixture(scope="session")
def torus8():
    return torus_space(8)


@pytest.fixture(scope="session")
def two_point():
    return two_point_space(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def sin_density(space, k=1):
    return np.sin(k * space.coords)
