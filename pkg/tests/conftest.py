import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from jampack.container import build_cube_constraints

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TWO_DISK_R = (2.0 - math.sqrt(2.0)) / 2.0
THREE_DISK_R = (4.0 + math.sqrt(2.0) - math.sqrt(6.0)) / (2.0 * (3.0 + 2.0 * math.sqrt(2.0)))
GRID_2x2 = np.array([[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]])


def two_disk_max():
    return np.array([[TWO_DISK_R, TWO_DISK_R], [1 - TWO_DISK_R, 1 - TWO_DISK_R]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cs22():
    return build_cube_constraints(2, 2)


@pytest.fixture
def cs42():
    return build_cube_constraints(4, 2)
