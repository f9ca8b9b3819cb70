"""Shared grids, states and generators for the engine tests."""

import numpy as np
import pytest

from spinqdd.core.config import settings
from spinqdd.physics.fields import Grid2D, PGrid
from tests.helpers import smooth_state


@pytest.fixture
def tolerances():
    return settings.TOLERANCES


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid():
    return Grid2D(16, 16)


@pytest.fixture
def fine_grid():
    return Grid2D(32, 32)


@pytest.fixture
def pgrid():
    return PGrid(32, 8.0)


@pytest.fixture
def state(grid):
    return smooth_state(grid)
