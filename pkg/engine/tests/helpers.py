"""Small builders shared by several test modules."""

import numpy as np

from spinqdd.physics.fields import Grid2D, SpinField


def smooth_state(grid: Grid2D, eps: float = 0.1) -> SpinField:
    """Low-mode state with n0 in [0.7, 1.3] and a nonzero out-of-plane spin."""
    x1, x2 = grid.x1, grid.x2
    n0 = 1.0 + 0.2 * np.cos(x1) + 0.1 * np.cos(x2 + 0.3)
    nvec = np.stack([0.3 * np.cos(x2), 0.2 * np.sin(x1), 0.4 + 0.2 * np.cos(x1 + x2)])
    return SpinField(n0, nvec, eps, grid)


def homogeneous(grid: Grid2D, nvec, eps: float = 0.1, n0: float = 1.0) -> SpinField:
    ones = np.ones(grid.shape)
    return SpinField(n0 * ones, np.asarray(nvec, dtype=float)[:, None, None] * ones, eps, grid)
