"""Periodic grids, spectral calculus and phase-space containers.

Scalar fields are plain ``numpy`` arrays whose two trailing axes are the
x-grid; any leading axes (vector components, Pauli index) ride along.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
import scipy.fft

from spinqdd.core.config import settings
from spinqdd.core.errors import ConfigurationError, NonPhysicalStateError, ResolutionError
from spinqdd.physics.pauli import PauliCoeffs

logger = logging.getLogger(__name__)

ScalarField = np.ndarray
SPATIAL_AXES = (-2, -1)
PHASE_SPATIAL_AXES = (-4, -3)


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on [0, lx) x [0, ly)."""

    nx: int
    ny: int
    lx: float = 2 * np.pi
    ly: float = 2 * np.pi

    def __post_init__(self):
        for name, n in (("nx", self.nx), ("ny", self.ny)):
            if n < 16 or n & (n - 1):
                raise ConfigurationError(f"{name} must be a power of two >= 16, got {n}", **{name: n})
        if self.lx <= 0 or self.ly <= 0:
            raise ConfigurationError("Domain lengths must be positive", lx=self.lx, ly=self.ly)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def dx(self) -> Tuple[float, float]:
        return (self.lx / self.nx, self.ly / self.ny)

    @property
    def cell_area(self) -> float:
        return self.lx * self.ly / (self.nx * self.ny)

    @cached_property
    def x1(self) -> np.ndarray:
        return np.arange(self.nx)[:, None] * self.dx[0] * np.ones((1, self.ny))

    @cached_property
    def x2(self) -> np.ndarray:
        return np.ones((self.nx, 1)) * np.arange(self.ny)[None, :] * self.dx[1]

    @staticmethod
    def _wavenumbers(n: int, length: float, keep_nyquist: bool) -> np.ndarray:
        k = 2 * np.pi * scipy.fft.fftfreq(n, length / n)
        if not keep_nyquist:
            k[n // 2] = 0.0
        return k

    @cached_property
    def kx(self) -> np.ndarray:
        """First-derivative wavenumbers along x1 (Nyquist mode removed), shape (nx, 1)."""
        return self._wavenumbers(self.nx, self.lx, False)[:, None]

    @cached_property
    def ky(self) -> np.ndarray:
        return self._wavenumbers(self.ny, self.ly, False)[None, :]

    @cached_property
    def k2(self) -> np.ndarray:
        """|k|^2 including the Nyquist modes."""
        k1 = self._wavenumbers(self.nx, self.lx, True)[:, None]
        k2 = self._wavenumbers(self.ny, self.ly, True)[None, :]
        return k1**2 + k2**2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        m1 = np.abs(scipy.fft.fftfreq(self.nx, 1.0 / self.nx)) < self.nx / 3
        m2 = np.abs(scipy.fft.fftfreq(self.ny, 1.0 / self.ny)) < self.ny / 3
        return m1[:, None] & m2[None, :]

    def integrate(self, f: np.ndarray) -> np.ndarray:
        return np.sum(f, axis=SPATIAL_AXES) * self.cell_area

    def l2(self, f: np.ndarray) -> np.ndarray:
        return np.sqrt(self.integrate(np.abs(f) ** 2))


# Spectral calculus


def _fft(f, axes):
    return scipy.fft.fft2(f, axes=axes)


def _ifft(fh, axes, real):
    out = scipy.fft.ifft2(fh, axes=axes)
    return out.real if real else out


def _axis_k(grid: Grid2D, axis: int, axes) -> np.ndarray:
    k = grid.kx if axis == 0 else grid.ky
    if axes == PHASE_SPATIAL_AXES:
        return k[:, :, None, None]
    return k


def sderiv(f: ScalarField, grid: Grid2D, axis: int, axes=SPATIAL_AXES) -> np.ndarray:
    """Spectral derivative along x1 (axis=0) or x2 (axis=1)."""
    real = np.isrealobj(f)
    return _ifft(1j * _axis_k(grid, axis, axes) * _fft(f, axes), axes, real)


def slaplacian(f: ScalarField, grid: Grid2D) -> np.ndarray:
    return _ifft(-grid.k2 * _fft(f, SPATIAL_AXES), SPATIAL_AXES, np.isrealobj(f))


def sbilaplacian(f: ScalarField, grid: Grid2D) -> np.ndarray:
    return _ifft(grid.k2**2 * _fft(f, SPATIAL_AXES), SPATIAL_AXES, np.isrealobj(f))


def sgrad(f: ScalarField, grid: Grid2D) -> np.ndarray:
    """Gradient with the derivative index inserted before the spatial axes: shape (..., 2, nx, ny)."""
    return np.stack([sderiv(f, grid, 0), sderiv(f, grid, 1)], axis=-3)


def sdiv(flux: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Divergence of a (..., 2, nx, ny) flux."""
    return sderiv(flux[..., 0, :, :], grid, 0) + sderiv(flux[..., 1, :, :], grid, 1)


def sgrad_perp(f: ScalarField, grid: Grid2D) -> np.ndarray:
    """(d2 f, -d1 f, 0) as a (..., 3, nx, ny) array."""
    d1 = sderiv(f, grid, 0)
    d2 = sderiv(f, grid, 1)
    return np.stack([d2, -d1, np.zeros_like(d1)], axis=-3)


def shessian(f: ScalarField, grid: Grid2D) -> np.ndarray:
    """Hessian with shape (..., 2, 2, nx, ny)."""
    fh = _fft(f, SPATIAL_AXES)
    ks = (grid.kx, grid.ky)
    real = np.isrealobj(f)
    rows = [np.stack([_ifft(-ks[a] * ks[b] * fh, SPATIAL_AXES, real) for b in range(2)], axis=-3) for a in range(2)]
    return np.stack(rows, axis=-4)


def dealias(f: ScalarField, grid: Grid2D) -> np.ndarray:
    """Two-thirds rule truncation."""
    return _ifft(_fft(f, SPATIAL_AXES) * grid.dealias_mask, SPATIAL_AXES, np.isrealobj(f))


def spectral_tail(f: ScalarField, grid: Grid2D) -> float:
    """Largest spectral amplitude outside the two-thirds band relative to the largest overall."""
    fh = np.abs(_fft(f, SPATIAL_AXES))
    peak = float(np.max(fh))
    if peak == 0.0:
        return 0.0
    return float(np.max(np.where(grid.dealias_mask, 0.0, fh))) / peak


def assert_resolved(f: ScalarField, grid: Grid2D, name: str = "field", tol: Optional[float] = None):
    tol = settings.TOLERANCES.spectral if tol is None else tol
    tail = spectral_tail(f, grid)
    if tail > tol:
        raise ResolutionError(f"{name} is not spectrally resolved (tail {tail:.2e} > {tol:.0e})", name=name, tail=tail)


def floor_density(n0: ScalarField) -> np.ndarray:
    """Clamp n0 at N_MIN_FRACTION of its maximum before dividing by it."""
    return np.maximum(n0, settings.N_MIN_FRACTION * np.max(n0))


# Macroscopic state


@dataclass(frozen=True)
class SpinField:
    """N = n0 sigma0 + eps n.sigma on a periodic grid."""

    n0: np.ndarray
    nvec: np.ndarray
    eps: float
    grid: Grid2D

    def __post_init__(self):
        if self.n0.shape != self.grid.shape or self.nvec.shape != (3,) + self.grid.shape:
            raise ConfigurationError("SpinField components do not match the grid", n0=self.n0.shape, nvec=self.nvec.shape)

    @classmethod
    def from_stacked(cls, u: np.ndarray, eps: float, grid: Grid2D) -> "SpinField":
        return cls(u[0], u[1:], eps, grid)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.n0[None], self.nvec], axis=0)

    @property
    def n0_floor(self) -> np.ndarray:
        return floor_density(self.n0)

    @property
    def spin_norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.nvec**2, axis=0))

    def polarization(self) -> float:
        """max |n| / n0 over the grid."""
        return float(np.max(self.spin_norm / self.n0_floor))

    def is_physical(self) -> bool:
        return bool(np.all(np.isfinite(self.n0)) and np.all(self.n0 > 0) and np.all(self.eps * self.spin_norm < self.n0))

    def require_physical(self):
        if not self.is_physical():
            margin = float(np.min(self.n0 - self.eps * self.spin_norm))
            raise NonPhysicalStateError(
                "Density matrix is not positive definite (need eps|n| < n0)", margin=margin, eps=self.eps
            )

    def density_matrix(self) -> PauliCoeffs:
        return PauliCoeffs.from_parts(self.n0, self.eps * self.nvec)

    def mass(self) -> float:
        return float(self.grid.integrate(self.n0))


# Phase space


@dataclass(frozen=True)
class PGrid:
    """Uniform truncated momentum box [-pmax, pmax)^2 with periodic-equivalent nodes."""

    n: int = field(default_factory=lambda: settings.NP)
    pmax: float = field(default_factory=lambda: settings.PMAX)

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ConfigurationError(f"Momentum grid needs an even node count >= 8, got {self.n}", n=self.n)

    @property
    def dp(self) -> float:
        return 2 * self.pmax / self.n

    @property
    def cell_area(self) -> float:
        return self.dp**2

    @cached_property
    def nodes(self) -> np.ndarray:
        return -self.pmax + np.arange(self.n) * self.dp

    @cached_property
    def p1(self) -> np.ndarray:
        return self.nodes[:, None] * np.ones((1, self.n))

    @cached_property
    def p2(self) -> np.ndarray:
        return np.ones((self.n, 1)) * self.nodes[None, :]

    @cached_property
    def eta(self) -> np.ndarray:
        """Fourier variable dual to p."""
        return 2 * np.pi * scipy.fft.fftfreq(self.n, self.dp)

    def monomial(self, mu: Tuple[int, int]) -> np.ndarray:
        return self.p1 ** mu[0] * self.p2 ** mu[1]

    def gaussian(self, beta: float = 1.0) -> np.ndarray:
        return np.exp(-0.5 * beta * (self.p1**2 + self.p2**2))


@dataclass
class PhaseSpaceField:
    """Pauli components of W sampled on x-grid x p-grid, shape (4, nx, ny, np, np)."""

    values: np.ndarray
    grid: Grid2D
    pgrid: PGrid

    def __post_init__(self):
        expected = (4,) + self.grid.shape + (self.pgrid.n, self.pgrid.n)
        if self.values.shape != expected:
            raise ConfigurationError("Phase-space samples do not match the grids", shape=self.values.shape, expected=expected)

    def copy(self) -> "PhaseSpaceField":
        return PhaseSpaceField(self.values.copy(), self.grid, self.pgrid)

    def boundary_fraction(self) -> float:
        """Share of |W| carried by the outermost ring of p-nodes."""
        mag = np.abs(self.values)
        total = float(np.sum(mag))
        if total == 0.0:
            return 0.0
        ring = np.sum(mag[..., 0, :]) + np.sum(mag[..., -1, :]) + np.sum(mag[..., 1:-1, 0]) + np.sum(mag[..., 1:-1, -1])
        return float(ring) / total

    def spin_norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values[1:] ** 2, axis=0))


def quadrature_moment(w: PhaseSpaceField, mu: Tuple[int, int] = (0, 0)) -> PauliCoeffs:
    """Periodic trapezoidal p-integral of p^mu W."""
    if sum(mu) > 2:
        raise ConfigurationError(f"Moment weights are limited to degree 2, got {mu}", mu=mu)
    fraction = w.boundary_fraction()
    if fraction > settings.BOUNDARY_WARN_FRACTION:
        logger.warning(f"p-boundary carries {fraction:.2e} of the phase-space mass; widen pmax")
    weight = w.pgrid.monomial(mu)
    return PauliCoeffs(np.sum(w.values * weight, axis=(-2, -1)) * w.pgrid.cell_area)
