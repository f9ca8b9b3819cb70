"""Tests for grids, spectral calculus and the field containers."""

import numpy as np
import pytest

from spinqdd.core.errors import ConfigurationError, NonPhysicalStateError, ResolutionError
from spinqdd.physics.fields import (
    Grid2D,
    PGrid,
    PhaseSpaceField,
    SpinField,
    assert_resolved,
    dealias,
    quadrature_moment,
    sderiv,
    sgrad_perp,
    shessian,
    slaplacian,
    spectral_tail,
)


def gaussian_field(grid, pgrid):
    """Unit-density unpolarised Maxwellian at every x."""
    values = np.zeros((4,) + grid.shape + (pgrid.n, pgrid.n))
    values[0] = pgrid.gaussian() / (2 * np.pi)
    return PhaseSpaceField(values, grid, pgrid)


class TestGrid:
    @pytest.mark.parametrize("nx", [8, 24])
    def test_rejects_bad_sizes(self, nx):
        with pytest.raises(ConfigurationError):
            Grid2D(nx, 16)

    def test_rejects_non_positive_length(self):
        with pytest.raises(ConfigurationError):
            Grid2D(16, 16, lx=0.0)

    def test_integrate_constant(self, grid):
        assert grid.integrate(np.ones(grid.shape)) == pytest.approx(4 * np.pi**2)

    def test_wavenumbers_drop_nyquist(self, grid):
        assert grid.kx[8, 0] == 0.0
        assert grid.k2[8, 0] == pytest.approx(64.0)


class TestSpectralCalculus:
    def test_derivative_of_sine(self, grid):
        np.testing.assert_allclose(sderiv(np.sin(grid.x1), grid, 0), np.cos(grid.x1), atol=1e-12)
        np.testing.assert_allclose(sderiv(np.sin(grid.x1), grid, 1), 0.0, atol=1e-12)

    def test_laplacian_eigenfunction(self, grid):
        f = np.cos(2 * grid.x1 + grid.x2)
        np.testing.assert_allclose(slaplacian(f, grid), -5 * f, atol=1e-11)

    def test_grad_perp(self, grid):
        got = sgrad_perp(np.sin(grid.x1), grid)
        np.testing.assert_allclose(got[0], 0.0, atol=1e-12)
        np.testing.assert_allclose(got[1], -np.cos(grid.x1), atol=1e-12)
        np.testing.assert_allclose(got[2], 0.0)

    def test_hessian_mixed_entry(self, grid):
        hess = shessian(np.cos(grid.x1) * np.cos(grid.x2), grid)
        np.testing.assert_allclose(hess[0, 1], np.sin(grid.x1) * np.sin(grid.x2), atol=1e-12)
        np.testing.assert_allclose(hess[0, 1], hess[1, 0], atol=1e-14)

    def test_dealias_removes_high_modes(self, grid):
        low = np.cos(2 * grid.x1)
        np.testing.assert_allclose(dealias(low + np.cos(7 * grid.x1), grid), low, atol=1e-12)

    def test_resolution_guard(self, grid, rng):
        assert spectral_tail(np.cos(grid.x1), grid) < 1e-14
        with pytest.raises(ResolutionError):
            assert_resolved(rng.normal(size=grid.shape), grid, "noise")


class TestSpinField:
    def test_physical_cone(self, state):
        assert state.is_physical()
        assert not SpinField(state.n0, 10 * state.nvec, 1.0, state.grid).is_physical()

    def test_require_physical_raises(self, grid):
        n0 = np.ones(grid.shape)
        nvec = np.zeros((3,) + grid.shape)
        nvec[2] = 2.0
        with pytest.raises(NonPhysicalStateError):
            SpinField(n0, nvec, 0.5, grid).require_physical()

    def test_shape_mismatch(self, grid):
        with pytest.raises(ConfigurationError):
            SpinField(np.ones((8, 8)), np.zeros((3, 16, 16)), 0.1, grid)

    def test_mass_and_density_matrix(self, state):
        assert state.mass() == pytest.approx(4 * np.pi**2)
        N = state.density_matrix()
        np.testing.assert_allclose(N.v.real, state.eps * state.nvec)

    def test_stacked_layout(self, state):
        u = state.stacked()
        assert u.shape == (4, 16, 16)
        again = SpinField.from_stacked(u, state.eps, state.grid)
        np.testing.assert_array_equal(again.nvec, state.nvec)


class TestPhaseSpace:
    def test_pgrid_rejects_odd_count(self):
        with pytest.raises(ConfigurationError):
            PGrid(33, 8.0)

    def test_gaussian_moments(self, grid, pgrid, tolerances):
        w = gaussian_field(grid, pgrid)
        np.testing.assert_allclose(quadrature_moment(w).s.real, 1.0, atol=tolerances.moments)
        np.testing.assert_allclose(quadrature_moment(w, (2, 0)).s.real, 1.0, atol=tolerances.moments)
        np.testing.assert_allclose(quadrature_moment(w, (1, 0)).s.real, 0.0, atol=tolerances.moments)

    def test_boundary_fraction(self, grid, pgrid):
        assert gaussian_field(grid, pgrid).boundary_fraction() < 1e-12
        assert gaussian_field(grid, PGrid(16, 1.0)).boundary_fraction() > 1e-3

    def test_moment_degree_limit(self, grid, pgrid):
        with pytest.raises(ConfigurationError):
            quadrature_moment(gaussian_field(grid, pgrid), (2, 1))

    def test_shape_mismatch(self, grid, pgrid):
        with pytest.raises(ConfigurationError):
            PhaseSpaceField(np.zeros((4, 16, 16, 8, 8)), grid, pgrid)
