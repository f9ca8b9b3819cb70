"""Tests for the spinorial Wigner-BGK solver."""

import math

import numpy as np
import pytest

from spinqdd.core.errors import BoundaryLeakError, ConfigurationError
from spinqdd.physics.fields import PGrid, PhaseSpaceField, SpinField
from spinqdd.physics.fluid import FluidParams
from spinqdd.physics.kinetic import (
    HydroComparison,
    HydroRow,
    KineticSolver,
    KineticState,
    equilibrium,
    hydrodynamic_compare,
    kinetic_step,
    moments,
)
from tests.helpers import homogeneous, smooth_state


def kinetic_params(grid, tau=0.02, alpha=0.5, eps=0.01, potential=False):
    V = 0.05 * np.cos(grid.x1) if potential else np.zeros(grid.shape)
    return FluidParams(eps=eps, alpha=alpha, tau=tau, V=V)


class TestEquilibrium:
    def test_moments_are_reproduced(self, state, pgrid, tolerances):
        W = equilibrium(state, 0.5, pgrid)
        N = moments(W, state.eps)
        np.testing.assert_allclose(N.n0, state.n0, atol=tolerances.bgk_conservation)
        np.testing.assert_allclose(N.nvec, state.nvec, atol=tolerances.bgk_conservation / state.eps)

    def test_higher_closure_order(self, state, pgrid, tolerances):
        W = equilibrium(state, 0.5, pgrid, order=2)
        np.testing.assert_allclose(moments(W, state.eps).n0, state.n0, atol=tolerances.bgk_conservation)


class TestSubsteps:
    def test_closure_order_range(self, grid, pgrid):
        with pytest.raises(ConfigurationError):
            KineticSolver(kinetic_params(grid), grid, pgrid, closure_order=4)

    def test_transport_leaves_homogeneous_data(self, grid, pgrid):
        solver = KineticSolver(kinetic_params(grid), grid, pgrid)
        W = equilibrium(homogeneous(grid, [0.2, 0.0, 0.3], eps=0.01), 0.5, pgrid)
        np.testing.assert_allclose(solver.transport(W.values, 0.05), W.values, atol=1e-14)

    def test_rotation_preserves_spin_norm(self, state, pgrid, tolerances):
        solver = KineticSolver(kinetic_params(state.grid), state.grid, pgrid)
        W = equilibrium(state, 0.5, pgrid)
        rotated = PhaseSpaceField(solver.rotate(W.values, 0.1), state.grid, pgrid)
        assert np.max(np.abs(rotated.spin_norm() - W.spin_norm())) < tolerances.precession_norm
        np.testing.assert_array_equal(rotated.values[0], W.values[0])

    def test_relaxation_conserves_moments(self, state, pgrid, tolerances):
        solver = KineticSolver(kinetic_params(state.grid, eps=state.eps), state.grid, pgrid)
        W = equilibrium(state, 0.5, pgrid)
        # Anisotropic perturbation with vanishing moments
        W.values[0] += 0.01 * (pgrid.p1**2 - pgrid.p2**2) * pgrid.gaussian()
        relaxed = solver.relax(W, 0.01)
        np.testing.assert_allclose(moments(relaxed, state.eps).n0, state.n0, atol=tolerances.bgk_conservation)

    def test_infinite_tau_skips_relaxation(self, state, pgrid):
        solver = KineticSolver(kinetic_params(state.grid, tau=math.inf), state.grid, pgrid)
        W = equilibrium(state, 0.5, pgrid)
        assert solver.relax(W, 0.01) is W


class TestStep:
    def test_unpolarised_equilibrium_is_stationary(self, grid, pgrid, tolerances):
        params = kinetic_params(grid)
        solver = KineticSolver(params, grid, pgrid)
        start = solver.initial_state(homogeneous(grid, [0.0, 0.0, 0.0], eps=0.01))
        state = start
        for _ in range(3):
            state = solver.step(state, 0.005)
        assert np.max(np.abs(state.W.values - start.W.values)) < tolerances.stationary

    def test_mass_is_conserved(self, grid, pgrid, tolerances):
        N = smooth_state(grid, eps=0.01)
        params = kinetic_params(grid, eps=0.01, potential=True)
        solver = KineticSolver(params, grid, pgrid)
        state = solver.initial_state(N)
        for _ in range(3):
            state = kinetic_step(state, 0.005, solver)
        assert state.t == pytest.approx(0.015)
        assert abs(solver.moments(state).mass() - N.mass()) < tolerances.conservation * N.mass()

    def test_boundary_leak_is_reported(self, grid):
        narrow = PGrid(16, 2.0)
        params = kinetic_params(grid)
        solver = KineticSolver(params, grid, narrow)
        W = equilibrium(homogeneous(grid, [0.0, 0.0, 0.0], eps=0.01), 0.5, narrow)
        with pytest.raises(BoundaryLeakError):
            solver.step(KineticState(W, 0.0, params), 0.005)


class TestHydroComparison:
    def test_ratios(self):
        rows = [HydroRow(tau, tau / 10, err, 0.01, 10) for tau, err in ((0.04, 4e-3), (0.02, 2e-3), (0.01, 1e-3))]
        table = HydroComparison(rows, "spin_vector")
        assert table.ratios == pytest.approx([2.0, 2.0])
        data = table.to_dict()
        assert data["fluid_model"] == "spin_vector"
        assert [row["tau"] for row in data["rows"]] == [0.04, 0.02, 0.01]

    def test_zero_error_ratio_is_infinite(self):
        rows = [HydroRow(0.02, 0.002, 1e-3, 0.0, 10), HydroRow(0.01, 0.001, 0.0, 0.0, 10)]
        assert HydroComparison(rows, "local").ratios == [math.inf]

    def test_error_decreases_with_tau(self, grid, pgrid, tolerances):
        N = smooth_state(grid, eps=0.01)
        table = hydrodynamic_compare(N, kinetic_params(grid), [0.04, 0.02], 0.2, pgrid, steps_per_tau=4)
        assert table.fluid_model == "spin_vector"
        assert [row.steps for row in table.rows] == [20, 40]
        assert table.rows[1].error < table.rows[0].error
        assert table.ratios[0] > 1.3
        assert all(row.deviation < tolerances.hydro_deviation for row in table.rows)


class TestClassicalLimit:
    def test_charge_density_follows_heat_equation(self, grid, pgrid):
        # alpha = eps = 0, V = 0: n0 relaxes as 1 + 0.2 exp(-tau t) cos x1 up to O(tau^2)
        tau, dt, steps = 0.05, 0.0125, 40
        N = SpinField(1.0 + 0.2 * np.cos(grid.x1), np.zeros((3,) + grid.shape), 0.0, grid)
        params = kinetic_params(grid, tau=tau, alpha=0.0, eps=0.0)
        solver = KineticSolver(params, grid, pgrid)
        state = solver.initial_state(N)
        for _ in range(steps):
            state = solver.step(state, dt)
        n0 = solver.moments(state).n0
        expected = 1.0 + 0.2 * math.exp(-tau * state.t) * np.cos(grid.x1)
        assert np.max(np.abs(n0 - N.n0)) > 3e-3
        np.testing.assert_allclose(n0, expected, atol=1.5e-3)
        np.testing.assert_allclose(solver.moments(state).nvec, 0.0)

    def test_matches_classical_drift_diffusion(self, grid, pgrid, tolerances):
        N = SpinField(1.0 + 0.2 * np.cos(grid.x1), np.zeros((3,) + grid.shape), 0.0, grid)
        params = kinetic_params(grid, alpha=0.0, eps=0.0, potential=True)
        table = hydrodynamic_compare(N, params, [0.04, 0.02], 0.2, pgrid, steps_per_tau=4)
        assert table.rows[1].error < table.rows[0].error
        assert table.rows[-1].deviation < tolerances.hydro_deviation
