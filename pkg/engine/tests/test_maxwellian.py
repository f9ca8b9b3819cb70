"""Tests for the semiclassical Maxwellian, the moment closure and the currents."""

import numpy as np
import pytest

from spinqdd.core.config import settings
from spinqdd.core.errors import ConfigurationError, NonPhysicalStateError
from spinqdd.physics.fields import PGrid, SpinField
from spinqdd.physics.maxwellian import (
    CLOSED_FORM_ORDERS,
    MultiplierField,
    current_density,
    derive_orders,
    g_order,
    maxwellian,
    maxwellian_moments,
    multipliers_from_moments,
    recursion_residual,
    residual_current,
    solve_leading_spin,
    transport_moment,
)
from spinqdd.physics.symbols import gaussian_moment
from tests.helpers import homogeneous, smooth_state

ALPHA = 0.5


def multipliers(grid):
    a0 = 0.2 * np.cos(grid.x1) - 0.1 * np.sin(grid.x2) - 1.5
    avec = 0.1 * np.stack([np.cos(grid.x2), np.sin(grid.x1), 0.3 + np.cos(grid.x1 + grid.x2)])
    return a0, avec


class TestOrders:
    @pytest.mark.parametrize("k", [-1, CLOSED_FORM_ORDERS + 1])
    def test_closed_form_range(self, grid, k):
        a0, avec = multipliers(grid)
        with pytest.raises(ConfigurationError):
            g_order(k, 1.0, a0, avec, ALPHA, grid)

    def test_first_order_is_h1(self, grid):
        a0, avec = multipliers(grid)
        coeffs = g_order(1, 1.0, a0, avec, ALPHA, grid).coefficients()
        np.testing.assert_allclose(coeffs[(0, 0)][1:].real, avec)
        np.testing.assert_allclose(coeffs[(1, 0)][2].real, ALPHA)
        np.testing.assert_allclose(coeffs[(0, 1)][1].real, -ALPHA)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_recursion_residual(self, fine_grid, k, tolerances):
        a0, avec = multipliers(fine_grid)
        assert recursion_residual(k, a0, avec, ALPHA, fine_grid) < tolerances.recursion

    def test_derived_orders_match_closed_forms(self, fine_grid, tolerances):
        a0, avec = multipliers(fine_grid)
        derived = derive_orders(3, 1.0, a0, avec, ALPHA, fine_grid)
        for k in range(4):
            gap = derived[k] - g_order(k, 1.0, a0, avec, ALPHA, fine_grid)
            assert gap.sup_norm() < tolerances.recursion, f"order {k}"

    def test_third_order_rashba_terms_without_spin_field(self, fine_grid, tolerances):
        a0, _ = multipliers(fine_grid)
        avec = np.zeros((3,) + fine_grid.shape)
        derived = derive_orders(3, 1.0, a0, avec, ALPHA, fine_grid)[3]
        gap = derived - g_order(3, 1.0, a0, avec, ALPHA, fine_grid)
        assert gap.sup_norm() < tolerances.recursion
        assert recursion_residual(3, a0, avec, ALPHA, fine_grid) < tolerances.recursion

    def test_derived_orders_stay_within_dmax(self, grid):
        a0, avec = multipliers(grid)
        orders = derive_orders(4, 1.0, a0, avec, ALPHA, grid)
        for k, g in enumerate(orders):
            assert g.degree <= k, f"order {k}"
        mult = MultiplierField.leading(a0, avec, 0.1, ALPHA, grid)
        assert maxwellian(mult, 4).degree <= settings.DMAX
        assert maxwellian(mult, 3, source="derived").degree <= settings.DMAX

    def test_constant_multipliers_give_power_series(self, grid):
        # x-independent, alpha = 0: g^(2) = beta^2 (a.sigma)^2 / 2 = beta^2 |a|^2 / 2
        a0 = np.full(grid.shape, 0.3)
        avec = np.array([0.1, -0.2, 0.2])[:, None, None] * np.ones(grid.shape)
        g2 = g_order(2, 0.8, a0, avec, 0.0, grid).coefficients()
        np.testing.assert_allclose(g2[(0, 0)][0].real, 0.8**2 * 0.09 / 2, atol=1e-14)

    def test_maxwellian_order_range(self, grid):
        a0, avec = multipliers(grid)
        mult = MultiplierField.leading(a0, avec, 0.1, ALPHA, grid)
        with pytest.raises(ConfigurationError):
            maxwellian(mult, 5)


class TestLeadingSpin:
    def test_inverts_cosh_sinh_maxwellian(self, grid, tolerances):
        n0 = 1.0 + 0.2 * np.cos(grid.x1)
        spin = np.stack([0.3 * np.cos(grid.x2), 0.2 * np.ones(grid.shape), -0.4 * np.sin(grid.x1)])
        a0, avec = solve_leading_spin(n0, spin)
        mult = MultiplierField.leading(a0, avec, 0.0, 0.0, grid)
        m = gaussian_moment(maxwellian(mult, 0, leading_spin=True))
        assert np.max(np.abs(m.s.real - n0)) < tolerances.leading_spin
        assert np.max(np.abs(m.v.real - spin)) < tolerances.leading_spin

    def test_rejects_saturated_spin(self):
        with pytest.raises(ConfigurationError):
            solve_leading_spin(np.array([1.0]), np.array([[0.0], [0.0], [1.0]]))


class TestClosure:
    def test_unknown_closure(self, state):
        with pytest.raises(ConfigurationError):
            multipliers_from_moments(state, ALPHA, "exact")

    def test_non_physical_state(self, grid):
        with pytest.raises(NonPhysicalStateError):
            multipliers_from_moments(homogeneous(grid, [0.0, 0.0, 20.0]), ALPHA)

    def test_leading_multipliers(self, state):
        mult = multipliers_from_moments(state, ALPHA)
        np.testing.assert_allclose(mult.a0_0, np.log(state.n0 / (2 * np.pi)))
        np.testing.assert_allclose(mult.avec_0, state.nvec / state.n0)

    def test_corrections_do_not_depend_on_eps(self, state):
        a = multipliers_from_moments(state, ALPHA)
        b = multipliers_from_moments(SpinField(state.n0, state.nvec, 0.05, state.grid), ALPHA)
        np.testing.assert_allclose(a.a0_2, b.a0_2)
        np.testing.assert_allclose(a.avec_2, b.avec_2)

    @pytest.mark.parametrize("closure", ["derived", "closed_form"])
    def test_moments_converge(self, fine_grid, closure):
        errors = []
        for eps in (0.1, 0.05):
            N = smooth_state(fine_grid, eps)
            m = maxwellian_moments(multipliers_from_moments(N, ALPHA, closure), 3)
            errors.append((np.max(np.abs(m.s.real - N.n0)), np.max(np.abs(m.v.real - eps * N.nvec))))
        assert errors[0][0] / errors[1][0] > 8
        assert errors[0][1] / errors[1][1] > 4


class TestCurrents:
    def test_homogeneous_state_carries_no_current(self, grid):
        mult = multipliers_from_moments(homogeneous(grid, [0.3, 0.2, 0.4]), 0.0)
        currents = current_density(mult, 3)
        assert np.max(np.abs(currents.charge)) < 1e-12
        assert np.max(np.abs(currents.spin)) < 1e-12
        assert np.max(np.abs(currents.perp_dot)) < 1e-12

    def test_residual_current_vanishes_for_homogeneous_state(self, grid):
        assert np.max(np.abs(residual_current(homogeneous(grid, [0.3, 0.2, 0.4]), 0.0))) < 1e-14

    def test_residual_current_scales_as_eps_cubed(self, state):
        big = residual_current(state, ALPHA)
        small = residual_current(SpinField(state.n0, state.nvec, state.eps / 2, state.grid), ALPHA)
        np.testing.assert_allclose(big, 8 * small, rtol=1e-9, atol=1e-16)

    def test_transport_moment_matches_residual_current(self, fine_grid, tolerances):
        N = smooth_state(fine_grid, eps=0.1)
        mult = multipliers_from_moments(N, ALPHA, "derived")
        sampled = transport_moment(mult, np.zeros(fine_grid.shape), 4, PGrid(32, 8.0), source="derived").v.real
        closed = residual_current(N, ALPHA)
        assert np.max(np.abs(sampled - closed)) < tolerances.residual_current_rel * np.max(np.abs(closed))
