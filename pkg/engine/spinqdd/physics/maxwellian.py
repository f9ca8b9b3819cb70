"""Semiclassical quantum Maxwellian, the moment closure and the current moments.

The Maxwellian M(N) = Exp(-H + A) is expanded as sum_k eps^k g^(k)(beta=1) where
every order is a GaussianSymbol. Orders 0..3 are available as closed forms;
any order up to 4 can also be produced by integrating the recursive beta
equations term by term.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
from scipy.optimize import brentq

from spinqdd.core.errors import ConfigurationError
from spinqdd.physics.fields import (
    Grid2D,
    PGrid,
    SpinField,
    quadrature_moment,
    sderiv,
    sgrad,
    sgrad_perp,
    shessian,
    slaplacian,
)
from spinqdd.physics.moyal import moyal_j, transport_apply
from spinqdd.physics.pauli import PauliCoeffs, exp_spin, pauli_mul
from spinqdd.physics.symbols import (
    GaussianSymbol,
    Monomial,
    gaussian_moment,
    h0_symbol,
    h1_symbol,
    scalar_coeff,
    vector_coeff,
)

logger = logging.getLogger(__name__)

BETA_SAMPLES = (0.25, 0.5, 0.75, 1.0)
CLOSED_FORM_ORDERS = 3
MAX_ORDER = 4
CLOSURES = ("derived", "closed_form")

Poly = Dict[Monomial, np.ndarray]


@dataclass
class MultiplierField:
    """Lagrange multipliers a0 = a0_0 + eps^2 a0_2 and a = a_0 + eps^2 a_2; odd orders vanish."""

    a0_0: np.ndarray
    a0_2: np.ndarray
    avec_0: np.ndarray
    avec_2: np.ndarray
    eps: float
    alpha: float
    grid: Grid2D

    @property
    def a0(self) -> np.ndarray:
        return self.a0_0 + self.eps**2 * self.a0_2

    @property
    def avec(self) -> np.ndarray:
        return self.avec_0 + self.eps**2 * self.avec_2

    @classmethod
    def leading(cls, a0: np.ndarray, avec: np.ndarray, eps: float, alpha: float, grid: Grid2D) -> "MultiplierField":
        zero = np.zeros_like(a0)
        return cls(a0, zero, avec, np.zeros_like(avec), eps, alpha, grid)


# Polynomial helpers for the closed forms


def _add(*polys: Poly) -> Poly:
    out: Poly = {}
    for poly in polys:
        for mu, c in poly.items():
            out[mu] = out[mu] + c if mu in out else c
    return out


def _scale(poly: Poly, factor) -> Poly:
    return {mu: factor * c for mu, c in poly.items()}


def _mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for mu, ca in a.items():
        for nu, cb in b.items():
            key = (mu[0] + nu[0], mu[1] + nu[1])
            prod = pauli_mul(PauliCoeffs(ca), PauliCoeffs(cb)).data
            out[key] = out[key] + prod if key in out else prod
    return out


def _cross(a: Poly, b: Poly) -> Poly:
    """Cross product of the spin parts, as a spin-valued polynomial."""
    out: Poly = {}
    for mu, ca in a.items():
        for nu, cb in b.items():
            key = (mu[0] + nu[0], mu[1] + nu[1])
            prod = np.zeros_like(ca)
            prod[1:] = np.cross(ca[1:], cb[1:], axisa=0, axisb=0, axisc=0)
            out[key] = out[key] + prod if key in out else prod
    return out


def _quadratic_form(hess: np.ndarray, vector: bool, shape) -> Poly:
    """p^T (hess) p for a (2, 2, ...) Hessian of a scalar or spin field."""
    make = vector_coeff if vector else scalar_coeff
    return {
        (2, 0): make(hess[..., 0, 0, :, :], shape),
        (1, 1): make(2 * hess[..., 0, 1, :, :], shape),
        (0, 2): make(hess[..., 1, 1, :, :], shape),
    }


def _lift(poly: Poly, m: int) -> Dict[tuple, np.ndarray]:
    return {(m,) + mu: c for mu, c in poly.items()}


def _curl_perp(avec: np.ndarray, grid: Grid2D) -> np.ndarray:
    """grad_perp x a = (-d1 a3, -d2 a3, d1 a1 + d2 a2)."""
    d1 = sderiv(avec, grid, 0)
    d2 = sderiv(avec, grid, 1)
    return np.stack([-d1[2], -d2[2], d1[0] + d2[1]])


def g_order(k: int, beta: float, a0: np.ndarray, avec: np.ndarray, alpha: float, grid: Grid2D) -> GaussianSymbol:
    """Closed-form k-th order term of Exp(beta(h0 sigma0 + eps h1.sigma)), k = 0..3."""
    if not 0 <= k <= CLOSED_FORM_ORDERS:
        raise ConfigurationError(f"Closed forms exist for orders 0..{CLOSED_FORM_ORDERS}, got {k}", k=k)
    shape = grid.shape
    g = GaussianSymbol(beta, a0, grid)
    if k == 0:
        return GaussianSymbol.unit(beta, a0, grid)

    h1 = h1_symbol(avec, alpha, grid).terms
    if k == 1:
        return g.like(_lift(h1, 1))

    grad_a0 = sgrad(a0, grid)
    hess_a0 = shessian(a0, grid)
    lap_a0 = slaplacian(a0, grid)
    h1_sq = _mul(h1, h1)
    quad = _add({(0, 0): scalar_coeff(np.sum(grad_a0**2, axis=0), shape)}, _scale(_quadratic_form(hess_a0, False, shape), -1))

    if k == 2:
        beta2 = _scale(_add({(0, 0): scalar_coeff(lap_a0, shape)}, _scale(h1_sq, 4)), 1 / 8)
        return g.like(_add(_lift(beta2, 2), _lift(_scale(quad, 1 / 24), 3)))

    # k == 3
    grad_a = sgrad(avec, grid)  # (3, 2, nx, ny)
    hess_a = shessian(avec, grid)  # (3, 2, 2, nx, ny)
    beta2 = {(0, 0): vector_coeff((3 * slaplacian(avec, grid) - 12 * alpha * _curl_perp(avec, grid)) / 24, shape)}

    grad_a_dot_grad_a0 = np.einsum("ikxy,kxy->ixy", grad_a, grad_a0)
    perp_grad_a0 = np.stack([grad_a0[1], -grad_a0[0], np.zeros(shape)])
    drift = {
        (0, 0): vector_coeff(-alpha * perp_grad_a0, shape),
        (1, 0): vector_coeff(grad_a[:, 0], shape),
        (0, 1): vector_coeff(grad_a[:, 1], shape),
    }
    # -2 alpha grad_perp(grad a0 . p)
    rashba_hess = {
        (1, 0): vector_coeff(-2 * alpha * np.stack([hess_a0[0, 1], -hess_a0[0, 0], np.zeros(shape)]), shape),
        (0, 1): vector_coeff(-2 * alpha * np.stack([hess_a0[1, 1], -hess_a0[0, 1], np.zeros(shape)]), shape),
    }
    beta3 = _scale(
        _add(
            _mul(_add({(0, 0): scalar_coeff(3 * lap_a0, shape)}, _scale(h1_sq, 4)), h1),
            {(0, 0): vector_coeff(2 * grad_a_dot_grad_a0, shape)},
            _scale(_quadratic_form(hess_a, True, shape), -1),
            rashba_hess,
            _scale(_cross(drift, h1), 4),
        ),
        1 / 24,
    )
    beta4 = _scale(_mul(quad, h1), 1 / 24)
    return g.like(_add(_lift(beta2, 2), _lift(beta3, 3), _lift(beta4, 4)))


def _recursion_rhs(k: int, orders: Sequence[GaussianSymbol], a0, avec, alpha, grid, include_diagonal: bool) -> GaussianSymbol:
    h0 = h0_symbol(a0, grid)
    h1 = h1_symbol(avec, alpha, grid)
    rhs = orders[0].like({})
    for ell in range(0 if include_diagonal else 1, k + 1):
        rhs = rhs + moyal_j(h0, orders[k - ell], ell)
    for ell in range(k):
        rhs = rhs + moyal_j(h1, orders[k - ell - 1], ell)
    return rhs


def derive_orders(kmax: int, beta: float, a0: np.ndarray, avec: np.ndarray, alpha: float, grid: Grid2D) -> List[GaussianSymbol]:
    """g^(0..kmax) from Duhamel's formula applied to the recursive beta equations."""
    if not 0 <= kmax <= MAX_ORDER:
        raise ConfigurationError(f"Derived orders are available up to {MAX_ORDER}, got {kmax}", kmax=kmax)
    orders = [GaussianSymbol.unit(beta, a0, grid)]
    for k in range(1, kmax + 1):
        orders.append(_recursion_rhs(k, orders, a0, avec, alpha, grid, include_diagonal=False).beta_primitive())
    return orders


def recursion_residual(
    k: int, a0: np.ndarray, avec: np.ndarray, alpha: float, grid: Grid2D, betas: Sequence[float] = BETA_SAMPLES
) -> float:
    """sup over x, p-monomials and beta of d/dbeta g^(k) minus the recursive right-hand side."""
    if not 1 <= k <= CLOSED_FORM_ORDERS:
        raise ConfigurationError(f"Recursion residual is defined for k = 1..{CLOSED_FORM_ORDERS}, got {k}", k=k)
    orders = [g_order(j, 1.0, a0, avec, alpha, grid) for j in range(k + 1)]
    residual = orders[k].dbeta() - _recursion_rhs(k, orders, a0, avec, alpha, grid, include_diagonal=True)
    return max(residual.sup_norm(beta) for beta in betas)


def maxwellian(mult: MultiplierField, order: int, leading_spin: bool = False, source: str = "closed_form") -> GaussianSymbol:
    """sum_{k <= order} eps^k g^(k)(1) with the assembled multipliers."""
    grid = mult.grid
    if leading_spin:
        # O(1) spin multiplier: exp(h0) (cosh|a| sigma0 + sinh|a| a/|a| . sigma)
        return GaussianSymbol(1.0, mult.a0, grid, {(0, 0, 0): exp_spin(1.0, mult.avec).data})
    if not 0 <= order <= MAX_ORDER:
        raise ConfigurationError(f"Maxwellian order must lie in 0..{MAX_ORDER}, got {order}", order=order)
    a0, avec = mult.a0, mult.avec
    if order <= CLOSED_FORM_ORDERS and source == "closed_form":
        orders = [g_order(k, 1.0, a0, avec, mult.alpha, grid) for k in range(order + 1)]
    else:
        orders = derive_orders(order, 1.0, a0, avec, mult.alpha, grid)
    total = orders[0]
    for k in range(1, order + 1):
        total = total + orders[k].scale(mult.eps**k)
    return total


# Closure


def _closed_form_spin_correction(n0: np.ndarray, nvec: np.ndarray, alpha: float, grid: Grid2D) -> np.ndarray:
    grad_n0 = sgrad(n0, grid)
    u = nvec / n0
    rel_grad = grad_n0 / n0
    perp_perp = np.stack([-nvec[0], -nvec[1], np.zeros_like(n0)])
    bracket = slaplacian(n0, grid) / n0 - np.sum(rel_grad**2, axis=0) + 4 * np.sum(u**2, axis=0) + 8 * alpha**2
    perp_n0 = sgrad_perp(n0, grid) / n0
    spin_curl = _curl_perp(nvec, grid)
    return (
        bracket * nvec / (12 * n0)
        + alpha**2 * perp_perp / (3 * n0)
        - spin_diffusion_field(n0, nvec, grid) / 12
        + alpha / (6 * n0) * (4 * spin_curl + np.cross(perp_n0, nvec, axisa=0, axisb=0, axisc=0))
    )


def spin_diffusion_field(n0: np.ndarray, nvec: np.ndarray, grid: Grid2D) -> np.ndarray:
    """B(N) = Delta n / n0 - (grad n . grad n0) / n0^2."""
    grad_n = sgrad(nvec, grid)
    grad_n0 = sgrad(n0, grid)
    return slaplacian(nvec, grid) / n0 - np.einsum("ikxy,kxy->ixy", grad_n, grad_n0) / n0**2


def closed_form_charge_correction(n0: np.ndarray, nvec: np.ndarray, alpha: float, grid: Grid2D) -> np.ndarray:
    grad_n0 = sgrad(n0, grid)
    return -(
        (slaplacian(n0, grid) / n0 - np.sum(grad_n0**2, axis=0) / (2 * n0**2)) / 12
        + 0.5 * np.sum((nvec / n0) ** 2, axis=0)
        + alpha**2
    )


def multipliers_from_moments(N: SpinField, alpha: float, closure: str = "derived") -> MultiplierField:
    """Semiclassical multipliers reproducing (n0, eps n) up to the dropped orders."""
    if closure not in CLOSURES:
        raise ConfigurationError(f"Unknown closure '{closure}', expected one of {CLOSURES}", closure=closure)
    N.require_physical()
    grid = N.grid
    n0 = N.n0_floor
    a0_0 = np.log(n0 / (2 * np.pi))
    avec_0 = N.nvec / n0

    if closure == "closed_form":
        a0_2 = closed_form_charge_correction(n0, N.nvec, alpha, grid)
        avec_2 = _closed_form_spin_correction(n0, N.nvec, alpha, grid)
    else:
        # Second- and third-order constraints <M^(2)> = <M^(3)> = 0 solved for the corrections
        g2 = g_order(2, 1.0, a0_0, avec_0, alpha, grid)
        a0_2 = -gaussian_moment(g2).s.real / n0
        g3 = g_order(3, 1.0, a0_0, avec_0, alpha, grid)
        avec_2 = -(gaussian_moment(g3).v.real + a0_2 * N.nvec) / n0
    return MultiplierField(a0_0, a0_2, avec_0, avec_2, N.eps, alpha, grid)


def maxwellian_moments(mult: MultiplierField, order: int, source: str = "closed_form") -> PauliCoeffs:
    return gaussian_moment(maxwellian(mult, order, source=source))


def solve_leading_spin(n0: np.ndarray, spin: np.ndarray):
    """Invert the cosh/sinh Maxwellian for an O(1) spin moment: tanh|a| = |s| / n0 per node."""
    n0 = np.asarray(n0, dtype=float)
    spin = np.asarray(spin, dtype=float)
    norm = np.sqrt(np.sum(spin**2, axis=0))
    ratio = norm / n0
    if np.any(ratio >= 1):
        raise ConfigurationError("Spin moment must satisfy |s| < n0 for the leading-order Maxwellian")

    def _root(q: float) -> float:
        upper = max(1.0, 2 * np.arctanh(min(q, 1 - 1e-15)) + 1.0)
        return brentq(lambda r: np.tanh(r) - q, 0.0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    radius = np.vectorize(_root)(ratio)
    direction = np.divide(spin, norm, out=np.zeros_like(spin), where=norm > 0)
    avec = radius * direction
    a0 = np.log(n0 / (2 * np.pi * np.cosh(radius)))
    return a0, avec


# Currents


@dataclass
class CurrentMoments:
    """J[i, k] = <p_k M_i>, the charge flux <p M0> and <p_perp . M>."""

    spin: np.ndarray
    charge: np.ndarray
    perp_dot: np.ndarray


def current_density(mult: MultiplierField, order: int, source: str = "closed_form") -> CurrentMoments:
    g = maxwellian(mult, order, source=source)
    first = [gaussian_moment(g, mu) for mu in ((1, 0), (0, 1))]
    spin = np.stack([m.v.real for m in first], axis=1)
    charge = np.stack([m.s.real for m in first])
    # <p2 M1 - p1 M2>
    perp_dot = spin[0, 1] - spin[1, 0]
    return CurrentMoments(spin, charge, perp_dot)


def current_cross(J: np.ndarray, avec: np.ndarray, eps: float) -> np.ndarray:
    """(2/eps) J^T x a as a (3, 2, nx, ny) flux."""
    return np.stack([2 / eps * np.cross(J[:, k], avec, axisa=0, axisb=0, axisc=0) for k in range(2)], axis=1)


def grassmann_flux(currents: CurrentMoments, avec: np.ndarray) -> np.ndarray:
    """<p_perp x (a x M)> = a <p_perp . M> - <M (p_perp . a)>."""
    J = currents.spin
    weighted = avec[0] * J[:, 1] - avec[1] * J[:, 0]
    return avec * currents.perp_dot - weighted


def residual_current(N: SpinField, alpha: float, closure: str = "derived") -> np.ndarray:
    """2 eps (n x a); vanishes exactly when the multiplier matrix commutes with N."""
    mult = multipliers_from_moments(N, alpha, closure)
    return 2 * N.eps * np.cross(N.nvec, mult.avec, axisa=0, axisb=0, axisc=0)


def transport_moment(
    mult: MultiplierField, V: np.ndarray, order: int, pgrid: PGrid = None, source: str = "closed_form"
) -> PauliCoeffs:
    """<T M> by sampling the Maxwellian on the p-grid."""
    pgrid = PGrid() if pgrid is None else pgrid
    sampled = maxwellian(mult, order, source=source).sample(pgrid)
    return quadrature_moment(transport_apply(sampled, V, mult.eps, mult.alpha))


def sample_with_moments(g: GaussianSymbol, target: PauliCoeffs, pgrid: PGrid):
    """Sample g and correct the quadrature moments to ``target`` with a Gaussian-shaped weight."""
    sampled = g.sample(pgrid)
    delta = target.data.real - quadrature_moment(sampled).data.real
    shape = pgrid.gaussian()
    shape = shape / (np.sum(shape) * pgrid.cell_area)
    sampled.values += delta[..., None, None] * shape
    return sampled


