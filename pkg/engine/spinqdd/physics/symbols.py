"""Phase-space symbol calculus used by the semiclassical Maxwellian expansion.

Two symbol classes are closed under every operation the expansion needs:

* ``PolySymbol``: sum_mu c_mu(x) p^mu, Pauli-valued, low degree in p
  (h0 and h1.sigma).
* ``GaussianSymbol``: exp(beta h0(x, p)) * sum_{m, mu} beta^m c_{m,mu}(x) p^mu
  with h0 = -|p|^2/2 + a0(x).

Keeping the power of beta explicit makes d/dbeta and the integral in beta
exact term by term, so Duhamel's formula can be applied symbolically.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from spinqdd.core.config import settings
from spinqdd.core.errors import ConfigurationError, DegreeOverflowError
from spinqdd.physics.fields import Grid2D, PGrid, PhaseSpaceField, sderiv
from spinqdd.physics.pauli import PauliCoeffs, pauli_mul

logger = logging.getLogger(__name__)

Monomial = Tuple[int, int]
GaussKey = Tuple[int, int, int]

E1 = (1, 0)
E2 = (0, 1)


def _shift(mu: Monomial, k: int, step: int) -> Monomial:
    return (mu[0] + step, mu[1]) if k == 0 else (mu[0], mu[1] + step)


def _pmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return pauli_mul(PauliCoeffs(a), PauliCoeffs(b)).data


def _accumulate(terms: dict, key, value: np.ndarray):
    if key in terms:
        terms[key] = terms[key] + value
    else:
        terms[key] = value


def _is_uniform(c: np.ndarray) -> bool:
    return bool(np.all(c == c[:, :1, :1]))


def scalar_coeff(s, shape) -> np.ndarray:
    """sigma0-only coefficient field."""
    out = np.zeros((4,) + tuple(shape), dtype=complex)
    out[0] = s
    return out


def vector_coeff(v, shape) -> np.ndarray:
    """Spin-only coefficient field."""
    out = np.zeros((4,) + tuple(shape), dtype=complex)
    out[1:] = np.broadcast_to(v, (3,) + tuple(shape))
    return out


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2))


def gaussian_integral(nu: Monomial, beta: float) -> float:
    """Integral of p^nu exp(-beta |p|^2 / 2) over the plane."""
    if nu[0] % 2 or nu[1] % 2:
        return 0.0
    return (2 * np.pi / beta) * beta ** (-(nu[0] + nu[1]) / 2) * double_factorial(nu[0] - 1) * double_factorial(nu[1] - 1)


@dataclass
class PolySymbol:
    """Pauli-valued polynomial in p with x-dependent coefficients (4, nx, ny)."""

    terms: Dict[Monomial, np.ndarray]
    grid: Grid2D

    @property
    def degree(self) -> int:
        return max((sum(mu) for mu in self.terms), default=0)

    def dx(self, k: int) -> "PolySymbol":
        # x-independent coefficients drop out, so the p-degree only counts live terms
        out = {mu: sderiv(c, self.grid, k) for mu, c in self.terms.items() if not _is_uniform(c)}
        return PolySymbol(out, self.grid)

    def dp(self, k: int) -> "PolySymbol":
        out: Dict[Monomial, np.ndarray] = {}
        for mu, c in self.terms.items():
            if mu[k]:
                _accumulate(out, _shift(mu, k, -1), mu[k] * c)
        return PolySymbol(out, self.grid)

    def derivative(self, mu_x: Monomial, nu_p: Monomial) -> "PolySymbol":
        out = self
        for k in (0, 1):
            for _ in range(mu_x[k]):
                out = out.dx(k)
            for _ in range(nu_p[k]):
                out = out.dp(k)
        return out

    def __add__(self, other: "PolySymbol") -> "PolySymbol":
        out = dict(self.terms)
        for mu, c in other.terms.items():
            _accumulate(out, mu, c)
        return PolySymbol(out, self.grid)

    def is_zero(self) -> bool:
        return all(not np.any(c) for c in self.terms.values())


def h0_symbol(a0: np.ndarray, grid: Grid2D) -> PolySymbol:
    """h0 sigma0 = (-|p|^2/2 + a0) sigma0."""
    return PolySymbol(
        {
            (0, 0): scalar_coeff(a0, grid.shape),
            (2, 0): scalar_coeff(-0.5, grid.shape),
            (0, 2): scalar_coeff(-0.5, grid.shape),
        },
        grid,
    )


def h1_symbol(avec: np.ndarray, alpha: float, grid: Grid2D) -> PolySymbol:
    """h1.sigma with h1 = a - alpha p_perp and p_perp = (p2, -p1, 0)."""
    return PolySymbol(
        {
            (0, 0): vector_coeff(avec, grid.shape),
            E1: vector_coeff(np.array([0.0, alpha, 0.0])[:, None, None], grid.shape),
            E2: vector_coeff(np.array([-alpha, 0.0, 0.0])[:, None, None], grid.shape),
        },
        grid,
    )


def scalar_poly(f: np.ndarray, grid: Grid2D) -> PolySymbol:
    """A p-independent scalar field such as V(x), as a degree-zero symbol."""
    return PolySymbol({(0, 0): scalar_coeff(f, grid.shape)}, grid)


@dataclass
class GaussianSymbol:
    """exp(beta h0) * sum beta^m c_{m,mu}(x) p^mu."""

    beta: float
    a0: np.ndarray
    grid: Grid2D
    terms: Dict[GaussKey, np.ndarray] = field(default_factory=dict)
    dmax: int = field(default_factory=lambda: settings.DMAX)

    def __post_init__(self):
        self._check_degree(self.degree)

    @classmethod
    def unit(cls, beta: float, a0: np.ndarray, grid: Grid2D) -> "GaussianSymbol":
        """exp(beta h0) sigma0."""
        return cls(beta, a0, grid, {(0, 0, 0): scalar_coeff(1.0, grid.shape)})

    def like(self, terms: Dict[GaussKey, np.ndarray]) -> "GaussianSymbol":
        return GaussianSymbol(self.beta, self.a0, self.grid, terms, self.dmax)

    @property
    def degree(self) -> int:
        return max((k[1] + k[2] for k in self.terms), default=0)

    @property
    def max_beta_power(self) -> int:
        return max((k[0] for k in self.terms), default=0)

    def _check_degree(self, degree: int):
        if degree > self.dmax:
            raise DegreeOverflowError(f"Symbol degree {degree} exceeds dmax={self.dmax}", degree=degree, dmax=self.dmax)

    # Linear structure

    def __add__(self, other: "GaussianSymbol") -> "GaussianSymbol":
        out = dict(self.terms)
        for key, c in other.terms.items():
            _accumulate(out, key, c)
        return self.like(out)

    def __sub__(self, other: "GaussianSymbol") -> "GaussianSymbol":
        return self + other.scale(-1.0)

    def scale(self, factor) -> "GaussianSymbol":
        """Multiply by a number or a scalar x-field."""
        return self.like({key: factor * c for key, c in self.terms.items()})

    def shift_beta(self, step: int, factor: float = 1.0) -> "GaussianSymbol":
        """Multiply by factor * beta^step."""
        return self.like({(m + step, mu1, mu2): factor * c for (m, mu1, mu2), c in self.terms.items()})

    # Calculus

    def mul_poly(self, f: PolySymbol, side: str = "left") -> "GaussianSymbol":
        """Pauli product f*g (side='left') or g*f (side='right')."""
        self._check_degree(self.degree + f.degree)
        out: Dict[GaussKey, np.ndarray] = {}
        for (m, mu1, mu2), c in self.terms.items():
            for nu, fc in f.terms.items():
                prod = _pmul(fc, c) if side == "left" else _pmul(c, fc)
                _accumulate(out, (m, mu1 + nu[0], mu2 + nu[1]), prod)
        return self.like(out)

    def dp(self, k: int) -> "GaussianSymbol":
        self._check_degree(self.degree + 1)
        out: Dict[GaussKey, np.ndarray] = {}
        for (m, mu1, mu2), c in self.terms.items():
            mu = (mu1, mu2)
            up = _shift(mu, k, 1)
            _accumulate(out, (m + 1,) + up, -c)
            if mu[k]:
                _accumulate(out, (m,) + _shift(mu, k, -1), mu[k] * c)
        return self.like(out)

    def dx(self, k: int) -> "GaussianSymbol":
        da0 = sderiv(self.a0, self.grid, k)
        out: Dict[GaussKey, np.ndarray] = {}
        for (m, mu1, mu2), c in self.terms.items():
            _accumulate(out, (m + 1, mu1, mu2), da0 * c)
            _accumulate(out, (m, mu1, mu2), sderiv(c, self.grid, k))
        return self.like(out)

    def derivative(self, mu_p: Monomial, nu_x: Monomial) -> "GaussianSymbol":
        out = self
        for k in (0, 1):
            for _ in range(mu_p[k]):
                out = out.dp(k)
            for _ in range(nu_x[k]):
                out = out.dx(k)
        return out

    def dbeta(self) -> "GaussianSymbol":
        """d/dbeta: h0 times the symbol plus the derivative of the beta powers."""
        out = self.mul_poly(h0_symbol(self.a0, self.grid)).terms
        for (m, mu1, mu2), c in self.terms.items():
            if m:
                _accumulate(out, (m - 1, mu1, mu2), m * c)
        return self.like(out)

    def beta_primitive(self) -> "GaussianSymbol":
        """exp(beta h0) * integral_0^beta of the polynomial part."""
        return self.like({(m + 1, mu1, mu2): c / (m + 1) for (m, mu1, mu2), c in self.terms.items()})

    # Evaluation

    def coefficients(self, beta: float = None) -> Dict[Monomial, np.ndarray]:
        """Collapse beta powers at the given beta: {mu: sum_m beta^m c}."""
        beta = self.beta if beta is None else beta
        out: Dict[Monomial, np.ndarray] = {}
        for (m, mu1, mu2), c in self.terms.items():
            _accumulate(out, (mu1, mu2), beta**m * c)
        return out

    def sup_norm(self, beta: float = None) -> float:
        coeffs = self.coefficients(beta)
        return max((float(np.max(np.abs(c))) for c in coeffs.values()), default=0.0)

    def sample(self, pgrid: PGrid) -> PhaseSpaceField:
        """Real part of the symbol on x-grid x p-grid."""
        values = np.zeros((4,) + self.grid.shape + (pgrid.n, pgrid.n))
        imag = 0.0
        for mu, c in self.coefficients().items():
            values += c.real[..., None, None] * pgrid.monomial(mu)
            imag = max(imag, float(np.max(np.abs(c.imag))))
        if imag > settings.TOLERANCES.moments:
            logger.warning(f"Discarding imaginary part {imag:.2e} while sampling a symbol")
        values *= np.exp(self.beta * self.a0)[None, :, :, None, None]
        values *= pgrid.gaussian(self.beta)
        return PhaseSpaceField(values, self.grid, pgrid)


def gaussian_moment(g: GaussianSymbol, mu: Monomial = (0, 0)) -> PauliCoeffs:
    """Exact p-integral of p^mu g, a Pauli-valued x-field."""
    if g.beta <= 0:
        raise ConfigurationError(f"Gaussian moments need beta > 0, got {g.beta}", beta=g.beta)
    if sum(mu) > 2:
        raise ConfigurationError(f"Moment weights are limited to degree 2, got {mu}", mu=mu)
    total = np.zeros((4,) + g.grid.shape, dtype=complex)
    for nu, c in g.coefficients().items():
        weight = gaussian_integral((nu[0] + mu[0], nu[1] + mu[1]), g.beta)
        if weight:
            total += weight * c
    return PauliCoeffs(total * np.exp(g.beta * g.a0))
