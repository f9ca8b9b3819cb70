"""Semiclassical Moyal orders, the potential operator theta and the spinorial transport operator."""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np
import scipy.fft

from spinqdd.core.errors import ConfigurationError
from spinqdd.physics.fields import (
    PHASE_SPATIAL_AXES,
    Grid2D,
    PGrid,
    PhaseSpaceField,
    quadrature_moment,
    sderiv,
    sgrad,
)
from spinqdd.physics.symbols import GaussianSymbol, Monomial, PolySymbol, scalar_poly

logger = logging.getLogger(__name__)

MAX_MOYAL_ORDER = 4


def _multi_indices(order: int) -> Iterator[Monomial]:
    for a in range(order + 1):
        yield (a, order - a)


def _factorial(mu: Monomial) -> int:
    return math.factorial(mu[0]) * math.factorial(mu[1])


def moyal_j(f: PolySymbol, g: GaussianSymbol, j: int, side: str = "left") -> GaussianSymbol:
    """j-th semiclassical order of f # g (side='left') or g # f (side='right').

    f # g = sum_j eps^j (f #_j g) with
    (f #_j g) = (2i)^-j sum_{|mu|+|nu|=j} (-1)^|mu| / (mu! nu!) dx^mu dp^nu f . dp^mu dx^nu g.
    Swapping the factors only flips the sign of odd orders and the order of the Pauli product.
    """
    if not 0 <= j <= MAX_MOYAL_ORDER:
        raise ConfigurationError(f"Moyal order must lie in 0..{MAX_MOYAL_ORDER}, got {j}", j=j)
    result = g.like({})
    for a in range(j + 1):
        if j - a > f.degree:
            continue
        for mu in _multi_indices(a):
            for nu in _multi_indices(j - a):
                df = f.derivative(mu, nu)
                if not df.terms or df.is_zero():
                    continue
                dg = g.derivative(mu, nu)
                weight = (-1) ** a / (_factorial(mu) * _factorial(nu))
                result = result + dg.mul_poly(df, side).scale(weight)
    sign = (-1) ** j if side == "right" else 1
    return result.scale(sign * (2j) ** (-j))


def moyal_odd(f: PolySymbol, g: GaussianSymbol, eps: float, side: str = "left") -> GaussianSymbol:
    """f #_odd g = (f # g - g # f) / 2 for sigma0-valued f, truncated after the fourth order."""
    return _parity_part(f, g, eps, side, odd=True)


def moyal_even(f: PolySymbol, g: GaussianSymbol, eps: float, side: str = "left") -> GaussianSymbol:
    """f #_even g = (f # g + g # f) / 2, truncated after the fourth order."""
    return _parity_part(f, g, eps, side, odd=False)


def _parity_part(f, g, eps, side, odd) -> GaussianSymbol:
    # For Pauli-scalar f the odd orders are antisymmetric under swapping, the even ones symmetric
    out = g.like({})
    for j in range(1 if odd else 0, MAX_MOYAL_ORDER + 1, 2):
        out = out + moyal_j(f, g, j, side).scale(eps**j)
    return out


# Potential operator


@dataclass
class ThetaOperator:
    """theta_eps[V] in the momentum-Fourier representation.

    theta f = IFFT_p( i d(x, eta) FFT_p f ) with d = (V(x + eps eta/2) - V(x - eps eta/2)) / eps,
    which tends to grad V . grad_p f as eps -> 0.
    """

    V: np.ndarray
    eps: float
    grid: Grid2D
    pgrid: PGrid
    multiplier: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.eps < 0:
            raise ConfigurationError(f"eps must be non-negative, got {self.eps}", eps=self.eps)
        self.multiplier = self._build_multiplier()

    @property
    def is_trivial(self) -> bool:
        return not np.any(self.multiplier)

    def _build_multiplier(self) -> np.ndarray:
        eta = self.pgrid.eta
        n = self.pgrid.n
        if self.eps == 0.0:
            dV = sgrad(self.V, self.grid)
            d = dV[0][:, :, None, None] * eta[:, None] + dV[1][:, :, None, None] * eta[None, :]
        else:
            reach = self.eps * np.max(np.abs(eta)) / 2
            if reach > min(self.grid.lx, self.grid.ly) / 2:
                logger.warning(f"theta shift {reach:.3g} exceeds half the domain; refine the p-grid or lower pmax")
            Vh = scipy.fft.fft2(self.V)
            k1 = self.grid.kx[None]
            k2 = self.grid.ky[None]
            d = np.empty(self.grid.shape + (n, n))
            s2 = (self.eps * eta / 2)[:, None, None]
            for row, e1 in enumerate(eta):
                phase = k1 * (self.eps * e1 / 2) + k2 * s2
                diff = scipy.fft.ifft2(Vh[None] * 2j * np.sin(phase), axes=(-2, -1)).real
                d[:, :, row, :] = np.moveaxis(diff, 0, -1) / self.eps
        # Nyquist momentum modes carry no sign information
        d[..., n // 2, :] = 0.0
        d[..., :, n // 2] = 0.0
        return d

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Apply to samples with trailing axes (nx, ny, np, np)."""
        if self.is_trivial:
            return np.zeros_like(values)
        fh = scipy.fft.fft2(values, axes=(-2, -1))
        return scipy.fft.ifft2(1j * self.multiplier * fh, axes=(-2, -1)).real


def theta_apply(V: np.ndarray, f: PhaseSpaceField, eps: float) -> PhaseSpaceField:
    theta = ThetaOperator(V, eps, f.grid, f.pgrid)
    return PhaseSpaceField(theta.apply(f.values), f.grid, f.pgrid)


def theta_moments_check(V: np.ndarray, f: PhaseSpaceField, eps: float) -> Tuple[np.ndarray, np.ndarray]:
    """Returns <theta f> and <p theta f> + grad V <f>, both of which vanish."""
    tf = theta_apply(V, f, eps)
    zeroth = quadrature_moment(tf).data
    dV = sgrad(V, f.grid)
    base = quadrature_moment(f).data
    first = np.stack([quadrature_moment(tf, (1, 0)).data, quadrature_moment(tf, (0, 1)).data], axis=0)
    first = first + dV[:, None] * base[None]
    return zeroth.real, first.real


def theta_symbol_identity(V: np.ndarray, f: GaussianSymbol, eps: float) -> GaussianSymbol:
    """2 V #_odd f, equal to i eps theta_eps[V] f up to the truncated orders."""
    return moyal_odd(scalar_poly(V, f.grid), f, eps).scale(2.0)


# Transport operator


def p_perp(pgrid: PGrid) -> np.ndarray:
    return np.stack([pgrid.p2, -pgrid.p1, np.zeros_like(pgrid.p1)])


def transport_apply(
    w: PhaseSpaceField, V: np.ndarray, eps: float, alpha: float, theta: Optional[ThetaOperator] = None
) -> PhaseSpaceField:
    """T W for the spinorial Wigner equation, all x-derivatives spectral."""
    grid, pgrid = w.grid, w.pgrid
    if theta is None:
        theta = ThetaOperator(V, eps, grid, pgrid)
    vals = w.values
    d1 = sderiv(vals, grid, 0, axes=PHASE_SPATIAL_AXES)
    d2 = sderiv(vals, grid, 1, axes=PHASE_SPATIAL_AXES)
    out = pgrid.p1 * d1 + pgrid.p2 * d2 - theta.apply(vals)

    # alpha eps grad_perp couplings between charge and spin channels
    out[0] += alpha * eps * (d2[1] - d1[2])
    out[1] += alpha * eps * d2[0]
    out[2] -= alpha * eps * d1[0]

    # Rashba precession -2 alpha p_perp x w
    pp = p_perp(pgrid)[:, None, None]
    out[1:] -= 2 * alpha * np.cross(pp, vals[1:], axisa=0, axisb=0, axisc=0)
    return PhaseSpaceField(out, grid, pgrid)


def transport_charge_divergence(w: PhaseSpaceField, eps: float, alpha: float) -> np.ndarray:
    """sigma0 part of <T W> from moments: div <p w0> + alpha eps grad_perp . <w>."""
    grid = w.grid
    flux = np.stack([quadrature_moment(w, (1, 0)).s, quadrature_moment(w, (0, 1)).s]).real
    spin = quadrature_moment(w).v.real
    out = sderiv(flux[0], grid, 0) + sderiv(flux[1], grid, 1)
    return out + alpha * eps * (sderiv(spin[0], grid, 1) - sderiv(spin[1], grid, 0))


