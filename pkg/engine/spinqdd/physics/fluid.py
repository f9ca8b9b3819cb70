"""Local quantum spin drift-diffusion model, its reductions and the IMEX integrator.

State vectors are stacked arrays ``u`` of shape (components, nx, ny); for the
spin models u = (n0, n1, n2, n3).
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
import scipy.fft

from spinqdd.core.errors import ConfigurationError, NonPhysicalStateError, PositivityLossError
from spinqdd.physics.fields import (
    Grid2D,
    SpinField,
    dealias,
    floor_density,
    sdiv,
    sgrad,
    sgrad_perp,
    shessian,
    slaplacian,
)
from spinqdd.physics.maxwellian import (
    current_cross,
    current_density,
    grassmann_flux,
    multipliers_from_moments,
    spin_diffusion_field,
)

logger = logging.getLogger(__name__)

PRECESSION_FORMS = ("homogeneous", "ratio")
SCHEMES = ("imex", "rk3")


@dataclass
class FluidParams:
    eps: float
    alpha: float
    tau: float
    V: np.ndarray
    drop_eps3: bool = False
    precession_form: str = "homogeneous"

    def __post_init__(self):
        if self.precession_form not in PRECESSION_FORMS:
            raise ConfigurationError(f"Unknown precession form '{self.precession_form}'", form=self.precession_form)
        if self.tau < 0:
            raise ConfigurationError("Relaxation time must be non-negative", tau=self.tau)


@dataclass
class FluidState:
    N: SpinField
    t: float
    params: FluidParams
    model: str = "local"


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.cross(a, b, axisa=0, axisb=0, axisc=0)


def _perp_perp(n: np.ndarray) -> np.ndarray:
    return np.stack([-n[0], -n[1], np.zeros_like(n[0])])


def _curl_perp(n: np.ndarray, grid: Grid2D) -> np.ndarray:
    """grad_perp x n."""
    grad = sgrad(n, grid)
    return np.stack([-grad[2, 0], -grad[2, 1], grad[0, 0] + grad[1, 1]])


def _div_perp(v: np.ndarray, grid: Grid2D) -> np.ndarray:
    """grad_perp . v = d2 v1 - d1 v2."""
    return sgrad(v[0], grid)[1] - sgrad(v[1], grid)[0]


def bohm(n0: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Bohm potential Delta sqrt(n0) / sqrt(n0)."""
    if np.any(n0 <= 0):
        raise NonPhysicalStateError("Bohm potential needs a positive density", min_n0=float(np.min(n0)))
    root = np.sqrt(floor_density(n0))
    return slaplacian(root, grid) / root


@dataclass
class CoefficientFields:
    """A (2,), B (3,), C (2, 2) and D (3, 2) fields of the local spin equation."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def flux(self, n0: np.ndarray, nvec: np.ndarray, grid: Grid2D) -> np.ndarray:
        """n (x) A - grad Delta n + grad n C + B (x) grad n0 + D, shape (3, 2, nx, ny)."""
        grad_n = sgrad(nvec, grid)
        return (
            nvec[:, None] * self.A[None]
            - sgrad(slaplacian(nvec, grid), grid)
            + np.einsum("ilxy,lkxy->ikxy", grad_n, self.C)
            + self.B[:, None] * sgrad(n0, grid)[None]
            + self.D
        )


def coefficient_fields(n0: np.ndarray, nvec: np.ndarray, grid: Grid2D) -> CoefficientFields:
    n0f = floor_density(n0)
    g0 = sgrad(n0, grid) / n0f
    h0 = shessian(n0, grid) / n0f
    lap0 = slaplacian(n0, grid) / n0f
    grad_n = sgrad(nvec, grid)
    hess_n = shessian(nvec, grid)
    g0_sq = np.sum(g0**2, axis=0)

    A = (
        2 * g0_sq * g0
        - 4 * np.einsum("ixy,ikxy->kxy", nvec, grad_n) / n0f**2
        - g0 * lap0
        - np.einsum("lxy,lkxy->kxy", g0, h0)
    )
    B = spin_diffusion_field(n0f, nvec, grid)
    C = (lap0 - g0_sq + 4 * np.sum((nvec / n0f) ** 2, axis=0)) * np.eye(2)[:, :, None, None] + h0
    D = np.einsum("lxy,ilkxy->ikxy", g0, hess_n) - np.einsum("ilxy,lxy->ixy", grad_n, g0)[:, None] * g0[None]
    return CoefficientFields(A, B, C, D)


def rhs_local(state: FluidState) -> Tuple[np.ndarray, np.ndarray]:
    """Time derivative of (n0, n) in the local quantum spin model."""
    N, params = state.N, state.params
    grid = N.grid
    eps, alpha, tau = params.eps, params.alpha, params.tau
    n0, n = N.n0, N.nvec
    grad_V = sgrad(params.V, grid)

    flux0 = sgrad(n0, grid) + dealias(n0 * grad_V, grid)
    if eps:
        flux0 = flux0 - eps**2 / 6 * dealias(n0 * sgrad(bohm(n0, grid), grid), grid)
    dn0 = tau * sdiv(flux0, grid)

    dn = tau * sdiv(sgrad(n, grid) + dealias(n[:, None] * grad_V[None], grid), grid)
    dn -= 2 * alpha * tau * (2 * _curl_perp(n, grid) + dealias(_cross(sgrad_perp(params.V, grid), n), grid))
    dn -= 4 * alpha**2 * tau * (2 * n + _perp_perp(n))

    if eps:
        n0f = floor_density(n0)
        coeff = coefficient_fields(n0, n, grid)
        spin = n if params.precession_form == "homogeneous" else n / n0f
        dn += eps**2 / 6 * dealias(_cross(spin, coeff.B), grid)
        dn += eps**2 * tau / 12 * sdiv(dealias(coeff.flux(n0, n, grid), grid), grid)
        if not params.drop_eps3:
            dn += eps**3 * tau / 3 * dealias(_cross(n, _cross(n / n0f, coeff.B) - coeff.B), grid)
    return dn0, dn


def rhs_spin_vector(state: FluidState) -> Tuple[np.ndarray, np.ndarray]:
    """Spin-vector drift-diffusion model, the eps = 0 limit of the local model."""
    N, params = state.N, state.params
    grid = N.grid
    alpha, tau = params.alpha, params.tau
    n0, n = N.n0, N.nvec
    grad_V = sgrad(params.V, grid)

    dn0 = tau * sdiv(sgrad(n0, grid) + dealias(n0 * grad_V, grid), grid)

    # grad_perp x n = -div [[n3, 0], [0, n3], [-n1, -n2]]
    zero = np.zeros_like(n0)
    spin_current = np.stack([np.stack([n[2], zero]), np.stack([zero, n[2]]), np.stack([-n[0], -n[1]])])
    curl = -sdiv(spin_current, grid)

    dn = tau * sdiv(sgrad(n, grid) + dealias(n[:, None] * grad_V[None], grid), grid)
    dn -= 2 * alpha * tau * (2 * curl + dealias(_cross(sgrad_perp(params.V, grid), n), grid))
    dn -= 4 * alpha**2 * tau * (2 * n + _perp_perp(n))
    return dn0, dn


def rhs_two_component(
    n_plus: np.ndarray, n_minus: np.ndarray, params: FluidParams, grid: Grid2D
) -> Tuple[np.ndarray, np.ndarray]:
    """Spin-up/spin-down densities n+- = n0 +- eps n3."""
    if np.any(n_plus <= 0) or np.any(n_minus <= 0):
        raise NonPhysicalStateError("Two-component densities must stay positive")
    grad_V = sgrad(params.V, grid)
    eps, tau = params.eps, params.tau

    def _drift(n):
        flux = sgrad(n, grid) + dealias(n * grad_V, grid)
        if eps:
            flux = flux - eps**2 / 6 * dealias(n * sgrad(bohm(n, grid), grid), grid)
        return tau * sdiv(flux, grid)

    relax = 4 * params.alpha**2 * tau * (n_plus - n_minus)
    return _drift(n_plus) - relax, _drift(n_minus) + relax


@dataclass
class EntropicRHS:
    dn0: np.ndarray
    a0: np.ndarray
    energy: float
    potential_energy: float
    dissipation: float


def entropic_energy(n0: np.ndarray, params: FluidParams, grid: Grid2D) -> float:
    """Free energy whose variational derivative is a0 + V under the semiclassical closure."""
    root = np.sqrt(floor_density(n0))
    density = (
        n0 * (np.log(floor_density(n0) / (2 * np.pi)) - 1)
        + params.eps**2 / 6 * np.sum(sgrad(root, grid) ** 2, axis=0)
        - params.eps**2 * params.alpha**2 * n0
        + n0 * params.V
    )
    return float(grid.integrate(density))


def rhs_entropic_spinless(n0: np.ndarray, params: FluidParams, grid: Grid2D) -> EntropicRHS:
    """dn0/dt = tau div(n0 grad(a0 + V)) with the spinless semiclassical a0."""
    N = SpinField(n0, np.zeros((3,) + grid.shape), params.eps, grid)
    mult = multipliers_from_moments(N, params.alpha)
    a0 = mult.a0
    grad = sgrad(a0 + params.V, grid)
    dn0 = params.tau * sdiv(dealias(n0 * grad, grid), grid)
    return EntropicRHS(
        dn0=dn0,
        a0=a0,
        energy=entropic_energy(n0, params, grid),
        potential_energy=-float(grid.integrate(n0 * (a0 + params.V))),
        dissipation=-params.tau * float(grid.integrate(n0 * np.sum(grad**2, axis=0))),
    )


def rhs_nonlocal_probe(state: FluidState, closure: str = "derived", order: int = 3) -> Tuple[np.ndarray, np.ndarray]:
    """Nonlocal model evaluated with the semiclassical multipliers; no time stepping."""
    N, params = state.N, state.params
    grid = N.grid
    eps, alpha, tau = params.eps, params.alpha, params.tau
    if eps <= 0:
        raise ConfigurationError("The nonlocal right-hand side needs eps > 0", eps=eps)
    n0, n = N.n0, N.nvec
    mult = multipliers_from_moments(N, alpha, closure)
    a0, a = mult.a0, mult.avec
    grad_a0 = sgrad(a0, grid)
    grad_a = sgrad(a, grid)
    grad_V = sgrad(params.V, grid)
    n_x_a = _cross(n, a)

    flux0 = n0 * grad_a0 + n0 * grad_V + eps**2 * np.einsum("ixy,ikxy->kxy", n, grad_a)
    dn0 = tau * sdiv(dealias(flux0, grid), grid) + 2 * alpha * eps**2 * tau * _div_perp(n_x_a, grid)

    currents = current_density(mult, order)
    flux = n0 * grad_a + n[:, None] * grad_a0[None] + n[:, None] * grad_V[None] + current_cross(currents.spin, a, eps)
    # Lowest order in tau of the multiplier evolution
    dt0_a = -2 * n_x_a / floor_density(n0)
    dn = -2 * n_x_a + tau * sdiv(dealias(flux, grid), grid)
    dn -= (
        2
        * alpha
        * tau
        * (
            n0 * _curl_perp(a, grid)
            + _cross(sgrad_perp(a0 + params.V, grid), n)
            - 2 / eps * grassmann_flux(currents, a)
        )
    )
    dn -= 4 * eps * tau * (_cross(n_x_a, a) + _cross(n, dt0_a))
    return dn0, dn


def diffusion_eigenvalues(N: SpinField) -> np.ndarray:
    """Eigenvalues of the 4x4 cross-diffusion matrix [[1 - eps^2|u|^2, eps^2 u^T], [-u, I]], u = n/n0."""
    u = np.moveaxis(N.nvec / N.n0_floor, 0, -1)
    eps2 = N.eps**2
    mat = np.zeros(N.grid.shape + (4, 4))
    mat[..., 0, 0] = 1 - eps2 * np.sum(u**2, axis=-1)
    mat[..., 0, 1:] = eps2 * u
    mat[..., 1:, 0] = -u
    mat[..., 1:, 1:] = np.eye(3)
    return np.linalg.eigvals(mat)


# Time integration


class FluidModel:
    """Right-hand side on stacked state vectors plus the stiff linear symbol treated implicitly."""

    name = "base"
    biharmonic = True

    def __init__(self, params: FluidParams, grid: Grid2D):
        self.params = params
        self.grid = grid

    def linear_symbol(self) -> np.ndarray:
        k2 = self.grid.k2
        symbol = -self.params.tau * k2
        if self.biharmonic:
            symbol = symbol - self.params.eps**2 * self.params.tau / 12 * k2**2
        return symbol

    def pack(self, N: SpinField) -> np.ndarray:
        return N.stacked()

    def unpack(self, u: np.ndarray) -> SpinField:
        return SpinField.from_stacked(u, self.params.eps, self.grid)

    def rhs(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def validate(self, u: np.ndarray):
        if not np.all(np.isfinite(u)):
            raise PositivityLossError("Non-finite values in the fluid state")
        if not self.unpack(u).is_physical():
            raise PositivityLossError("Fluid state left the physical cone eps|n| < n0")

    def stable_dt(self, u: np.ndarray) -> float:
        """Heuristic bound for the explicit part of the IMEX scheme."""
        kmax = float(np.sqrt(np.max(self.grid.k2)))
        grad_V = float(np.max(np.abs(sgrad(self.params.V, self.grid)))) if np.any(self.params.V) else 0.0
        p = self.params
        rate = p.tau * (kmax * grad_V + 4 * abs(p.alpha) * kmax + 8 * p.alpha**2)
        rate += p.eps**2 * (1 + p.tau * kmax**2) * self.unpack(u).polarization()
        return np.inf if rate == 0 else 1.5 / rate


class LocalModel(FluidModel):
    name = "local"

    def rhs(self, u):
        dn0, dn = rhs_local(FluidState(self.unpack(u), 0.0, self.params))
        return np.concatenate([dn0[None], dn])


class SpinVectorModel(FluidModel):
    name = "spin_vector"
    biharmonic = False

    def rhs(self, u):
        dn0, dn = rhs_spin_vector(FluidState(self.unpack(u), 0.0, self.params))
        return np.concatenate([dn0[None], dn])


class TwoComponentModel(FluidModel):
    """Evolves (n+, n-); only n3 survives the reduction."""

    name = "two_component"

    def pack(self, N):
        if np.any(N.nvec[:2]):
            logger.warning("Two-component reduction drops the in-plane spin components n1, n2")
        return np.stack([N.n0 + N.eps * N.nvec[2], N.n0 - N.eps * N.nvec[2]])

    def unpack(self, u):
        n0 = 0.5 * (u[0] + u[1])
        n3 = 0.5 * (u[0] - u[1]) / self.params.eps if self.params.eps else np.zeros_like(n0)
        zero = np.zeros_like(n0)
        return SpinField(n0, np.stack([zero, zero, n3]), self.params.eps, self.grid)

    def rhs(self, u):
        return np.stack(rhs_two_component(u[0], u[1], self.params, self.grid))

    def validate(self, u):
        if not np.all(np.isfinite(u)) or np.any(u <= 0):
            raise PositivityLossError("Two-component densities lost positivity")


class EntropicModel(FluidModel):
    name = "entropic"

    def pack(self, N):
        return N.n0[None].copy()

    def unpack(self, u):
        return SpinField(u[0], np.zeros((3,) + self.grid.shape), self.params.eps, self.grid)

    def rhs(self, u):
        return rhs_entropic_spinless(u[0], self.params, self.grid).dn0[None]


MODELS = {cls.name: cls for cls in (LocalModel, SpinVectorModel, TwoComponentModel, EntropicModel)}


def build_model(name: str, params: FluidParams, grid: Grid2D) -> FluidModel:
    if name not in MODELS:
        raise ConfigurationError(f"Unknown fluid model '{name}', expected one of {sorted(MODELS)}", model=name)
    return MODELS[name](params, grid)


def _fft(u):
    return scipy.fft.fft2(u, axes=(-2, -1))


def _ifft(uh):
    return scipy.fft.ifft2(uh, axes=(-2, -1)).real


def imex_step(model: FluidModel, u: np.ndarray, dt: float) -> np.ndarray:
    """Three-stage semi-implicit Runge-Kutta: trapezoidal rule on the linear symbol, explicit remainder."""
    lin = model.linear_symbol()
    save_hat = _fft(u)
    v = u
    for stage in range(3):
        h = dt / (3 - stage)
        explicit = model.rhs(v) - _ifft(lin * _fft(v))
        v_hat = (_fft(u + h * explicit) + 0.5 * lin * h * save_hat) / (1 - 0.5 * lin * h)
        v = _ifft(v_hat)
    return v


def rk3_step(model: FluidModel, u: np.ndarray, dt: float) -> np.ndarray:
    """Strong-stability-preserving third-order Runge-Kutta, fully explicit."""
    u1 = u + dt * model.rhs(u)
    u2 = 0.75 * u + 0.25 * (u1 + dt * model.rhs(u1))
    return u / 3 + 2 / 3 * (u2 + dt * model.rhs(u2))


STEPPERS = {"imex": imex_step, "rk3": rk3_step}


@dataclass
class FluidIntegrator:
    """Advances one model with a fixed step and guards positivity."""

    model: FluidModel
    dt: float
    scheme: str = "imex"
    _warned: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.scheme not in STEPPERS:
            raise ConfigurationError(f"Unknown scheme '{self.scheme}', expected one of {SCHEMES}", scheme=self.scheme)

    def advance(self, u: np.ndarray, t: float) -> np.ndarray:
        if not self._warned and self.scheme == "imex" and self.dt > self.model.stable_dt(u):
            logger.warning(f"dt={self.dt:g} exceeds the estimated stability bound {self.model.stable_dt(u):.3g}")
            self._warned = True
        new = STEPPERS[self.scheme](self.model, u, self.dt)
        try:
            self.model.validate(new)
        except PositivityLossError as exc:
            exc.snapshot = u.copy()
            exc.context.update(t=t, model=self.model.name)
            raise
        return new


def step(state: FluidState, dt: float, scheme: str = "imex", model: Optional[FluidModel] = None) -> FluidState:
    """Advance a FluidState by one step."""
    model = model or build_model(state.model, state.params, state.N.grid)
    u = model.pack(state.N)
    new = FluidIntegrator(model, dt, scheme).advance(u, state.t)
    return replace(state, N=model.unpack(new), t=state.t + dt)
