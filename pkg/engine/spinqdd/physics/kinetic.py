"""Spinorial Wigner-BGK reference solver in hydrodynamic scaling.

dW/dt = -T W + (M(N) - W) / tau on a periodic x-grid times a truncated p-box,
advanced with Strang splitting. Used to check the fluid closure.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.fft

from spinqdd.core.config import settings
from spinqdd.core.errors import BoundaryLeakError, ConfigurationError, PositivityLossError
from spinqdd.physics.fields import PHASE_SPATIAL_AXES, Grid2D, PGrid, PhaseSpaceField, SpinField, quadrature_moment, sderiv
from spinqdd.physics.fluid import FluidIntegrator, FluidParams, build_model
from spinqdd.physics.maxwellian import MultiplierField, maxwellian, multipliers_from_moments, sample_with_moments
from spinqdd.physics.moyal import ThetaOperator, p_perp
from spinqdd.physics.pauli import PauliCoeffs

logger = logging.getLogger(__name__)

FFT_AXES = (1, 2)


@dataclass
class KineticState:
    W: PhaseSpaceField
    t: float
    params: FluidParams


def moments(W: PhaseSpaceField, eps: float) -> SpinField:
    """N = <W> as (n0, n) with <w> = eps n."""
    m = quadrature_moment(W).data.real
    nvec = m[1:] / eps if eps else np.zeros_like(m[1:])
    return SpinField(m[0], nvec, eps, W.grid)


def _target_moments(N: SpinField) -> PauliCoeffs:
    return PauliCoeffs.from_parts(N.n0, N.eps * N.nvec)


def equilibrium(N: SpinField, alpha: float, pgrid: PGrid, order: int = 1, closure: str = "derived") -> PhaseSpaceField:
    """M(N) sampled on the p-grid with quadrature moments matching N exactly."""
    if order <= 1:
        n0 = N.n0_floor
        mult = MultiplierField.leading(np.log(n0 / (2 * np.pi)), N.nvec / n0, N.eps, alpha, N.grid)
    else:
        mult = multipliers_from_moments(N, alpha, closure)
    return sample_with_moments(maxwellian(mult, order), _target_moments(N), pgrid)


@dataclass
class KineticSolver:
    """Holds the grids and cached operators for one parameter set."""

    params: FluidParams
    grid: Grid2D
    pgrid: PGrid
    closure_order: int = 1
    closure: str = "derived"
    _phases: Dict[float, np.ndarray] = field(default_factory=dict, repr=False)
    _theta: Optional[ThetaOperator] = field(default=None, repr=False)

    def __post_init__(self):
        if self.closure_order not in (1, 2, 3):
            raise ConfigurationError("Kinetic closure order must be 1, 2 or 3", order=self.closure_order)
        pp = p_perp(self.pgrid)
        omega = 2 * self.params.alpha * pp
        self._omega_norm = np.sqrt(np.sum(omega**2, axis=0))
        self._axis = np.divide(omega, self._omega_norm, out=np.zeros_like(omega), where=self._omega_norm > 0)

    @property
    def theta(self) -> ThetaOperator:
        if self._theta is None:
            self._theta = ThetaOperator(self.params.V, self.params.eps, self.grid, self.pgrid)
        return self._theta

    def initial_state(self, N: SpinField) -> KineticState:
        N.require_physical()
        W = equilibrium(N, self.params.alpha, self.pgrid, self.closure_order, self.closure)
        return KineticState(W, 0.0, self.params)

    # Substeps

    def _phase(self, dt: float) -> np.ndarray:
        if dt not in self._phases:
            kx = self.grid.kx[:, :, None, None]
            ky = self.grid.ky[:, :, None, None]
            self._phases[dt] = np.exp(-1j * (kx * self.pgrid.p1 + ky * self.pgrid.p2) * dt)
        return self._phases[dt]

    def transport(self, values: np.ndarray, dt: float) -> np.ndarray:
        """Exact free streaming w(x - p dt, p)."""
        vh = scipy.fft.fft2(values, axes=FFT_AXES)
        return scipy.fft.ifft2(vh * self._phase(dt), axes=FFT_AXES).real

    def potential(self, values: np.ndarray, dt: float) -> np.ndarray:
        if self.theta.is_trivial:
            return values
        half = values + 0.5 * dt * self.theta.apply(values)
        return values + dt * self.theta.apply(half)

    def rotate(self, values: np.ndarray, dt: float) -> np.ndarray:
        """Rotate w about p_perp by 2 alpha |p_perp| dt."""
        if not self.params.alpha:
            return values
        out = values.copy()
        w = values[1:]
        k = self._axis[:, None, None]
        angle = self._omega_norm * dt
        cos, sin = np.cos(angle), np.sin(angle)
        k_cross_w = np.cross(k, w, axisa=0, axisb=0, axisc=0)
        k_dot_w = np.sum(k * w, axis=0)
        out[1:] = w * cos + k_cross_w * sin + k * k_dot_w * (1 - cos)
        return out

    def _coupling_rate(self, values: np.ndarray) -> np.ndarray:
        scale = self.params.alpha * self.params.eps
        d1 = sderiv(values[:3], self.grid, 0, axes=PHASE_SPATIAL_AXES)
        d2 = sderiv(values[:3], self.grid, 1, axes=PHASE_SPATIAL_AXES)
        rate = np.zeros_like(values)
        rate[0] = -scale * (d2[1] - d1[2])
        rate[1] = -scale * d2[0]
        rate[2] = scale * d1[0]
        return rate

    def couple(self, values: np.ndarray, dt: float) -> np.ndarray:
        """alpha eps grad_perp couplings between w0 and w, explicit midpoint."""
        if not (self.params.alpha and self.params.eps):
            return values
        half = values + 0.5 * dt * self._coupling_rate(values)
        return values + dt * self._coupling_rate(half)

    def precess(self, values: np.ndarray, dt: float) -> np.ndarray:
        values = self.couple(values, 0.5 * dt)
        values = self.rotate(values, dt)
        return self.couple(values, 0.5 * dt)

    def relax(self, W: PhaseSpaceField, dt: float) -> PhaseSpaceField:
        """W <- M(N) + exp(-dt/tau) (W - M(N)) with N = <W> frozen."""
        tau = self.params.tau
        if math.isinf(tau):
            return W
        N = moments(W, self.params.eps)
        if not N.is_physical():
            raise PositivityLossError("Kinetic moments left the physical cone", snapshot=W.values.copy())
        M = equilibrium(N, self.params.alpha, self.pgrid, self.closure_order, self.closure)
        decay = math.exp(-dt / tau) if tau > 0 else 0.0
        return PhaseSpaceField(M.values + decay * (W.values - M.values), self.grid, self.pgrid)

    # Full step

    def step(self, state: KineticState, dt: float) -> KineticState:
        if dt > self.params.tau / 2:
            logger.warning(f"Kinetic dt={dt:g} exceeds tau/2={self.params.tau / 2:g}")
        v = state.W.values
        v = self.transport(v, 0.5 * dt)
        v = self.potential(v, 0.5 * dt)
        v = self.precess(v, 0.5 * dt)
        W = self.relax(PhaseSpaceField(v, self.grid, self.pgrid), dt)
        v = self.precess(W.values, 0.5 * dt)
        v = self.potential(v, 0.5 * dt)
        v = self.transport(v, 0.5 * dt)
        W = PhaseSpaceField(v, self.grid, self.pgrid)

        if not np.all(np.isfinite(v)):
            raise PositivityLossError("Non-finite values in the Wigner function", snapshot=state.W.values.copy(), t=state.t)
        leak = W.boundary_fraction()
        if leak > settings.KINETIC_LEAK_LIMIT:
            raise BoundaryLeakError(
                f"p-boundary leak {leak:.2e} exceeds the limit; widen pmax", leak=leak, t=state.t + dt
            )
        return replace(state, W=W, t=state.t + dt)

    def moments(self, state: KineticState) -> SpinField:
        return moments(state.W, self.params.eps)


def kinetic_step(state: KineticState, dt: float, solver: Optional[KineticSolver] = None) -> KineticState:
    solver = solver or KineticSolver(state.params, state.W.grid, state.W.pgrid)
    return solver.step(state, dt)


# Hydrodynamic limit


@dataclass
class HydroRow:
    tau: float
    dt: float
    error: float
    deviation: float
    steps: int


@dataclass
class HydroComparison:
    rows: List[HydroRow]
    fluid_model: str

    @property
    def ratios(self) -> List[float]:
        errs = [row.error for row in self.rows]
        return [a / b if b > 0 else float("inf") for a, b in zip(errs, errs[1:])]

    def to_dict(self) -> dict:
        return {
            "fluid_model": self.fluid_model,
            "rows": [row.__dict__ for row in self.rows],
            "ratios": self.ratios,
        }


def hydrodynamic_compare(
    N0: SpinField,
    params: FluidParams,
    tau_values: Sequence[float],
    t_end: float,
    pgrid: PGrid,
    closure_order: int = 1,
    closure: str = "derived",
    steps_per_tau: int = 10,
) -> HydroComparison:
    """Kinetic moments against the fluid model for a sequence of relaxation times.

    error = sup_t |N_kin - N_fl| / sup_t |N_fl(t) - N_fl(0)|, deviation = sup_t |N_kin - N_fl| / |N_fl(0)|.
    """
    grid = N0.grid
    fluid_model = "spin_vector" if closure_order < 2 else "local"
    rows = []
    for tau in tau_values:
        p = replace(params, tau=tau)
        dt = tau / steps_per_tau
        steps = max(1, int(round(t_end / dt)))
        solver = KineticSolver(p, grid, pgrid, closure_order, closure)
        kin = solver.initial_state(N0)
        integrator = FluidIntegrator(build_model(fluid_model, p, grid), dt)
        u0 = integrator.model.pack(N0)
        u = u0
        distance = drift = 0.0
        for n in range(steps):
            kin = solver.step(kin, dt)
            u = integrator.advance(u, n * dt)
            diff = solver.moments(kin).stacked() - u
            distance = max(distance, float(np.sqrt(np.sum(grid.l2(diff) ** 2))))
            drift = max(drift, float(np.sqrt(np.sum(grid.l2(u - u0) ** 2))))
        scale = float(np.sqrt(np.sum(grid.l2(u0) ** 2)))
        row = HydroRow(tau, dt, distance / drift if drift > 0 else float("inf"), distance / scale, steps)
        logger.info(f"tau={tau:g}: error={row.error:.4g} deviation={row.deviation:.3g} over {steps} steps")
        rows.append(row)
    return HydroComparison(rows, fluid_model)
