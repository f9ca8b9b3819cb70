"""Pydantic schemas for simulation scenarios."""

import hashlib
import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, root_validator, validator

from spinqdd.core.config import settings


class FourierMode(BaseModel):
    """amplitude * cos(2 pi (m1 x1 / lx + m2 x2 / ly) + phase)."""

    amplitude: float
    mode: Tuple[int, int] = Field(..., description="Integer wave numbers (m1, m2) on the torus")
    phase: float = 0.0


class ScalarFieldSpec(BaseModel):
    """Constant plus a finite list of Fourier modes."""

    constant: float = 0.0
    modes: List[FourierMode] = Field(default_factory=list)

    def evaluate(self, x1: np.ndarray, x2: np.ndarray, lx: float, ly: float) -> np.ndarray:
        out = np.full(np.broadcast(x1, x2).shape, self.constant, dtype=float)
        for m in self.modes:
            out += m.amplitude * np.cos(2 * np.pi * (m.mode[0] * x1 / lx + m.mode[1] * x2 / ly) + m.phase)
        return out

    def max_mode(self) -> Tuple[int, int]:
        return (
            max((abs(m.mode[0]) for m in self.modes), default=0),
            max((abs(m.mode[1]) for m in self.modes), default=0),
        )


class SpinFieldSpec(BaseModel):
    """Initial charge density n0 and spin vector (n1, n2, n3)."""

    n0: ScalarFieldSpec = Field(default_factory=lambda: ScalarFieldSpec(constant=1.0))
    n1: ScalarFieldSpec = Field(default_factory=ScalarFieldSpec)
    n2: ScalarFieldSpec = Field(default_factory=ScalarFieldSpec)
    n3: ScalarFieldSpec = Field(default_factory=ScalarFieldSpec)

    def components(self) -> List[ScalarFieldSpec]:
        return [self.n0, self.n1, self.n2, self.n3]


class GridSpec(BaseModel):
    nx: int = Field(default=32, ge=16, description="Grid points along x1 (power of two)")
    ny: int = Field(default=32, ge=16, description="Grid points along x2 (power of two)")
    lx: float = Field(default=2 * math.pi, gt=0)
    ly: float = Field(default=2 * math.pi, gt=0)

    @validator("nx", "ny")
    def power_of_two(cls, v):
        if v & (v - 1):
            raise ValueError("must be a power of two")
        return v


class MomentumGridSpec(BaseModel):
    n: int = Field(default_factory=lambda: settings.NP, ge=8, description="Momentum nodes per axis (even)")
    pmax: float = Field(default_factory=lambda: settings.PMAX, gt=0)

    @validator("n")
    def even(cls, v):
        if v % 2:
            raise ValueError("must be even")
        return v


class PhysicsParams(BaseModel):
    """Dimensionless parameters; tau0 is fixed to 1."""

    eps: float = Field(default=0.0, ge=0, description="Scaled Planck constant")
    alpha: float = Field(default=0.0, description="Scaled Rashba constant")
    tau: float = Field(default=1.0, ge=0, description="Scaled relaxation time")
    drop_eps3: bool = Field(default=False, description="Drop the eps^3 term of the local spin equation")
    precession_form: Literal["homogeneous", "ratio"] = "homogeneous"


class IntegratorSpec(BaseModel):
    scheme: Literal["imex", "rk3"] = "imex"
    dt: float = Field(default=1e-3, gt=0)
    t_end: float = Field(default=1.0, ge=0)
    output_every: int = Field(default=10, ge=1, description="Steps between time-series rows")
    snapshot_every: int = Field(default=0, ge=0, description="Steps between field snapshots (0 disables)")


class KineticSpec(BaseModel):
    closure_order: int = Field(default=1, ge=1, le=3)
    closure: Literal["derived", "closed_form"] = "derived"
    tau_values: List[float] = Field(default_factory=list, description="Relaxation times of the hydrodynamic comparison")
    steps_per_tau: int = Field(default=10, ge=2)
    deviation_tau: Optional[float] = Field(default=None, gt=0, description="Relaxation time of the long deviation run")
    deviation_t_end: Optional[float] = Field(default=None, gt=0)

    @validator("tau_values", each_item=True)
    def positive(cls, v):
        if v <= 0:
            raise ValueError("relaxation times must be positive")
        return v


class Scenario(BaseModel):
    """A complete, self-describing run configuration."""

    name: str = Field(..., min_length=1, max_length=100)
    description: Optional[str] = None
    model: Literal["local", "spin_vector", "two_component", "entropic", "kinetic", "nonlocal_rhs_probe"] = "local"
    grid: GridSpec = Field(default_factory=GridSpec)
    physics: PhysicsParams = Field(default_factory=PhysicsParams)
    potential: ScalarFieldSpec = Field(default_factory=ScalarFieldSpec)
    initial: SpinFieldSpec = Field(default_factory=SpinFieldSpec)
    integrator: IntegratorSpec = Field(default_factory=IntegratorSpec)
    pgrid: MomentumGridSpec = Field(default_factory=MomentumGridSpec)
    kinetic: KineticSpec = Field(default_factory=KineticSpec)

    class Config:
        extra = "forbid"

    @root_validator(skip_on_failure=True)
    def check_modes_and_physicality(cls, values):
        grid = values["grid"]
        specs = [("potential", values["potential"])]
        specs += [(f"initial.n{i}", spec) for i, spec in enumerate(values["initial"].components())]
        for path, spec in specs:
            m1, m2 = spec.max_mode()
            if m1 >= grid.nx // 2 or m2 >= grid.ny // 2:
                raise ValueError(f"{path}: mode ({m1}, {m2}) is not resolved on a {grid.nx}x{grid.ny} grid")

        x1 = np.arange(grid.nx)[:, None] * grid.lx / grid.nx
        x2 = np.arange(grid.ny)[None, :] * grid.ly / grid.ny
        fields = [spec.evaluate(x1, x2, grid.lx, grid.ly) for spec in values["initial"].components()]
        n0 = fields[0]
        spin = np.sqrt(sum(f**2 for f in fields[1:]))
        margin = n0 - values["physics"].eps * spin
        if np.min(n0) <= 0 or np.min(margin) <= 0:
            raise ValueError(f"initial data violates eps|n| < n0 (minimum margin {float(np.min(margin)):.3g})")
        return values

    def digest(self) -> str:
        """sha256 of the canonical JSON form."""
        return hashlib.sha256(self.json(sort_keys=True).encode()).hexdigest()
