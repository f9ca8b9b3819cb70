from .manifest import RunManifest, SnapshotMeta
from .report import CheckReport, ValidationReport
from .scenario import (
    FourierMode,
    GridSpec,
    IntegratorSpec,
    KineticSpec,
    MomentumGridSpec,
    PhysicsParams,
    ScalarFieldSpec,
    Scenario,
    SpinFieldSpec,
)

__all__ = [
    "FourierMode",
    "ScalarFieldSpec",
    "SpinFieldSpec",
    "GridSpec",
    "MomentumGridSpec",
    "PhysicsParams",
    "IntegratorSpec",
    "KineticSpec",
    "Scenario",
    "CheckReport",
    "ValidationReport",
    "SnapshotMeta",
    "RunManifest",
]
