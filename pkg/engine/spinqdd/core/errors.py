"""Exception hierarchy shared by the numerical core, the harness and the CLI."""

from typing import Any, Dict, Optional


class SpinQDDError(Exception):
    """Base error carrying a readable ``detail`` and structured context."""

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "detail": self.detail, "context": {k: repr(v) for k, v in self.context.items()}}


class ConfigurationError(SpinQDDError):
    """Invalid argument domain or resolution setup."""


class ScenarioError(SpinQDDError):
    """Scenario file failed schema validation."""


class NonPhysicalStateError(SpinQDDError):
    """Density matrix N = n0 + eps n.sigma is not positive definite."""


class DegreeOverflowError(SpinQDDError):
    """A symbol operation would exceed the maximum p-degree."""


class ResolutionError(SpinQDDError):
    """Field is not resolved on the chosen grid."""


class BoundaryLeakError(ResolutionError):
    """Phase-space mass reached the edge of the truncated p-box."""


class PositivityLossError(SpinQDDError):
    """Time stepping produced NaN or a non-physical state."""

    def __init__(self, detail: str, snapshot: Optional[Any] = None, **context: Any):
        super().__init__(detail, **context)
        # Last valid state, dumped by the runner
        self.snapshot = snapshot
