"""Check registration and the shared check context."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from spinqdd.core.config import Tolerances, settings
from spinqdd.physics.fields import SpinField
from spinqdd.services.scenarios import RealisedScenario

logger = logging.getLogger(__name__)

DEFAULT_EPS_LEVELS = (0.2, 0.1, 0.05)
FEATURES = ("quantum", "rashba")


@dataclass
class CheckContext:
    primary: RealisedScenario
    secondary: RealisedScenario
    tolerances: Tolerances = field(default_factory=lambda: settings.TOLERANCES)
    eps_levels: Tuple[float, ...] = DEFAULT_EPS_LEVELS

    @property
    def features(self) -> Dict[str, bool]:
        physics = self.primary.scenario.physics
        return {"quantum": physics.eps > 0, "rashba": physics.alpha != 0}

    def at_eps(self, eps: float, realised: Optional[RealisedScenario] = None) -> SpinField:
        """Primary (or given) initial state reinterpreted at another eps."""
        N = (realised or self.primary).N
        return SpinField(N.n0, N.nvec, eps, N.grid)


@dataclass
class Outcome:
    """What a check function returns; the catalog turns it into a CheckReport."""

    passed: bool
    residuals: Dict[str, float] = field(default_factory=dict)
    tolerance: Optional[float] = None
    orders: Dict[str, float] = field(default_factory=dict)
    reason: Optional[str] = None


CheckFunc = Callable[[CheckContext], Outcome]


@dataclass
class CheckSpec:
    name: str
    func: CheckFunc
    anchor: str
    covers: Tuple[str, ...]
    requires: Tuple[str, ...]
    uses: Tuple[str, ...]
    slow: bool


REGISTRY: Dict[str, CheckSpec] = {}


def check(
    name: str,
    anchor: str,
    covers: Tuple[str, ...] = (),
    requires: Tuple[str, ...] = (),
    uses: Tuple[str, ...] = (),
    slow: bool = False,
):
    """Register a catalog check under ``name``."""
    unknown = set(requires) - set(FEATURES)
    if unknown:
        raise ValueError(f"Unknown feature gate(s) {sorted(unknown)} on check '{name}'")

    def decorator(func: CheckFunc) -> CheckFunc:
        if name in REGISTRY:
            raise ValueError(f"Check '{name}' registered twice")
        REGISTRY[name] = CheckSpec(name, func, anchor, tuple(covers), tuple(requires), tuple(uses), slow)
        return func

    return decorator


def select(only: Optional[List[str]] = None, skip_slow: bool = False) -> List[CheckSpec]:
    """Checks whose name contains any of the ``only`` patterns, sorted by name."""
    specs = sorted(REGISTRY.values(), key=lambda s: s.name)
    if only:
        specs = [s for s in specs if any(pattern in s.name for pattern in only)]
    if skip_slow:
        specs = [s for s in specs if not s.slow]
    return specs
