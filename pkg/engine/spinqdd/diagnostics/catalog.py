"""Running the verification catalog and the mutation self-test."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence
from unittest import mock

from spinqdd.core.config import Tolerances, settings
from spinqdd.core.errors import ConfigurationError
from spinqdd.diagnostics import checks  # noqa: F401  (registers the catalog)
from spinqdd.diagnostics.registry import DEFAULT_EPS_LEVELS, REGISTRY, CheckContext, CheckSpec, select
from spinqdd.physics import fluid
from spinqdd.schemas.report import CheckReport, ValidationReport
from spinqdd.services.scenarios import load_scenario, realise

logger = logging.getLogger(__name__)

# Every public operation the catalog has to exercise at least once
REQUIRED_OPERATIONS = (
    "moyal.moyal_j",
    "moyal.theta_apply",
    "moyal.theta_moments_check",
    "moyal.transport_apply",
    "maxwellian.g_order",
    "maxwellian.recursion_residual",
    "maxwellian.maxwellian",
    "maxwellian.multipliers_from_moments",
    "maxwellian.current_density",
    "maxwellian.residual_current",
    "fluid.bohm",
    "fluid.rhs_local",
    "fluid.rhs_spin_vector",
    "fluid.rhs_two_component",
    "fluid.rhs_entropic_spinless",
    "fluid.step",
    "kinetic.kinetic_step",
    "kinetic.hydrodynamic_compare",
)

MUTATION_TARGETS = ("bohm",)


def coverage_gaps() -> List[str]:
    covered = {op for spec in REGISTRY.values() for op in spec.covers}
    return [op for op in REQUIRED_OPERATIONS if op not in covered]


def default_context(
    primary: str = "smooth_a",
    secondary: str = "smooth_b",
    eps_levels: Optional[Sequence[float]] = None,
    tolerances: Optional[Tolerances] = None,
) -> CheckContext:
    """Context built from two shipped (or file) scenarios."""
    ctx = CheckContext(
        primary=realise(load_scenario(primary)),
        secondary=realise(load_scenario(secondary)),
        eps_levels=tuple(eps_levels or DEFAULT_EPS_LEVELS),
    )
    if tolerances is not None:
        ctx.tolerances = tolerances
    if len(ctx.eps_levels) < 2 or any(a <= b for a, b in zip(ctx.eps_levels, ctx.eps_levels[1:])):
        raise ConfigurationError("eps levels must be at least two strictly decreasing values", eps_levels=ctx.eps_levels)
    return ctx


def run_check(spec: CheckSpec, ctx: CheckContext) -> CheckReport:
    base = {"name": spec.name, "anchor": spec.anchor, "uses": list(spec.uses)}
    missing = [feature for feature in spec.requires if not ctx.features[feature]]
    if missing:
        return CheckReport(status="skip", reason=f"scenario lacks {', '.join(missing)}", **base)
    try:
        outcome = spec.func(ctx)
    except Exception as exc:
        logger.exception(f"Check '{spec.name}' raised")
        return CheckReport(status="fail", reason=f"{type(exc).__name__}: {exc}", **base)
    logger.info(f"{spec.name}: {'pass' if outcome.passed else 'FAIL'}")
    return CheckReport(
        status="pass" if outcome.passed else "fail",
        residuals=outcome.residuals,
        tolerance=outcome.tolerance,
        orders=outcome.orders,
        reason=outcome.reason,
        **base,
    )


def check_catalog(
    ctx: CheckContext,
    only: Optional[List[str]] = None,
    skip_slow: bool = False,
    max_workers: Optional[int] = None,
) -> ValidationReport:
    """Run the selected checks concurrently; the report lists them sorted by name."""
    gaps = coverage_gaps()
    if gaps:
        raise ConfigurationError(f"Catalog does not exercise: {', '.join(gaps)}", missing=gaps)
    specs = select(only, skip_slow)
    if not specs:
        raise ConfigurationError(f"No check matches {only}", only=only)
    logger.info(f"Running {len(specs)} checks on '{ctx.primary.scenario.name}'")
    with ThreadPoolExecutor(max_workers=max_workers or settings.MAX_WORKERS) as pool:
        reports = list(pool.map(lambda spec: run_check(spec, ctx), specs))

    grid, pgrid = ctx.primary.grid, ctx.primary.pgrid
    return ValidationReport(
        version=settings.VERSION,
        scenario=ctx.primary.scenario.name,
        scenario_hash=ctx.primary.scenario.digest(),
        resolution={"nx": grid.nx, "ny": grid.ny, "np": pgrid.n},
        checks=reports,
    )


@dataclass
class MutationResult:
    target: str
    report: ValidationReport
    failing: List[str] = field(default_factory=list)
    untagged: List[str] = field(default_factory=list)

    @property
    def detected(self) -> bool:
        """The mutation was caught, and only by checks that declare they use the target."""
        return bool(self.failing) and not self.untagged


def mutation_self_test(
    ctx: CheckContext,
    target: str = "bohm",
    only: Optional[List[str]] = None,
    skip_slow: bool = True,
    max_workers: Optional[int] = None,
) -> MutationResult:
    """Negate one fluid building block and confirm the catalog notices."""
    if target not in MUTATION_TARGETS:
        raise ConfigurationError(f"Unknown mutation target '{target}', expected one of {MUTATION_TARGETS}", target=target)
    original = getattr(fluid, target)

    def negated(*args, **kwargs):
        return -original(*args, **kwargs)

    with mock.patch.object(fluid, target, negated):
        report = check_catalog(ctx, only, skip_slow, max_workers)
    failing = [c.name for c in report.failures]
    untagged = [c.name for c in report.failures if target not in c.uses]
    if untagged:
        logger.warning(f"Mutation of {target} broke checks that do not declare it: {', '.join(untagged)}")
    return MutationResult(target, report, failing, untagged)
