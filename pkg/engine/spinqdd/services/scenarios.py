"""Loading scenario files and turning them into numerical objects."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np
from pydantic import ValidationError

from spinqdd.core.config import settings
from spinqdd.core.errors import ScenarioError
from spinqdd.physics.fields import Grid2D, PGrid, SpinField
from spinqdd.physics.fluid import FluidParams
from spinqdd.schemas.scenario import Scenario

logger = logging.getLogger(__name__)


@dataclass
class RealisedScenario:
    scenario: Scenario
    grid: Grid2D
    pgrid: PGrid
    N: SpinField
    params: FluidParams


def _error_paths(exc: ValidationError) -> List[str]:
    return [".".join(str(part) for part in err["loc"]) + f": {err['msg']}" for err in exc.errors()]


def parse_scenario(data: dict, source: str = "<dict>") -> Scenario:
    try:
        return Scenario.parse_obj(data)
    except ValidationError as exc:
        paths = _error_paths(exc)
        raise ScenarioError(f"Invalid scenario {source}: " + "; ".join(paths), source=source, errors=paths) from exc


def resolve_scenario_path(ref: Union[str, Path]) -> Path:
    """Accept a file path or the bare name of a shipped scenario."""
    path = Path(ref)
    if path.is_file():
        return path
    shipped = Path(settings.SCENARIO_DIR) / f"{Path(ref).stem}.json"
    if shipped.is_file():
        return shipped
    raise ScenarioError(f"Scenario '{ref}' not found", ref=str(ref), scenario_dir=settings.SCENARIO_DIR)


def load_scenario(ref: Union[str, Path]) -> Scenario:
    path = resolve_scenario_path(ref)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"Scenario {path} is not valid JSON: {exc}", path=str(path)) from exc
    scenario = parse_scenario(data, str(path))
    logger.debug(f"Loaded scenario '{scenario.name}' from {path}")
    return scenario


def list_scenarios() -> List[str]:
    return sorted(p.stem for p in Path(settings.SCENARIO_DIR).glob("*.json"))


def realise(scenario: Scenario) -> RealisedScenario:
    """Evaluate the Fourier-mode specs on the scenario grid."""
    g = scenario.grid
    grid = Grid2D(g.nx, g.ny, g.lx, g.ly)
    pgrid = PGrid(scenario.pgrid.n, scenario.pgrid.pmax)

    def _eval(spec):
        return spec.evaluate(grid.x1, grid.x2, grid.lx, grid.ly)

    comps = [_eval(spec) for spec in scenario.initial.components()]
    N = SpinField(comps[0], np.stack(comps[1:]), scenario.physics.eps, grid)
    N.require_physical()
    p = scenario.physics
    params = FluidParams(
        eps=p.eps,
        alpha=p.alpha,
        tau=p.tau,
        V=_eval(scenario.potential),
        drop_eps3=p.drop_eps3,
        precession_form=p.precession_form,
    )
    return RealisedScenario(scenario, grid, pgrid, N, params)


def with_overrides(scenario: Scenario, **paths) -> Scenario:
    """Copy with dotted-path overrides, e.g. ``physics.tau=0.5``; the result is revalidated."""
    data = json.loads(scenario.json())
    for dotted, value in paths.items():
        target = data
        keys = dotted.split(".")
        for key in keys[:-1]:
            if key not in target or not isinstance(target[key], dict):
                raise ScenarioError(f"Unknown scenario parameter '{dotted}'", param=dotted)
            target = target[key]
        if keys[-1] not in target:
            raise ScenarioError(f"Unknown scenario parameter '{dotted}'", param=dotted)
        target[keys[-1]] = value
    return parse_scenario(data, f"{scenario.name} with {paths}")
