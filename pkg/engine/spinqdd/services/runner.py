"""Run orchestration: integrate a scenario and write its artifacts."""

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from spinqdd.core.config import settings
from spinqdd.core.errors import PositivityLossError, SpinQDDError
from spinqdd.physics.fields import SpinField
from spinqdd.physics.fluid import FluidIntegrator, FluidParams, FluidState, build_model, entropic_energy, rhs_local, rhs_nonlocal_probe
from spinqdd.physics.kinetic import KineticSolver, hydrodynamic_compare
from spinqdd.schemas.manifest import RunManifest
from spinqdd.schemas.scenario import Scenario
from spinqdd.services import artifacts
from spinqdd.services.scenarios import RealisedScenario, realise, with_overrides

logger = logging.getLogger(__name__)

COMPONENTS = ("n0", "n1", "n2", "n3")


@dataclass
class RunResult:
    directory: Path
    manifest: RunManifest
    rows: List[Dict[str, Optional[float]]] = field(default_factory=list)
    final: Optional[SpinField] = None


def timeseries_row(t: float, N: SpinField, params: FluidParams, with_energy: bool) -> Dict[str, Optional[float]]:
    l2 = N.grid.l2(N.stacked())
    row = {
        "t": t,
        "mass": N.mass(),
        "E_entropic": entropic_energy(N.n0, params, N.grid) if with_energy else None,
        "max_pol": N.polarization(),
    }
    row.update({f"l2_{name}": float(v) for name, v in zip(COMPONENTS, l2)})
    return row


def _write_fields(directory: Path, N: SpinField, t: float, prefix: str = ""):
    for name, values in zip(COMPONENTS, N.stacked()):
        artifacts.write_snapshot(directory / "snapshots", prefix + name, values, N.grid, t)


def _step_count(t_end: float, dt: float) -> int:
    return int(round(t_end / dt))


def _run_fluid(realised: RealisedScenario, out: Path) -> Tuple[List[dict], SpinField, Dict[str, Any]]:
    sc = realised.scenario
    spec = sc.integrator
    model = build_model(sc.model, realised.params, realised.grid)
    integrator = FluidIntegrator(model, spec.dt, spec.scheme)
    u = model.pack(realised.N)
    with_energy = sc.model == "entropic"
    rows = [timeseries_row(0.0, model.unpack(u), realised.params, with_energy)]
    if spec.snapshot_every:
        _write_fields(out, model.unpack(u), 0.0)

    steps = _step_count(spec.t_end, spec.dt)
    for n in range(1, steps + 1):
        u = integrator.advance(u, (n - 1) * spec.dt)
        t = n * spec.dt
        if n % spec.output_every == 0 or n == steps:
            rows.append(timeseries_row(t, model.unpack(u), realised.params, with_energy))
            logger.debug(f"step {n}/{steps} t={t:.4f} mass={rows[-1]['mass']:.12g}")
        if spec.snapshot_every and n % spec.snapshot_every == 0:
            _write_fields(out, model.unpack(u), t)
    final = model.unpack(u)
    summary = {"steps": steps, "mass_drift": abs(rows[-1]["mass"] - rows[0]["mass"]) / rows[0]["mass"]}
    return rows, final, summary


def _run_kinetic(realised: RealisedScenario, out: Path) -> Tuple[List[dict], SpinField, Dict[str, Any]]:
    sc = realised.scenario
    spec, kin = sc.integrator, sc.kinetic
    solver = KineticSolver(realised.params, realised.grid, realised.pgrid, kin.closure_order, kin.closure)
    state = solver.initial_state(realised.N)
    rows = [timeseries_row(0.0, solver.moments(state), realised.params, False)]
    steps = _step_count(spec.t_end, spec.dt)
    for n in range(1, steps + 1):
        state = solver.step(state, spec.dt)
        if n % spec.output_every == 0 or n == steps:
            rows.append(timeseries_row(state.t, solver.moments(state), realised.params, False))
        if spec.snapshot_every and n % spec.snapshot_every == 0:
            _write_fields(out, solver.moments(state), state.t)
    summary: Dict[str, Any] = {"steps": steps}
    if kin.tau_values:
        table = hydrodynamic_compare(
            realised.N,
            realised.params,
            kin.tau_values,
            spec.t_end,
            realised.pgrid,
            kin.closure_order,
            kin.closure,
            kin.steps_per_tau,
        )
        (out / "hydrodynamic.json").write_text(json.dumps(table.to_dict(), indent=2, sort_keys=True))
        summary["hydrodynamic_ratios"] = table.ratios
    return rows, solver.moments(state), summary


def _run_probe(realised: RealisedScenario, out: Path) -> Tuple[List[dict], SpinField, Dict[str, Any]]:
    """Nonlocal right-hand side against the local one at t = 0; nothing is integrated."""
    state = FluidState(realised.N, 0.0, realised.params)
    probe0, probe = rhs_nonlocal_probe(state)
    local0, local = rhs_local(state)
    grid = realised.grid
    diff = np.concatenate([(probe0 - local0)[None], probe - local])
    _write_fields(out, SpinField(probe0, probe, realised.params.eps, grid), 0.0, prefix="rhs_nonlocal_")
    _write_fields(out, SpinField(local0, local, realised.params.eps, grid), 0.0, prefix="rhs_local_")
    summary = {f"l2_diff_{name}": float(v) for name, v in zip(COMPONENTS, grid.l2(diff))}
    rows = [timeseries_row(0.0, realised.N, realised.params, False)]
    return rows, realised.N, summary


RUNNERS = {"kinetic": _run_kinetic, "nonlocal_rhs_probe": _run_probe}


def _dump_failure(out: Path, exc: PositivityLossError, realised: RealisedScenario):
    snap = exc.snapshot
    if snap is None:
        return
    if snap.ndim == 5:
        # Phase-space snapshot: keep the moments only
        snap = np.sum(snap, axis=(-2, -1)) * realised.pgrid.cell_area
    for i, values in enumerate(snap):
        artifacts.write_snapshot(out / "failure", f"component{i}", values, realised.grid, float(exc.context.get("t", 0.0)))


def run_scenario(scenario: Scenario, output_root: Optional[Path] = None, label: Optional[str] = None) -> RunResult:
    out = Path(output_root or settings.OUTPUT_ROOT) / (label or scenario.name)
    out.mkdir(parents=True, exist_ok=True)
    realised = realise(scenario)
    manifest = RunManifest(scenario=scenario, scenario_hash=scenario.digest(), versions=artifacts.package_versions())
    logger.info(f"Running '{scenario.name}' ({scenario.model}) into {out}")

    start = time.perf_counter()
    runner = RUNNERS.get(scenario.model, _run_fluid)
    try:
        rows, final, summary = runner(realised, out)
    except SpinQDDError as exc:
        if isinstance(exc, PositivityLossError):
            _dump_failure(out, exc, realised)
        manifest.status = "failed"
        manifest.failure = exc.to_dict()
        artifacts.write_timing(out, time.perf_counter() - start)
        manifest.outputs = artifacts.list_outputs(out)
        artifacts.write_manifest(out, manifest)
        logger.error(f"Run '{scenario.name}' failed: {exc.detail}")
        raise

    artifacts.write_timeseries(out / artifacts.TIMESERIES_FILE, rows)
    artifacts.write_timing(out, time.perf_counter() - start)
    manifest.summary = summary
    manifest.outputs = artifacts.list_outputs(out)
    artifacts.write_manifest(out, manifest)
    logger.info(f"Finished '{scenario.name}': {len(rows)} rows written to {out}")
    return RunResult(out, manifest, rows, final)


def _sweep_member(args) -> Tuple[Any, str, Optional[str]]:
    scenario, param, value, output_root = args
    label = f"{scenario.name}__{param}={value}"
    try:
        variant = with_overrides(scenario, **{param: value})
        result = run_scenario(variant, output_root, label)
        return value, str(result.directory), None
    except SpinQDDError as exc:
        return value, str(Path(output_root) / label), exc.detail


def run_sweep(
    scenario: Scenario, param: str, values: Sequence[Any], output_root: Optional[Path] = None, max_workers: Optional[int] = None
) -> List[Tuple[Any, str, Optional[str]]]:
    """One independent run per value, in worker processes; results keep the order of ``values``."""
    root = Path(output_root or settings.OUTPUT_ROOT)
    jobs = [(scenario, param, value, root) for value in values]
    with ProcessPoolExecutor(max_workers=max_workers or settings.MAX_WORKERS) as pool:
        return list(pool.map(_sweep_member, jobs))
