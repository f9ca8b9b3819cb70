"""Readers and writers for run artifacts: time series, field snapshots and manifests."""

import csv
import json
import logging
from importlib import metadata
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from spinqdd.core.config import settings
from spinqdd.core.errors import ScenarioError
from spinqdd.physics.fields import Grid2D
from spinqdd.schemas.manifest import RunManifest, SnapshotMeta

logger = logging.getLogger(__name__)

TIMESERIES_COLUMNS = ("t", "mass", "E_entropic", "max_pol", "l2_n0", "l2_n1", "l2_n2", "l2_n3")
TIMESERIES_FILE = "timeseries.csv"
MANIFEST_FILE = "manifest.json"
TIMING_FILE = "timing.json"
TRACKED_PACKAGES = ("numpy", "scipy", "pydantic")


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else format(value, ".17g")


def write_timeseries(path: Path, rows: Iterable[Dict[str, Optional[float]]]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TIMESERIES_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in TIMESERIES_COLUMNS])


def read_timeseries(path: Path) -> Dict[str, np.ndarray]:
    """Columns as float arrays; empty cells become NaN."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        columns = reader.fieldnames or []
    return {col: np.array([float(r[col]) if r[col] else np.nan for r in rows]) for col in columns}


def write_snapshot(directory: Path, name: str, field: np.ndarray, grid: Grid2D, time: float) -> Path:
    """Row-major little-endian float64 samples plus a JSON sidecar."""
    directory.mkdir(parents=True, exist_ok=True)
    stem = f"{name}_t{time:.6f}"
    path = directory / f"{stem}.bin"
    np.ascontiguousarray(field, dtype="<f8").tofile(path)
    meta = SnapshotMeta(nx=grid.nx, ny=grid.ny, lx=grid.lx, ly=grid.ly, name=name, time=time)
    (directory / f"{stem}.json").write_text(meta.json(indent=2))
    return path


def read_snapshot(path: Path) -> Tuple[np.ndarray, SnapshotMeta]:
    path = Path(path)
    meta = SnapshotMeta.parse_file(path.with_suffix(".json"))
    return np.fromfile(path, dtype="<f8").reshape(meta.nx, meta.ny), meta


def export_slice(path: Path, field: np.ndarray, grid: Grid2D, axis: int = 0, index: int = 0):
    """1-D cut through a snapshot as CSV (coordinate, value)."""
    coords = grid.x1[:, 0] if axis == 0 else grid.x2[0, :]
    values = field[:, index] if axis == 0 else field[index, :]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("x1" if axis == 0 else "x2", "value"))
        for x, v in zip(coords, values):
            writer.writerow((_fmt(float(x)), _fmt(float(v))))


def package_versions() -> Dict[str, str]:
    versions = {settings.PROJECT_NAME: settings.VERSION}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def write_manifest(directory: Path, manifest: RunManifest) -> Path:
    path = directory / MANIFEST_FILE
    path.write_text(manifest.json(indent=2, sort_keys=True))
    return path


def read_manifest(directory: Path) -> RunManifest:
    return RunManifest.parse_file(Path(directory) / MANIFEST_FILE)


def write_timing(directory: Path, wall_time: float):
    (directory / TIMING_FILE).write_text(json.dumps({"wall_time_s": wall_time}, indent=2))


def compare_runs(run_a: Path, run_b: Path, columns: Sequence[str]) -> Dict[str, Dict[str, float]]:
    """Max and final absolute difference per column, B interpolated onto the times of A."""
    a = read_timeseries(Path(run_a) / TIMESERIES_FILE)
    b = read_timeseries(Path(run_b) / TIMESERIES_FILE)
    result: Dict[str, Dict[str, float]] = {}
    for col in columns:
        if col not in a or col not in b:
            raise ScenarioError(f"Column '{col}' missing from one of the runs", column=col)
        other = np.interp(a["t"], b["t"], b[col])
        diff = np.abs(a[col] - other)
        result[col] = {"max_abs_diff": float(np.nanmax(diff)), "final_abs_diff": float(diff[-1])}
    return result


def list_outputs(directory: Path) -> List[str]:
    return sorted(str(p.relative_to(directory)) for p in directory.rglob("*") if p.is_file() and p.name != MANIFEST_FILE)
