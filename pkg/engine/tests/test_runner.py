"""Tests for run orchestration and the artifact readers and writers."""

import json

import numpy as np
import pytest

from spinqdd.core.errors import PositivityLossError, ScenarioError
from spinqdd.physics.fields import Grid2D
from spinqdd.services import artifacts, runner
from spinqdd.services.runner import run_scenario
from spinqdd.services.scenarios import load_scenario, with_overrides


def short(name, **overrides):
    """Shipped scenario cut down to a few steps."""
    paths = {"integrator.t_end": 0.02, "integrator.dt": 0.005, "integrator.output_every": 2}
    paths.update(overrides)
    return with_overrides(load_scenario(name), **paths)


def manifest_text(result):
    return (result.directory / artifacts.MANIFEST_FILE).read_text()


class TestArtifacts:
    def test_timeseries_keeps_empty_cells(self, tmp_path):
        path = tmp_path / "ts.csv"
        artifacts.write_timeseries(path, [{"t": 0.0, "mass": 1.5, "E_entropic": None}, {"t": 0.1, "mass": 1.25}])
        columns = artifacts.read_timeseries(path)
        assert list(columns) == list(artifacts.TIMESERIES_COLUMNS)
        np.testing.assert_array_equal(columns["mass"], [1.5, 1.25])
        assert np.all(np.isnan(columns["E_entropic"]))

    def test_snapshot_layout(self, tmp_path, rng):
        grid = Grid2D(16, 32)
        field = rng.normal(size=grid.shape)
        path = artifacts.write_snapshot(tmp_path, "n0", field, grid, 0.25)
        assert path.name == "n0_t0.250000.bin"
        assert path.stat().st_size == 16 * 32 * 8
        values, meta = artifacts.read_snapshot(path)
        np.testing.assert_array_equal(values, field)
        assert (meta.nx, meta.ny, meta.time) == (16, 32, 0.25)

    def test_export_slice(self, tmp_path, grid):
        path = tmp_path / "cut.csv"
        artifacts.export_slice(path, np.cos(grid.x1), grid, axis=0, index=3)
        lines = path.read_text().splitlines()
        assert lines[0] == "x1,value"
        assert len(lines) == grid.nx + 1

    def test_versions_include_engine(self):
        versions = artifacts.package_versions()
        assert versions["spinqdd"]
        assert set(artifacts.TRACKED_PACKAGES) <= set(versions)


class TestRunScenario:
    def test_writes_artifacts(self, tmp_path):
        result = run_scenario(short("equilibrium"), tmp_path)
        assert result.directory == tmp_path / "equilibrium"
        for name in (artifacts.MANIFEST_FILE, artifacts.TIMESERIES_FILE, artifacts.TIMING_FILE):
            assert (result.directory / name).is_file()
        assert [row["t"] for row in result.rows] == pytest.approx([0.0, 0.01, 0.02])
        manifest = artifacts.read_manifest(result.directory)
        assert manifest.status == "completed"
        assert manifest.scenario_hash == manifest.scenario.digest()
        assert artifacts.TIMESERIES_FILE in manifest.outputs

    def test_equilibrium_stays_constant(self, tmp_path):
        result = run_scenario(short("equilibrium"), tmp_path)
        columns = artifacts.read_timeseries(result.directory / artifacts.TIMESERIES_FILE)
        np.testing.assert_allclose(columns["mass"], columns["mass"][0], rtol=1e-13)
        np.testing.assert_allclose(columns["l2_n3"], 0.0, atol=1e-14)

    def test_manifest_is_deterministic(self, tmp_path):
        first = run_scenario(short("equilibrium"), tmp_path, "first")
        second = run_scenario(short("equilibrium"), tmp_path, "second")
        assert manifest_text(first) == manifest_text(second)

    def test_entropic_run_records_energy(self, tmp_path):
        result = run_scenario(short("entropic"), tmp_path)
        energy = [row["E_entropic"] for row in result.rows]
        assert all(e is not None for e in energy)
        assert all(b < a for a, b in zip(energy, energy[1:]))

    def test_snapshots(self, tmp_path):
        result = run_scenario(short("equilibrium", **{"integrator.snapshot_every": 2}), tmp_path)
        names = sorted(p.name for p in (result.directory / "snapshots").glob("*.bin"))
        assert "n0_t0.000000.bin" in names
        assert "n3_t0.010000.bin" in names

    def test_nonlocal_rhs_reports_gap(self, tmp_path):
        result = run_scenario(load_scenario("nonlocal_probe"), tmp_path)
        assert set(result.manifest.summary) == {"l2_diff_n0", "l2_diff_n1", "l2_diff_n2", "l2_diff_n3"}
        assert result.manifest.summary["l2_diff_n0"] < 1e-2

    def test_failure_is_recorded(self, tmp_path, monkeypatch):
        def failing(realised, out):
            raise PositivityLossError("state left the cone", snapshot=realised.N.stacked(), t=0.5)

        monkeypatch.setattr(runner, "_run_fluid", failing)
        with pytest.raises(PositivityLossError):
            run_scenario(short("equilibrium"), tmp_path)
        directory = tmp_path / "equilibrium"
        manifest = json.loads((directory / artifacts.MANIFEST_FILE).read_text())
        assert manifest["status"] == "failed"
        assert manifest["failure"]["error"] == "PositivityLossError"
        assert len(list((directory / "failure").glob("*.bin"))) == 4


class TestCompareAndSweep:
    def test_identical_runs_compare_to_zero(self, tmp_path):
        a = run_scenario(short("dyakonov_perel"), tmp_path, "a")
        b = run_scenario(short("dyakonov_perel"), tmp_path, "b")
        result = artifacts.compare_runs(a.directory, b.directory, ["mass", "l2_n3"])
        assert result["l2_n3"]["max_abs_diff"] == 0.0

    def test_compare_unknown_column(self, tmp_path):
        a = run_scenario(short("equilibrium"), tmp_path, "a")
        with pytest.raises(ScenarioError) as info:
            artifacts.compare_runs(a.directory, a.directory, ["velocity"])
        assert "velocity" in str(info.value)

    def test_sweep_member_reports_invalid_value(self, tmp_path):
        value, directory, error = runner._sweep_member((short("equilibrium"), "physics.tau", -1.0, tmp_path))
        assert value == -1.0
        assert error is not None

    def test_sweep_member_runs(self, tmp_path):
        value, directory, error = runner._sweep_member((short("equilibrium"), "physics.tau", 0.5, tmp_path))
        assert error is None
        assert directory.endswith("equilibrium__physics.tau=0.5")
