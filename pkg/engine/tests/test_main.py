"""Tests for the command-line entry point and its exit codes."""

import json

import pytest

from spinqdd.core.config import settings
from spinqdd.main import EXIT_FAILED, EXIT_INVALID_INPUT, main


def write_scenario(tmp_path, **physics):
    data = {
        "name": "cli_sample",
        "grid": {"nx": 16, "ny": 16},
        "physics": {"eps": 0.1, "alpha": 0.5, **physics},
        "initial": {"n0": {"constant": 1.0}, "n3": {"constant": 0.3}},
        "integrator": {"dt": 0.005, "t_end": 0.02, "output_every": 2},
    }
    path = tmp_path / "cli_sample.json"
    path.write_text(json.dumps(data))
    return path


class TestGlobalOptions:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
        assert settings.VERSION in capsys.readouterr().out

    def test_command_is_required(self):
        with pytest.raises(SystemExit):
            main([])


class TestRunCommand:
    def test_list(self, capsys):
        assert main(["run", "--list"]) == 0
        names = capsys.readouterr().out.split()
        assert "smooth_a" in names and "kinetic_smooth" in names

    def test_run_file(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        assert main(["run", str(path), "--output", str(tmp_path / "runs")]) == 0
        assert "[ok] cli_sample" in capsys.readouterr().out
        assert (tmp_path / "runs" / "cli_sample" / "manifest.json").is_file()

    def test_missing_scenario(self, capsys):
        assert main(["run", "no_such_scenario"]) == EXIT_INVALID_INPUT
        assert "[error]" in capsys.readouterr().err

    def test_invalid_scenario(self, tmp_path):
        path = write_scenario(tmp_path, tau=-1.0)
        assert main(["run", str(path), "--output", str(tmp_path)]) == EXIT_INVALID_INPUT


class TestValidateCommand:
    def test_report(self, tmp_path, capsys):
        report = tmp_path / "out" / "report.json"
        assert main(["validate", "--only", "pauli_oracle", "--report", str(report)]) == 0
        data = json.loads(report.read_text())
        assert [c["name"] for c in data["checks"]] == ["pauli_oracle"]
        assert data["scenario"] == "smooth_a"
        assert "1 passed" in capsys.readouterr().out

    def test_bad_eps_levels(self):
        assert main(["validate", "--only", "pauli_oracle", "--eps", "0.1,0.2"]) == EXIT_INVALID_INPUT

    def test_unknown_check(self):
        assert main(["validate", "--only", "no_such_check"]) == EXIT_INVALID_INPUT

    def test_mutation(self, capsys):
        assert main(["validate", "--only", "bohm_oracle", "--mutation", "bohm"]) == 0
        assert "caught by: bohm_oracle" in capsys.readouterr().out

    def test_mutation_unnoticed(self, capsys):
        assert main(["validate", "--only", "pauli_oracle", "--mutation", "bohm"]) == EXIT_FAILED
        assert "went unnoticed" in capsys.readouterr().out


class TestOtherCommands:
    def test_compare(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        for label in ("a", "b"):
            assert main(["run", str(path), "--output", str(tmp_path), "--label", label]) == 0
        capsys.readouterr()
        assert main(["compare", str(tmp_path / "a"), str(tmp_path / "b"), "--cols", "mass,l2_n3"]) == 0
        assert "l2_n3" in capsys.readouterr().out

    def test_schema(self, tmp_path):
        out = tmp_path / "scenario.schema.json"
        assert main(["schema", "--output", str(out)]) == 0
        schema = json.loads(out.read_text())
        assert schema["title"] == "Scenario"
        assert "physics" in schema["properties"]

    def test_scales(self, capsys):
        assert main(["scales", "--length", "1e-7", "--temperature", "300", "--rashba", "1e-11"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert 0 < data["eps"] < 1

    def test_scales_invalid_device(self):
        assert main(["scales", "--length", "-1", "--temperature", "300"]) == EXIT_INVALID_INPUT
