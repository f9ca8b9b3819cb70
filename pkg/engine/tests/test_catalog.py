"""Tests for the verification catalog, its registry and the mutation self-test."""

import math

import pytest

from spinqdd.core.config import settings
from spinqdd.core.errors import ConfigurationError
from spinqdd.diagnostics import checks
from spinqdd.diagnostics.catalog import (
    REQUIRED_OPERATIONS,
    check_catalog,
    coverage_gaps,
    default_context,
    mutation_self_test,
    run_check,
)
from spinqdd.diagnostics.checks import observed_orders
from spinqdd.diagnostics.registry import FEATURES, REGISTRY, CheckContext, CheckSpec, Outcome, check, select
from spinqdd.physics.kinetic import HydroComparison, HydroRow
from spinqdd.services.scenarios import load_scenario, realise, with_overrides

QUICK = ["pauli_oracle", "moyal_identities", "bohm_oracle", "diffusion_eigenvalues"]


@pytest.fixture(scope="module")
def context():
    return default_context()


def spec(func, requires=()):
    return CheckSpec("stub", func, "stub check", (), tuple(requires), (), False)


class TestRegistry:
    def test_every_operation_is_covered(self):
        assert coverage_gaps() == []
        covered = {op for s in REGISTRY.values() for op in s.covers}
        assert set(REQUIRED_OPERATIONS) <= covered

    def test_feature_gates_are_known(self):
        for s in REGISTRY.values():
            assert set(s.requires) <= set(FEATURES), s.name

    def test_select_by_pattern(self):
        names = [s.name for s in select(["theta"])]
        assert names == sorted(names)
        assert names and all("theta" in n for n in names)

    def test_skip_slow(self):
        names = {s.name for s in select(skip_slow=True)}
        assert "hydrodynamic_limit" not in names
        assert "pauli_oracle" in names

    def test_duplicate_name(self):
        with pytest.raises(ValueError):
            check("pauli_oracle", "again")(lambda ctx: Outcome(True))

    def test_unknown_feature(self):
        with pytest.raises(ValueError):
            check("gated", "unknown gate", requires=("magnetic",))

    def test_observed_orders(self):
        orders = observed_orders([0.2, 0.1, 0.05], [1.6e-3, 1e-4, 6.25e-6])
        assert orders == pytest.approx([4.0, 4.0])
        assert math.isnan(observed_orders([0.2, 0.1], [0.0, 1.0])[0])


class TestRunCheck:
    def test_missing_feature_skips(self):
        classical = realise(with_overrides(load_scenario("equilibrium"), **{"physics.alpha": 0.0}))
        ctx = CheckContext(classical, classical)
        report = run_check(spec(lambda c: Outcome(True), requires=("rashba",)), ctx)
        assert report.status == "skip"
        assert "rashba" in report.reason

    def test_exception_becomes_failure(self, context):
        def broken(ctx):
            raise RuntimeError("boom")

        report = run_check(spec(broken), context)
        assert report.status == "fail"
        assert report.reason == "RuntimeError: boom"

    def test_outcome_is_copied(self, context):
        report = run_check(spec(lambda c: Outcome(True, {"gap": 1e-15}, 1e-12, {"order": 4.0})), context)
        assert report.status == "pass"
        assert report.residuals == {"gap": 1e-15}
        assert report.orders == {"order": 4.0}


class TestCatalog:
    def test_quick_checks_pass(self, context):
        report = check_catalog(context, QUICK, max_workers=2)
        assert [c.name for c in report.checks] == sorted(QUICK)
        assert report.ok, report.table()
        assert report.resolution == {"nx": 32, "ny": 32, "np": 48}
        assert report.scenario == "smooth_a"

    def test_table_summary(self, context):
        table = check_catalog(context, ["pauli_oracle"]).table()
        assert "pauli_oracle" in table
        assert table.splitlines()[-1] == "1 passed, 0 failed, 0 skipped"

    def test_empty_selection(self, context):
        with pytest.raises(ConfigurationError):
            check_catalog(context, ["no_such_check"])

    @pytest.mark.parametrize("levels", [(0.1,), (0.1, 0.2), (0.2, 0.2, 0.1)])
    def test_eps_levels_must_decrease(self, levels):
        with pytest.raises(ConfigurationError):
            default_context(eps_levels=levels)

    def test_round_trip_orders_sit_in_both_windows(self, context):
        report = check_catalog(context, ["round_trip"])
        assert report.ok, report.table()
        orders = report.checks[0].orders
        assert len(orders) == 8
        for name, order in orders.items():
            target = 4 if "charge" in name else 3
            assert abs(order - target) <= settings.TOLERANCES.ratio_window, name


class TestHydrodynamicLimit:
    @pytest.mark.parametrize("deviation, status", [(0.01, "pass"), (0.03, "fail")])
    def test_deviation_comes_from_the_long_run(self, context, monkeypatch, deviation, status):
        calls = []

        def compare(N, params, tau_values, t_end, *args):
            calls.append((list(tau_values), t_end))
            rows = [HydroRow(tau, tau / 10, 10 * tau, deviation if tau < 0.005 else 0.5, 10) for tau in tau_values]
            return HydroComparison(rows, "spin_vector")

        monkeypatch.setattr(checks, "hydrodynamic_compare", compare)
        report = run_check(REGISTRY["hydrodynamic_limit"], context)
        assert calls == [([0.04, 0.02, 0.01], 0.25), ([0.001], 0.5)]
        assert report.status == status
        assert report.residuals["deviation_tau0.001"] == deviation
        assert report.orders == {"ratio_0": pytest.approx(2.0), "ratio_1": pytest.approx(2.0)}


class TestMutation:
    def test_negated_bohm_is_caught(self, context):
        result = mutation_self_test(context, "bohm", only=["bohm_oracle", "pauli_oracle"])
        assert result.failing == ["bohm_oracle"]
        assert result.untagged == []
        assert result.detected

    def test_mutation_is_undone(self, context):
        mutation_self_test(context, "bohm", only=["bohm_oracle"])
        assert check_catalog(context, ["bohm_oracle"]).ok

    def test_unknown_target(self, context):
        with pytest.raises(ConfigurationError):
            mutation_self_test(context, "laplacian")
