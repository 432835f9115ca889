"""Unit tests for the bundled invariant suite."""

import math

import pytest

from simprof.checks import (
    SUITE,
    CheckResult,
    InvariantCheck,
    Measurement,
    check_names,
    run_checks,
    select_checks,
)


class TestMeasurement:
    """Test Measurement class."""

    @pytest.mark.parametrize(
        ("value", "limit", "relation", "expected"),
        [
            (1e-12, 1e-10, "<", True),
            (1e-8, 1e-10, "<", False),
            (1.0, 0.5, ">", True),
            (0.0, 0.5, ">", False),
            (math.nan, 1.0, "<", False),
            (math.inf, 1.0, ">", False),
        ],
    )
    def test_passed(self, value: float, limit: float, relation: str, expected: bool) -> None:
        """Test the limit comparison and the non-finite guard."""
        assert Measurement("q", value, limit, relation).passed is expected

    def test_describe(self) -> None:
        """Test the single-line summary."""
        assert Measurement("residual", 1.5e-11, 1e-10).describe() == "residual = 1.500e-11 (< 1.0e-10)"


class TestInvariantCheck:
    """Test InvariantCheck and CheckResult."""

    def test_run_collects_measurements(self) -> None:
        """Test a passing check."""
        check = InvariantCheck("ok", "always passes", lambda: [Measurement("zero", 0.0, 1.0)])

        result = check.run()

        assert result.passed
        assert result.error is None
        assert result.seconds >= 0.0

    def test_run_turns_exception_into_failure(self) -> None:
        """Test exceptions are captured in the result."""

        def broken() -> list[Measurement]:
            msg = "no data"
            raise RuntimeError(msg)

        result = InvariantCheck("broken", "raises", broken).run()

        assert not result.passed
        assert result.error == "RuntimeError: no data"

    def test_result_without_measurements_fails(self) -> None:
        """Test a check that measures nothing does not pass."""
        assert not CheckResult("empty").passed


class TestSelection:
    """Test check selection and execution."""

    def test_names_unique(self) -> None:
        """Test every check has a distinct name."""
        names = check_names()
        assert len(names) == len(set(names))
        assert "barenblatt_residual" in names

    def test_default_excludes_slow(self) -> None:
        """Test slow checks only run on request."""
        fast = select_checks()
        everything = select_checks(include_slow=True)

        assert all(not check.slow for check in fast)
        assert len(everything) == len(SUITE)
        assert len(fast) < len(everything)

    def test_select_by_name_keeps_suite_order(self) -> None:
        """Test named checks come back in suite order."""
        selected = select_checks(["gl_profile", "barenblatt_residual"])

        assert [check.name for check in selected] == ["barenblatt_residual", "gl_profile"]

    def test_unknown_name(self) -> None:
        """Test unknown names are rejected with the available list."""
        with pytest.raises(ValueError, match="Unknown check\\(s\\): nope"):
            select_checks(["nope", "gl_profile"])

    @pytest.mark.parametrize("jobs", [1, 3])
    def test_run_checks_order(self, jobs: int) -> None:
        """Test results keep the input order with and without a pool."""
        checks = [
            InvariantCheck(f"c{i}", "constant", lambda i=i: [Measurement("v", float(i), 10.0)])
            for i in range(5)
        ]

        results = run_checks(checks, jobs=jobs)

        assert [result.name for result in results] == ["c0", "c1", "c2", "c3", "c4"]
        assert all(result.passed for result in results)

    @pytest.mark.parametrize(
        "name",
        [
            "barenblatt_residual",
            "reduction_exactness",
            "derivative_bound",
            "gl_profile",
            "turbulence_exact_simulation",
            "fast_reaction_equilibration",
        ],
    )
    def test_quick_checks_pass(self, name: str) -> None:
        """Test the inexpensive checks of the suite pass."""
        (result,) = run_checks(select_checks([name]))

        assert result.passed, [m.describe() for m in result.measurements if not m.passed] or result.error

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["pme_self_similarity", "barenblatt_order", "infiltration_mass_law"])
    def test_porous_medium_runs_pass(self, name: str) -> None:
        """Test the porous medium simulation checks pass."""
        (result,) = run_checks(select_checks([name]))

        assert result.passed, [m.describe() for m in result.measurements if not m.passed] or result.error

    def test_derivative_bound_ignores_flat_tails(self) -> None:
        """Test tails where U' vanishes in floating point do not fail the bound."""
        (result,) = run_checks(select_checks(["derivative_bound"]))

        assert all(math.isfinite(m.value) for m in result.measurements)

    @pytest.mark.slow
    def test_fast_suite_passes(self) -> None:
        """Test every non-slow check passes."""
        failed = [result.name for result in run_checks(select_checks(), jobs=2) if not result.passed]

        assert failed == []
