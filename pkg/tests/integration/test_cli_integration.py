"""Integration tests for CLI functionality."""

import json
import subprocess
import tempfile
from pathlib import Path

import pytest

from tests.fixtures import RECIPES_DIR


def _simprof(*args: str) -> "subprocess.CompletedProcess[str]":
    return subprocess.run(  # noqa: S603
        ["uv", "run", "simprof", *args],  # noqa: S607
        capture_output=True,
        text=True,
        check=False,
    )


class TestCLIIntegration:
    """Integration tests for the CLI installed as a package."""

    def test_cli_help_command(self) -> None:
        """Test that the CLI help command lists every command."""
        result = _simprof("--help")

        assert result.returncode == 0
        for command in ("profile", "simulate", "barenblatt", "gl-zeros", "fluxes", "check", "plot"):
            assert command in result.stdout

    def test_barenblatt_writes_artifacts(self) -> None:
        """Test a Barenblatt run writes curves, charts and the report."""
        with tempfile.TemporaryDirectory() as tmpdir:
            result = _simprof("barenblatt", "-m", "2", "-N", "1", "--nodes", "201", "--output-dir", tmpdir)

            assert result.returncode == 0, result.stderr
            output = Path(tmpdir)
            for name in ("profile.csv", "fluxes.csv", "profile.svg", "profile.html", "report.json"):
                assert (output / name).exists()
            report = json.loads((output / "report.json").read_text(encoding="utf-8"))
            assert report["status"] == "ok"
            assert "plotly" in (output / "profile.html").read_text(encoding="utf-8").lower()

    def test_profile_recipe(self) -> None:
        """Test the two-species closed-form recipe runs through 'profile'."""
        with tempfile.TemporaryDirectory() as tmpdir:
            recipe = RECIPES_DIR / "fig3_two_species.json"
            result = _simprof("profile", "--config", str(recipe), "--output-dir", tmpdir, "--format", "csv")

            assert result.returncode == 0, result.stderr
            header = (Path(tmpdir) / "profile.csv").read_text(encoding="utf-8").splitlines()[0]
            assert header.startswith("y,")

    def test_plot_existing_csv(self) -> None:
        """Test re-rendering a curve file written by a run."""
        with tempfile.TemporaryDirectory() as tmpdir:
            _simprof("barenblatt", "-m", "3", "-N", "1", "--nodes", "101", "--output-dir", tmpdir, "--format", "csv")
            csv_file = Path(tmpdir) / "profile.csv"
            output_file = Path(tmpdir) / "chart.html"

            result = _simprof("plot", str(csv_file), "--format", "html", "--output", str(output_file))

            assert result.returncode == 0, result.stderr
            assert "Chart saved" in result.stdout
            assert output_file.exists()

    def test_check_subset(self) -> None:
        """Test the invariant suite on a few inexpensive checks."""
        result = _simprof("check", "--only", "barenblatt_residual", "--only", "gl_profile")

        assert result.returncode == 0, result.stdout
        assert "2/2 checks passed" in result.stdout

    @pytest.mark.parametrize(
        ("args", "code", "message"),
        [
            (("barenblatt", "-m", "0.5", "-N", "1"), 1, "exponents must be at least 1"),
            (("gl-zeros", "--eta-minus", "0.7", "--eta-plus", "0.1"), 1, "Eckhaus"),
            (("check", "--only", "missing"), 1, "Unknown check"),
        ],
    )
    def test_validation_errors(self, args: tuple[str, ...], code: int, message: str) -> None:
        """Test invalid input exits with the validation code and names the problem."""
        result = _simprof(*args)

        assert result.returncode == code
        assert message in result.stderr

    def test_missing_config_file(self) -> None:
        """Test CLI behavior with a non-existent configuration file."""
        result = _simprof("profile", "--config", "nonexistent.json")

        assert result.returncode != 0
        assert "does not exist" in result.stderr
