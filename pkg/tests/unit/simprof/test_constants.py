"""Unit tests for constants module."""

import math

from simprof.constants import CsvConfig, DefaultValues, EckhausConfig, GridDefaults, PlotConfig, SolverDefaults


class TestConstants:
    """Test constant values the rest of the package relies on."""

    def test_eckhaus_bound(self) -> None:
        """Test the Eckhaus bound is 1/sqrt(3) and the caption pair lies inside it."""
        assert math.isclose(EckhausConfig.BOUND, 1.0 / math.sqrt(3.0))
        assert all(abs(eta) < EckhausConfig.BOUND for eta in EckhausConfig.CAPTION_PAIR)

    def test_grid_defaults(self) -> None:
        """Test the default node count is odd."""
        assert GridDefaults.NODES % 2 == 1
        assert GridDefaults.HALF_WIDTH > 0

    def test_solver_defaults(self) -> None:
        """Test continuation escalates beyond the default step count."""
        assert SolverDefaults.ESCALATED_CONTINUATION_STEPS > SolverDefaults.CONTINUATION_STEPS
        assert 0 < SolverDefaults.HALVING_FACTOR < 1

    def test_csv_format_round_trips_doubles(self) -> None:
        """Test the float format keeps full precision."""
        value = 0.1 + 0.2
        assert float(CsvConfig.FLOAT_FORMAT.format(value)) == value
        assert CsvConfig.LINE_TERMINATOR == "\n"

    def test_default_figure_size(self) -> None:
        """Test default figure size comes from the plot configuration."""
        assert DefaultValues.WIDTH == PlotConfig.DEFAULT_WIDTH
        assert DefaultValues.HEIGHT == PlotConfig.DEFAULT_HEIGHT
        assert len(PlotConfig.PALETTE) >= 3
