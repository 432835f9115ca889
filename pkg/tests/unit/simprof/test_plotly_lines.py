"""Unit tests for the Plotly line layout."""

import math

import numpy as np
import plotly.graph_objects as go  # type: ignore[import-untyped]
import pytest

from simprof.models import CurveSet
from simprof.plotly_lines import PlotlyLineLayout


class TestPlotlyLineLayout:
    """Test PlotlyLineLayout class."""

    @pytest.fixture
    def curves(self) -> CurveSet:
        """Two curves with a gap."""
        x = np.linspace(0.0, 2.0, 3)
        return CurveSet("t", x, {"a": np.array([1.0, np.inf, 3.0]), "b": x}, "Speeds")

    def test_one_trace_per_column(self, curves: CurveSet) -> None:
        """Test traces follow the column order."""
        fig = PlotlyLineLayout().generate_figure(curves)

        assert isinstance(fig, go.Figure)
        assert [trace.name for trace in fig.data] == ["a", "b"]

    def test_non_finite_become_gaps(self, curves: CurveSet) -> None:
        """Test infinite values are replaced by NaN."""
        fig = PlotlyLineLayout().generate_figure(curves)

        y = list(fig.data[0].y)
        assert y[0] == 1.0
        assert math.isnan(y[1])

    def test_layout(self, curves: CurveSet) -> None:
        """Test size, title and axis label."""
        fig = PlotlyLineLayout().generate_figure(curves, width=900, height=300)

        assert fig.layout.width == 900
        assert fig.layout.height == 300
        assert fig.layout.title.text == "Speeds"
        assert fig.layout.xaxis.title.text == "t"

    def test_explicit_title_and_palette(self, curves: CurveSet) -> None:
        """Test title override and palette cycling."""
        fig = PlotlyLineLayout(palette=("#123456",)).generate_figure(curves, title="Zeros")

        assert fig.layout.title.text == "Zeros"
        assert {trace.line.color for trace in fig.data} == {"#123456"}
