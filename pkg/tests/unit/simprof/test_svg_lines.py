"""Unit tests for SVG line charts."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from simprof.models import CurveSet
from simprof.svg_lines import SVG_NAMESPACE, SvgLineLayout

NS = {"svg": SVG_NAMESPACE}


@pytest.fixture
def curves() -> CurveSet:
    """Three curves on eleven nodes."""
    x = np.linspace(-5.0, 5.0, 11)
    return CurveSet("y", x, {"u1": x, "u2": -x, "u3": np.ones_like(x)}, "Profiles")


class TestSvgLineLayout:
    """Test SvgLineLayout class."""

    def test_document_size(self, curves: CurveSet) -> None:
        """Test the root element carries size and view box."""
        svg = SvgLineLayout().generate_document(curves, 640, 400)

        assert svg.get("width") == "640"
        assert svg.get("viewBox") == "0 0 640 400"

    def test_one_polyline_per_column(self, curves: CurveSet) -> None:
        """Test each column becomes a polyline with all of its points."""
        svg = SvgLineLayout().generate_document(curves)

        polylines = svg.findall("polyline")
        assert len(polylines) == 3
        assert all(len(line.get("points", "").split()) == 11 for line in polylines)

    def test_palette_cycles(self, curves: CurveSet) -> None:
        """Test colors repeat when there are more columns than colors."""
        svg = SvgLineLayout(palette=("#000000", "#ffffff")).generate_document(curves)

        colors = [line.get("stroke") for line in svg.findall("polyline")]
        assert colors == ["#000000", "#ffffff", "#000000"]

    def test_non_finite_points_dropped(self) -> None:
        """Test NaN values leave gaps instead of breaking the polyline."""
        x = np.linspace(0.0, 1.0, 4)
        curves = CurveSet("y", x, {"u": np.array([0.0, np.nan, 1.0, np.inf])})

        svg = SvgLineLayout().generate_document(curves)

        assert len(svg.findall("polyline")[0].get("points", "").split()) == 2

    def test_title_and_legend(self, curves: CurveSet) -> None:
        """Test the title defaults to the curve set title and the legend names the columns."""
        svg = SvgLineLayout().generate_document(curves)

        texts = [element.text for element in svg.iter("text")]
        assert "Profiles" in texts
        legend = svg.find("g[@class='legend']")
        assert legend is not None
        assert [label.text for label in legend.findall("text")] == ["u1", "u2", "u3"]

    def test_explicit_title(self, curves: CurveSet) -> None:
        """Test an explicit title replaces the curve set title."""
        svg = SvgLineLayout().generate_document(curves, title="Mixing")

        texts = [element.text for element in svg.iter("text")]
        assert "Mixing" in texts
        assert "Profiles" not in texts

    def test_constant_curve_has_finite_range(self) -> None:
        """Test a flat curve is padded so pixel positions stay finite."""
        x = np.linspace(0.0, 1.0, 3)
        curves = CurveSet("y", x, {"u": np.full(3, 2.0)})

        points = SvgLineLayout().generate_document(curves).findall("polyline")[0].get("points", "")

        values = [float(v) for pair in points.split() for v in pair.split(",")]
        assert np.all(np.isfinite(values))

    def test_render_parses(self, curves: CurveSet) -> None:
        """Test the rendered text is a well-formed SVG document."""
        text = SvgLineLayout().render(curves)

        root = ET.fromstring(text)
        assert root.tag == f"{{{SVG_NAMESPACE}}}svg"
        assert len(root.findall("svg:polyline", NS)) == 3
