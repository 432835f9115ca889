"""Static SVG line charts built with ElementTree."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Optional

import numpy as np

from simprof.constants import PlotConfig
from simprof.models import CurveSet, FloatArray

SVG_NAMESPACE = "http://www.w3.org/2000/svg"


@dataclass(frozen=True)
class _Frame:
    """Data ranges and the pixel box they are mapped onto."""

    x_range: tuple[float, float]
    y_range: tuple[float, float]
    left: float
    right: float
    top: float
    bottom: float

    def px(self, x: FloatArray) -> FloatArray:
        lo, hi = self.x_range
        return np.asarray(self.left + (x - lo) / (hi - lo) * (self.right - self.left))

    def py(self, y: FloatArray) -> FloatArray:
        lo, hi = self.y_range
        return np.asarray(self.bottom - (y - lo) / (hi - lo) * (self.bottom - self.top))


def _data_range(values: FloatArray) -> tuple[float, float]:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return -1.0, 1.0
    lo, hi = float(finite.min()), float(finite.max())
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        pad = max(1.0, abs(hi)) * 0.1
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _tick_label(value: float) -> str:
    return f"{value:.3g}"


class SvgLineLayout:
    """Line chart with axes, ticks, a legend and one polyline per column."""

    def __init__(self, palette: tuple[str, ...] = PlotConfig.PALETTE) -> None:
        """Initialize the layout.

        Args:
            palette: Line colors, cycled over the columns
        """
        self.palette = palette

    def generate_document(
        self,
        curves: CurveSet,
        width: int = PlotConfig.DEFAULT_WIDTH,
        height: int = PlotConfig.DEFAULT_HEIGHT,
        title: Optional[str] = None,
    ) -> ET.Element:
        """Build the SVG element tree.

        Args:
            curves: Curves sharing one abscissa
            width: Image width in pixels
            height: Image height in pixels
            title: Chart title, defaults to the curve set title

        Returns:
            Root <svg> element
        """
        stacked = np.concatenate([curves.columns[name] for name in curves.names])
        frame = _Frame(
            x_range=_data_range(curves.x),
            y_range=_data_range(stacked),
            left=PlotConfig.MARGIN_LEFT,
            right=width - PlotConfig.MARGIN_RIGHT,
            top=PlotConfig.MARGIN_TOP,
            bottom=height - PlotConfig.MARGIN_BOTTOM,
        )
        svg = ET.Element(
            "svg",
            {
                "xmlns": SVG_NAMESPACE,
                "width": str(width),
                "height": str(height),
                "viewBox": f"0 0 {width} {height}",
                "font-family": "sans-serif",
                "font-size": str(PlotConfig.FONT_SIZE),
            },
        )
        ET.SubElement(svg, "rect", {"width": "100%", "height": "100%", "fill": "white"})
        text = title if title is not None else curves.title
        if text:
            heading = ET.SubElement(
                svg, "text", {"x": f"{width / 2:.1f}", "y": f"{PlotConfig.MARGIN_TOP / 2:.1f}", "text-anchor": "middle"}
            )
            heading.text = text
        self._add_axes(svg, frame, curves.x_label)
        for index, name in enumerate(curves.names):
            self._add_polyline(svg, frame, curves.x, curves.columns[name], self._color(index))
        self._add_legend(svg, frame, curves.names)
        return svg

    def render(
        self,
        curves: CurveSet,
        width: int = PlotConfig.DEFAULT_WIDTH,
        height: int = PlotConfig.DEFAULT_HEIGHT,
        title: Optional[str] = None,
    ) -> str:
        """SVG document as text."""
        document = self.generate_document(curves, width, height, title)
        return ET.tostring(document, encoding="unicode")

    def _color(self, index: int) -> str:
        return self.palette[index % len(self.palette)]

    def _add_axes(self, svg: ET.Element, frame: _Frame, x_label: str) -> None:
        axes = ET.SubElement(svg, "g", {"class": "axes", "stroke": PlotConfig.AXIS_COLOR, "fill": "none"})
        ET.SubElement(
            axes,
            "line",
            {
                "x1": f"{frame.left:.1f}",
                "y1": f"{frame.bottom:.1f}",
                "x2": f"{frame.right:.1f}",
                "y2": f"{frame.bottom:.1f}",
            },
        )
        ET.SubElement(
            axes,
            "line",
            {
                "x1": f"{frame.left:.1f}",
                "y1": f"{frame.top:.1f}",
                "x2": f"{frame.left:.1f}",
                "y2": f"{frame.bottom:.1f}",
            },
        )
        labels = ET.SubElement(svg, "g", {"class": "ticks", "fill": PlotConfig.AXIS_COLOR})
        x_ticks = np.linspace(*frame.x_range, PlotConfig.TICK_COUNT)
        for tick, px in zip(x_ticks, frame.px(x_ticks)):
            label = ET.SubElement(
                labels, "text", {"x": f"{px:.1f}", "y": f"{frame.bottom + 16:.1f}", "text-anchor": "middle"}
            )
            label.text = _tick_label(float(tick))
        y_ticks = np.linspace(*frame.y_range, PlotConfig.TICK_COUNT)
        for tick, py in zip(y_ticks, frame.py(y_ticks)):
            label = ET.SubElement(
                labels, "text", {"x": f"{frame.left - 6:.1f}", "y": f"{py + 4:.1f}", "text-anchor": "end"}
            )
            label.text = _tick_label(float(tick))
        caption = ET.SubElement(
            labels,
            "text",
            {"x": f"{(frame.left + frame.right) / 2:.1f}", "y": f"{frame.bottom + 36:.1f}", "text-anchor": "middle"},
        )
        caption.text = x_label

    def _add_polyline(self, svg: ET.Element, frame: _Frame, x: FloatArray, y: FloatArray, color: str) -> None:
        keep = np.isfinite(x) & np.isfinite(y)
        points = " ".join(f"{px:.2f},{py:.2f}" for px, py in zip(frame.px(x[keep]), frame.py(y[keep])))
        ET.SubElement(
            svg,
            "polyline",
            {"points": points, "fill": "none", "stroke": color, "stroke-width": str(PlotConfig.STROKE_WIDTH)},
        )

    def _add_legend(self, svg: ET.Element, frame: _Frame, names: list[str]) -> None:
        legend = ET.SubElement(svg, "g", {"class": "legend"})
        x0 = frame.right + 12
        for index, name in enumerate(names):
            y = frame.top + 10 + index * PlotConfig.LEGEND_ROW_HEIGHT
            ET.SubElement(
                legend,
                "line",
                {
                    "x1": f"{x0:.1f}",
                    "y1": f"{y:.1f}",
                    "x2": f"{x0 + 20:.1f}",
                    "y2": f"{y:.1f}",
                    "stroke": self._color(index),
                    "stroke-width": str(PlotConfig.STROKE_WIDTH),
                },
            )
            label = ET.SubElement(legend, "text", {"x": f"{x0 + 26:.1f}", "y": f"{y + 4:.1f}"})
            label.text = name
