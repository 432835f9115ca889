"""Plotly-based line chart layout for interactive HTML output."""

from __future__ import annotations

from typing import Optional

import numpy as np
import plotly.graph_objects as go  # type: ignore[import-untyped]

from simprof.constants import PlotConfig
from simprof.models import CurveSet


class PlotlyLineLayout:
    """Line chart layout with one trace per curve column."""

    def __init__(self, palette: tuple[str, ...] = PlotConfig.PALETTE) -> None:
        """Initialize the layout.

        Args:
            palette: Line colors, cycled over the columns
        """
        self.palette = palette

    def generate_figure(
        self,
        curves: CurveSet,
        width: int = PlotConfig.DEFAULT_WIDTH,
        height: int = PlotConfig.DEFAULT_HEIGHT,
        title: Optional[str] = None,
    ) -> go.Figure:
        """Generate a Plotly line chart.

        Args:
            curves: Curves sharing one abscissa
            width: Figure width in pixels
            height: Figure height in pixels
            title: Chart title, defaults to the curve set title

        Returns:
            Plotly Figure object
        """
        fig = go.Figure()
        x = curves.x.tolist()
        for index, name in enumerate(curves.names):
            column = curves.columns[name]
            # gaps instead of spikes where a curve is undefined
            y = np.where(np.isfinite(column), column, np.nan).tolist()
            fig.add_trace(
                go.Scatter(
                    x=x,
                    y=y,
                    mode="lines",
                    name=name,
                    line={"color": self.palette[index % len(self.palette)], "width": PlotConfig.STROKE_WIDTH},
                )
            )

        fig.update_layout(
            title={
                "text": title if title is not None else curves.title,
                "x": PlotConfig.TITLE_X_POSITION,
                "xanchor": PlotConfig.TITLE_X_ANCHOR,
            },
            xaxis_title=curves.x_label,
            width=width,
            height=height,
            margin={
                "t": PlotConfig.MARGIN_TOP,
                "b": PlotConfig.MARGIN_BOTTOM,
                "l": PlotConfig.MARGIN_LEFT,
                "r": PlotConfig.MARGIN_RIGHT,
            },
            font={"size": PlotConfig.FONT_SIZE},
        )

        return fig
