from pathlib import Path
from typing import Optional, Protocol, Union

from simprof.artifacts import read_csv
from simprof.constants import DefaultValues
from simprof.exceptions import UnsupportedFormatError
from simprof.models import CurveSet, OutputFormat
from simprof.plotly_lines import PlotlyLineLayout
from simprof.svg_lines import SvgLineLayout


class CurvePlotter(Protocol):
    """Protocol for line chart plotters."""

    def plot(
        self,
        curves: CurveSet,
        output_path: Union[str, Path],
        *,
        width: int = DefaultValues.WIDTH,
        height: int = DefaultValues.HEIGHT,
        title: Optional[str] = None,
    ) -> Path:
        """Render curves to a file.

        Args:
            curves: Curves sharing one abscissa
            output_path: Path to save the output file
            width: Figure width in pixels
            height: Figure height in pixels
            title: Chart title

        Returns:
            Path of the written file
        """

    def plot_from_file(
        self,
        csv_file: Path,
        output_path: Union[str, Path],
        *,
        width: int = DefaultValues.WIDTH,
        height: int = DefaultValues.HEIGHT,
        title: Optional[str] = None,
    ) -> Path:
        """Render a curve CSV file.

        Args:
            csv_file: Curve file written by the CSV writer
            output_path: Path to save the output file
            width: Figure width in pixels
            height: Figure height in pixels
            title: Chart title
        """


class SvgCurvePlotter:
    """Static SVG plotter."""

    def __init__(self, layout_engine: SvgLineLayout) -> None:
        """Initialize with the SVG layout engine."""
        self.layout_engine = layout_engine

    def plot(
        self,
        curves: CurveSet,
        output_path: Union[str, Path],
        *,
        width: int = DefaultValues.WIDTH,
        height: int = DefaultValues.HEIGHT,
        title: Optional[str] = None,
    ) -> Path:
        """Write the curves as an SVG line chart."""
        path = Path(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.layout_engine.render(curves, width, height, title), encoding="utf-8")
        return path

    def plot_from_file(
        self,
        csv_file: Path,
        output_path: Union[str, Path],
        *,
        width: int = DefaultValues.WIDTH,
        height: int = DefaultValues.HEIGHT,
        title: Optional[str] = None,
    ) -> Path:
        """Write an SVG line chart of a curve file."""
        return self.plot(read_csv(csv_file), output_path, width=width, height=height, title=title)


class PlotlyCurvePlotter:
    """Interactive HTML plotter."""

    def __init__(self, layout_engine: PlotlyLineLayout) -> None:
        """Initialize with the Plotly layout engine."""
        self.layout_engine = layout_engine

    def plot(
        self,
        curves: CurveSet,
        output_path: Union[str, Path],
        *,
        width: int = DefaultValues.WIDTH,
        height: int = DefaultValues.HEIGHT,
        title: Optional[str] = None,
    ) -> Path:
        """Write the curves as a Plotly HTML page."""
        path = Path(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        figure = self.layout_engine.generate_figure(curves, width, height, title)
        figure.write_html(str(path))
        return path

    def plot_from_file(
        self,
        csv_file: Path,
        output_path: Union[str, Path],
        *,
        width: int = DefaultValues.WIDTH,
        height: int = DefaultValues.HEIGHT,
        title: Optional[str] = None,
    ) -> Path:
        """Write a Plotly HTML page of a curve file."""
        return self.plot(read_csv(csv_file), output_path, width=width, height=height, title=title)


def create_plotter(format_: str) -> CurvePlotter:
    """Plotter for a chart format.

    Args:
        format_: 'svg' or 'html'

    Raises:
        UnsupportedFormatError: If the format is not a chart format
    """
    chart_formats = [OutputFormat.SVG.value, OutputFormat.HTML.value]
    try:
        output_format = OutputFormat(format_.lower())
    except ValueError as err:
        raise UnsupportedFormatError(format_, chart_formats) from err
    if output_format is OutputFormat.SVG:
        return SvgCurvePlotter(SvgLineLayout())
    if output_format is OutputFormat.HTML:
        return PlotlyCurvePlotter(PlotlyLineLayout())
    raise UnsupportedFormatError(format_, chart_formats)
