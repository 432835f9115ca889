import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Any, Callable, NoReturn, Optional, TypeVar

import click

from simprof.checks import check_names, run_checks, select_checks
from simprof.config import ProblemTag, RunConfig, load_config, parse_config
from simprof.constants import DefaultValues
from simprof.core import create_plotter
from simprof.exceptions import ConfigValidationError, SolverError
from simprof.models import GLOrdering, OutputFormat
from simprof.pipeline import Pipeline

logger = logging.getLogger(__name__)

F = TypeVar("F", bound=Callable[..., Any])

FLUX_PROBLEMS = (
    ProblemTag.PME_BARENBLATT,
    ProblemTag.PME_MIXING,
    ProblemTag.RDS_PROFILE,
    ProblemTag.TURBULENCE_EXACT,
)


class ExitCode(IntEnum):
    """Process exit codes."""

    OK = 0
    VALIDATION = 1
    SOLVER = 2


@dataclass
class OutputOptions:
    """Where and in which formats run artifacts are written."""

    output_dir: Optional[str] = None
    format: str = DefaultValues.FORMAT
    width: int = DefaultValues.WIDTH
    height: int = DefaultValues.HEIGHT

    def __post_init__(self) -> None:
        """Validate output options."""
        if self.width <= 0:
            msg = "width must be positive"
            raise ValueError(msg)
        if self.height <= 0:
            msg = "height must be positive"
            raise ValueError(msg)
        if self.format not in OutputFormat.get_supported_formats():
            supported = ", ".join(f"'{fmt}'" for fmt in OutputFormat.get_supported_formats())
            msg = f"Invalid format: {self.format}. Supported formats: {supported}"
            raise ValueError(msg)

    def directory(self, config: RunConfig) -> Path:
        """Output directory: flag or environment, then the config file, then the default."""
        return Path(self.output_dir or config.output_dir or DefaultValues.OUTPUT_DIR)


@dataclass
class PlotOptions:
    """Configuration options for re-rendering a curve file."""

    output: Optional[str] = None
    width: int = DefaultValues.WIDTH
    height: int = DefaultValues.HEIGHT
    format: str = OutputFormat.SVG.value
    title: Optional[str] = None

    def __post_init__(self) -> None:
        """Validate configuration options."""
        if self.width <= 0:
            msg = "width must be positive"
            raise ValueError(msg)
        if self.height <= 0:
            msg = "height must be positive"
            raise ValueError(msg)
        charts = (OutputFormat.SVG.value, OutputFormat.HTML.value)
        if self.format not in charts:
            supported = ", ".join(f"'{fmt}'" for fmt in charts)
            msg = f"Invalid format: {self.format}. Supported formats: {supported}"
            raise ValueError(msg)

    def output_path(self, csv_file: Path) -> Path:
        """Explicit output path or the CSV path with the chart suffix."""
        return Path(self.output) if self.output else csv_file.with_suffix(f".{self.format}")


def _fail(error: Exception) -> NoReturn:
    """Report an error and exit with its code."""
    click.echo(f"Error: {error}", err=True)
    code = ExitCode.SOLVER if isinstance(error, SolverError) else ExitCode.VALIDATION
    raise click.exceptions.Exit(int(code)) from error


def _create_pipeline(options: OutputOptions, config: RunConfig) -> Pipeline:
    """Composition root: assemble the pipeline for the selected formats."""
    return Pipeline(
        options.directory(config),
        [OutputFormat(options.format)],
        width=options.width,
        height=options.height,
    )


def _execute(config: RunConfig, options: OutputOptions, only: Optional[Sequence[str]] = None) -> None:
    pipeline = _create_pipeline(options, config)
    click.echo(f"Running {config.problem.value}...")
    report = pipeline.run(config, only=only)
    for warning in report.warnings:
        click.echo(f"Warning: {warning}", err=True)
    seconds = report.wall_clock_seconds
    click.echo(f"Wrote {len(report.artifacts)} artifact(s) to {pipeline.output_dir} in {seconds:.2f}s")


def _output_options(func: F) -> F:
    func = click.option(
        "--height", default=DefaultValues.HEIGHT, type=int, show_default=True, help="Chart height in pixels"
    )(func)
    func = click.option(
        "--width", default=DefaultValues.WIDTH, type=int, show_default=True, help="Chart width in pixels"
    )(func)
    func = click.option(
        "--format",
        "format_",
        default=DefaultValues.FORMAT,
        type=click.Choice(OutputFormat.get_supported_formats()),
        show_default=True,
        help="Artifact formats; the JSON report is always written",
    )(func)
    func = click.option(
        "--output-dir",
        envvar=DefaultValues.OUTPUT_DIR_ENVVAR,
        type=click.Path(file_okay=False),
        default=None,
        help=f"Output directory [env: {DefaultValues.OUTPUT_DIR_ENVVAR}; default: {DefaultValues.OUTPUT_DIR}]",
    )(func)
    return func


def _options(output_dir: Optional[str], format_: str, width: int, height: int) -> OutputOptions:
    return OutputOptions(output_dir=output_dir, format=format_, width=width, height=height)


@click.group()
@click.option("--verbose", "-v", count=True, help="Increase log verbosity (-v info, -vv debug)")
def cli(verbose: int) -> None:
    """Self-similar profiles, fluxes and verification runs for coupled parabolic systems."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@_output_options
def profile(config_path: Path, output_dir: Optional[str], format_: str, width: int, height: int) -> None:
    """Solve a similarity profile described by a configuration file."""
    try:
        options = _options(output_dir, format_, width, height)
        config = load_config(config_path)
        if config.problem.is_simulation:
            raise ConfigValidationError("problem", f"'{config.problem.value}' is a simulation; use 'simulate'")
        _execute(config, options)
    except (ValueError, SolverError, OSError) as e:
        _fail(e)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@_output_options
def simulate(config_path: Path, output_dir: Optional[str], format_: str, width: int, height: int) -> None:
    """Run a time-dependent simulation described by a configuration file."""
    try:
        options = _options(output_dir, format_, width, height)
        config = load_config(config_path)
        if not config.problem.is_simulation:
            raise ConfigValidationError("problem", f"'{config.problem.value}' is not a simulation; use 'profile'")
        _execute(config, options)
    except (ValueError, SolverError, OSError) as e:
        _fail(e)


@cli.command()
@click.option("-m", "exponents", required=True, multiple=True, type=float, help="Porous medium exponent (repeatable)")
@click.option("-N", "mass_parameter", required=True, type=float, help="Mass parameter N")
@click.option("--dimension", default=1, type=int, show_default=True, help="Space dimension d")
@click.option("--half-width", default=4.0, type=float, show_default=True, help="Grid half-width L")
@click.option("--nodes", default=801, type=int, show_default=True, help="Odd number of grid nodes")
@_output_options
def barenblatt(
    exponents: tuple[float, ...],
    mass_parameter: float,
    dimension: int,
    half_width: float,
    nodes: int,
    output_dir: Optional[str],
    format_: str,
    width: int,
    height: int,
) -> None:
    """Closed-form Barenblatt profiles and their constants c_m."""
    try:
        options = _options(output_dir, format_, width, height)
        config = parse_config(
            {
                "problem": ProblemTag.PME_BARENBLATT.value,
                "m_values": list(exponents),
                "N": mass_parameter,
                "dimension": dimension,
                "L": half_width,
                "n": nodes,
            }
        )
        _execute(config, options)
    except (ValueError, SolverError, OSError) as e:
        _fail(e)


@cli.command("gl-zeros")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--eta-minus", type=float, help="Wavenumber imposed at -infinity")
@click.option("--eta-plus", type=float, help="Wavenumber imposed at +infinity")
@click.option(
    "--ordering",
    type=click.Choice([o.value for o in GLOrdering]),
    default=GLOrdering.CAPTION.value,
    show_default=True,
    help="Order of the default wavenumber pair",
)
@click.option("--final-time", default=200.0, type=float, show_default=True, help="Final time T")
@click.option("--domain-half-width", default=60.0, type=float, show_default=True, help="Simulation half-width X")
@click.option("--domain-nodes", default=2401, type=int, show_default=True, help="Odd number of simulation nodes")
@click.option("--snapshots", default=400, type=int, show_default=True, help="Number of snapshot intervals")
@_output_options
def gl_zeros(
    config_path: Optional[Path],
    eta_minus: Optional[float],
    eta_plus: Optional[float],
    ordering: str,
    final_time: float,
    domain_half_width: float,
    domain_nodes: int,
    snapshots: int,
    output_dir: Optional[str],
    format_: str,
    width: int,
    height: int,
) -> None:
    """Ginzburg-Landau run with mixed wavenumbers and tracked zeros of Re A."""
    try:
        options = _options(output_dir, format_, width, height)
        if config_path is not None:
            config = load_config(config_path)
            if config.problem is not ProblemTag.GL_SIMULATE:
                raise ConfigValidationError("problem", "gl-zeros needs a 'gl_simulate' configuration")
        else:
            data: dict[str, Any] = {
                "problem": ProblemTag.GL_SIMULATE.value,
                "ordering": ordering,
                "X": domain_half_width,
                "n_x": domain_nodes,
                "T": final_time,
                "snapshots": snapshots,
            }
            if (eta_minus is None) != (eta_plus is None):
                missing = "eta_plus" if eta_plus is None else "eta_minus"
                raise ConfigValidationError(missing, "give both wavenumbers or neither")
            if eta_minus is not None:
                data.update(eta_minus=eta_minus, eta_plus=eta_plus)
            config = parse_config(data)
        _execute(config, options)
    except (ValueError, SolverError, OSError) as e:
        _fail(e)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@_output_options
def fluxes(config_path: Path, output_dir: Optional[str], format_: str, width: int, height: int) -> None:
    """Fluxes and reaction multipliers of a similarity profile."""
    try:
        options = _options(output_dir, format_, width, height)
        config = load_config(config_path)
        if config.problem not in FLUX_PROBLEMS:
            supported = ", ".join(tag.value for tag in FLUX_PROBLEMS)
            raise ConfigValidationError("problem", f"fluxes are available for: {supported}")
        _execute(config, options, only=[DefaultValues.FLUXES_STEM])
    except (ValueError, SolverError, OSError) as e:
        _fail(e)


@cli.command()
@click.option("--only", "names", multiple=True, help=f"Run only the named check(s): {', '.join(check_names())}")
@click.option("--all", "include_slow", is_flag=True, help="Include slow checks")
@click.option("--jobs", default=1, type=int, show_default=True, help="Checks run concurrently")
def check(names: tuple[str, ...], include_slow: bool, jobs: int) -> None:
    """Run the bundled invariant suite; exit 0 iff every check passes."""
    try:
        selected = select_checks(names, include_slow=include_slow)
    except ValueError as e:
        _fail(e)
    results = run_checks(selected, jobs=jobs)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        click.echo(f"[{status}] {result.name} ({result.seconds:.2f}s)")
        if result.error:
            click.echo(f"    {result.error}")
        for measurement in result.measurements:
            mark = "ok" if measurement.passed else "!!"
            click.echo(f"    {mark} {measurement.describe()}")
    failed = [result.name for result in results if not result.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        raise click.exceptions.Exit(int(ExitCode.VALIDATION))


@cli.command()
@click.argument("csv_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--output", "-o", default=None, help="Output file path (default: CSV path with the chart suffix)")
@click.option(
    "--format",
    "format_",
    default=OutputFormat.SVG.value,
    type=click.Choice([OutputFormat.SVG.value, OutputFormat.HTML.value]),
    show_default=True,
    help="Chart format",
)
@click.option("--title", default=None, help="Chart title")
@click.option("--width", "-w", default=DefaultValues.WIDTH, type=int, help="Figure width in pixels")
@click.option("--height", "-h", default=DefaultValues.HEIGHT, type=int, help="Figure height in pixels")
def plot(csv_file: Path, output: Optional[str], format_: str, title: Optional[str], width: int, height: int) -> None:
    """Render an existing curve CSV as a line chart.

    CSV_FILE is a curve file written by simprof.
    """
    try:
        options = PlotOptions(output=output, width=width, height=height, format=format_, title=title)
        plotter = create_plotter(options.format)
        click.echo(f"Rendering {csv_file}...")
        path = plotter.plot_from_file(
            csv_file, options.output_path(csv_file), width=options.width, height=options.height, title=options.title
        )
        click.echo(f"Chart saved to {path}")
    except (ValueError, OSError) as e:
        _fail(e)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point for the CLI application; returns the process exit code."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="simprof", standalone_mode=False)
    except click.UsageError as err:
        err.show()
        return int(ExitCode.VALIDATION)
    except click.ClickException as err:
        err.show()
        return int(ExitCode.VALIDATION)
    except click.Abort:
        click.echo("Aborted!", err=True)
        return int(ExitCode.VALIDATION)
    return result if isinstance(result, int) else int(ExitCode.OK)


if __name__ == "__main__":
    raise SystemExit(main())
