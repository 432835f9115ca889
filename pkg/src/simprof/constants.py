"""Constants for solver defaults, simulation policies and figure output."""

import math
from typing import Final


class SolverDefaults:
    """Defaults for the damped Newton profile solver."""

    TOLERANCE: Final[float] = 1e-10
    MAX_ITERATIONS: Final[int] = 50
    HALVING_FACTOR: Final[float] = 0.5
    MAX_HALVINGS: Final[int] = 30
    CONTINUATION_STEPS: Final[int] = 1
    ESCALATED_CONTINUATION_STEPS: Final[int] = 8
    PROJECTION_CAP: Final[int] = 100_000

    # Round-off floor of the discrete residual, in units of eps * max|A(U)| / h^2
    ROUNDOFF_FACTOR: Final[float] = 64.0
    STAGNATION_FACTOR: Final[float] = 100.0
    ARMIJO_SLOPE: Final[float] = 1e-4
    JACOBIAN_FLOOR: Final[float] = 1e-8


class GridDefaults:
    """Default truncation of the similarity line."""

    HALF_WIDTH: Final[float] = 10.0
    NODES: Final[int] = 4001
    MIN_NODES: Final[int] = 3


class ReductionDefaults:
    """Defaults for reduction maps and network checks."""

    NEWTON_TOLERANCE: Final[float] = 1e-13
    NEWTON_MAX_ITERATIONS: Final[int] = 100
    BISECTION_MAX_ITERATIONS: Final[int] = 200
    INTERIOR_FLOOR: Final[float] = 1e-300
    RATIO_TOLERANCE: Final[float] = 1e-14
    MONOTONICITY_SAMPLES: Final[int] = 5
    CONSTRAINT_TOLERANCE: Final[float] = 1e-8


class EckhausConfig:
    """Eckhaus-stable window for Ginzburg-Landau roll wavenumbers."""

    BOUND: Final[float] = 1.0 / math.sqrt(3.0)
    CLAMP_MARGIN: Final[float] = 1e-6
    ZERO_WAVENUMBER: Final[float] = 1e-8

    # Fig. 6 pair, caption ordering (eta_minus, eta_plus)
    CAPTION_PAIR: Final[tuple[float, float]] = (0.45, 0.3)


class SimulationDefaults:
    """Defaults for the time-dependent simulators."""

    CFL_FRACTION: Final[float] = 0.9
    DT_FLOOR: Final[float] = 1e-12
    REACTION_SUBSTEP_LIMIT: Final[float] = 0.5
    ZERO_MATCH_JUMP_CELLS: Final[float] = 2.0
    CLAMP_BUDGET: Final[float] = 1e-10
    RESERVOIR_FACTOR: Final[float] = 4.0
    TIME_TOLERANCE: Final[float] = 1e-12
    GL_TIME_STEP: Final[float] = 0.05
    AMPLITUDE_FLOOR: Final[float] = 1e-12


class PlotConfig:
    """Configuration constants for line charts."""

    DEFAULT_WIDTH: Final[int] = 800
    DEFAULT_HEIGHT: Final[int] = 500

    MARGIN_TOP: Final[int] = 40
    MARGIN_BOTTOM: Final[int] = 50
    MARGIN_LEFT: Final[int] = 70
    MARGIN_RIGHT: Final[int] = 140

    FONT_SIZE: Final[int] = 12
    STROKE_WIDTH: Final[float] = 1.5
    TICK_COUNT: Final[int] = 5
    LEGEND_ROW_HEIGHT: Final[int] = 18
    AXIS_COLOR: Final[str] = "#333333"

    PALETTE: Final[tuple[str, ...]] = (
        "#1f77b4",
        "#ff7f0e",
        "#2ca02c",
        "#d62728",
        "#9467bd",
        "#8c564b",
        "#e377c2",
        "#7f7f7f",
    )

    TITLE_X_POSITION: Final[float] = 0.5
    TITLE_X_ANCHOR: Final[str] = "center"


class CsvConfig:
    """Formatting of curve files."""

    FLOAT_FORMAT: Final[str] = "{:.17g}"
    LINE_TERMINATOR: Final[str] = "\n"


class DefaultValues:
    """Default values for CLI and configuration."""

    OUTPUT_DIR: Final[str] = "simprof_output"
    OUTPUT_DIR_ENVVAR: Final[str] = "SIMPROF_OUTPUT_DIR"
    FORMAT: Final[str] = "all"
    PROFILE_STEM: Final[str] = "profile"
    FLUXES_STEM: Final[str] = "fluxes"
    CONVERGENCE_STEM: Final[str] = "convergence"
    LEDGER_STEM: Final[str] = "ledger"
    REPORT_FILENAME: Final[str] = "report.json"
    TRAJECTORY_FILENAME: Final[str] = "trajectory.csv"
    ZEROS_FILENAME: Final[str] = "zeros.csv"
    WIDTH: Final[int] = PlotConfig.DEFAULT_WIDTH
    HEIGHT: Final[int] = PlotConfig.DEFAULT_HEIGHT
