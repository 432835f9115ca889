"""Immutable data types shared by the solvers, simulators and writers."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Optional

import numpy as np
from numpy.typing import NDArray

from simprof.constants import GridDefaults, SimulationDefaults, SolverDefaults
from simprof.exceptions import DomainError

FloatArray = NDArray[np.float64]


def _frozen_array(values: Any, *, ndim: Optional[int] = None) -> FloatArray:
    """Copy values into a read-only float array, optionally promoting 1-D input to a column."""
    array = np.array(values, dtype=float)
    if ndim == 2 and array.ndim == 1:
        array = array[:, np.newaxis]
    array.setflags(write=False)
    return array


class OutputFormat(Enum):
    """Supported output formats for curves and reports."""

    CSV = "csv"
    JSON = "json"
    SVG = "svg"
    HTML = "html"
    ALL = "all"

    @classmethod
    def get_supported_formats(cls) -> list[str]:
        """Get list of supported format strings."""
        return [fmt.value for fmt in cls]

    def expand(self) -> list[OutputFormat]:
        """Concrete formats this selection stands for."""
        if self is OutputFormat.ALL:
            return [OutputFormat.CSV, OutputFormat.JSON, OutputFormat.SVG, OutputFormat.HTML]
        return [self]


class SystemKind(Enum):
    """Time-dependent systems handled by the simulators."""

    PME = "pme"
    RDS = "rds"
    TURBULENCE = "turbulence"
    GINZBURG_LANDAU = "ginzburg_landau"


class BoundaryKind(Enum):
    """Boundary condition tags for one-dimensional fields."""

    DIRICHLET = "dirichlet"
    NEUMANN_ZERO = "neumann_zero"


class GLOrdering(Enum):
    """Orderings of the mixed-wavenumber pair for Ginzburg-Landau runs."""

    CAPTION = "caption"
    TEXT = "text"


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-L, L] with an odd node count so that y = 0 is a node."""

    half_width: float
    nodes_count: int

    def __post_init__(self) -> None:
        """Validate grid parameters."""
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise DomainError("L", self.half_width, "half-width must be positive")
        if self.nodes_count < GridDefaults.MIN_NODES:
            raise DomainError("n", self.nodes_count, f"need at least {GridDefaults.MIN_NODES} nodes")
        if self.nodes_count % 2 == 0:
            raise DomainError("n", self.nodes_count, "node count must be odd so that y=0 is a node")

    @property
    def spacing(self) -> float:
        """Uniform spacing h = 2L/(n-1)."""
        return 2.0 * self.half_width / (self.nodes_count - 1)

    @cached_property
    def nodes(self) -> FloatArray:
        """Grid nodes y_i = -L + i*h."""
        y = -self.half_width + self.spacing * np.arange(self.nodes_count, dtype=float)
        y[0] = -self.half_width
        y[-1] = self.half_width
        y[(self.nodes_count - 1) // 2] = 0.0
        y.setflags(write=False)
        return y

    @property
    def center_index(self) -> int:
        """Index of the node y = 0."""
        return (self.nodes_count - 1) // 2


@dataclass(frozen=True)
class SolveOptions:
    """Options for the damped Newton profile solver."""

    tol: float = SolverDefaults.TOLERANCE
    max_iter: int = SolverDefaults.MAX_ITERATIONS
    damping: bool = True
    continuation_steps: int = SolverDefaults.CONTINUATION_STEPS
    max_halvings: int = SolverDefaults.MAX_HALVINGS
    projection_cap: int = SolverDefaults.PROJECTION_CAP
    escalate: bool = True

    def __post_init__(self) -> None:
        """Validate solver options."""
        if self.tol <= 0:
            msg = "tol must be positive"
            raise ValueError(msg)
        if self.max_iter < 1:
            msg = "max_iter must be at least 1"
            raise ValueError(msg)
        if self.continuation_steps < 1:
            msg = "continuation_steps must be at least 1"
            raise ValueError(msg)


@dataclass(frozen=True)
class Profile:
    """Similarity profile on a grid with its boundary limits and solve diagnostics."""

    grid: Grid
    values: FloatArray
    left_limit: FloatArray
    right_limit: FloatArray
    residual_norm: float = 0.0
    newton_iterations: int = 0
    projection_count: int = 0
    continuation_steps: int = 1
    residual_history: tuple[float, ...] = ()
    labels: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()
    solved: bool = True

    def __post_init__(self) -> None:
        """Freeze arrays and check shapes."""
        values = _frozen_array(self.values, ndim=2)
        if values.shape[0] != self.grid.nodes_count:
            msg = f"profile has {values.shape[0]} rows but grid has {self.grid.nodes_count} nodes"
            raise ValueError(msg)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "left_limit", _frozen_array(np.atleast_1d(self.left_limit)))
        object.__setattr__(self, "right_limit", _frozen_array(np.atleast_1d(self.right_limit)))
        if not self.labels:
            labels = tuple(f"U{k + 1}" for k in range(values.shape[1]))
            object.__setattr__(self, "labels", labels)

    @property
    def y(self) -> FloatArray:
        """Grid nodes."""
        return self.grid.nodes

    @property
    def components(self) -> int:
        """Number of components m."""
        return int(self.values.shape[1])

    def component(self, index: int) -> FloatArray:
        """Values of one component."""
        return self.values[:, index]


@dataclass(frozen=True)
class PhaseProfile(Profile):
    """Reconstructed phase profile psi with the wavenumber profile it integrates."""

    wavenumber: Optional[FloatArray] = None
    anchor_discrepancy: float = 0.0

    def __post_init__(self) -> None:
        """Freeze the wavenumber column."""
        super().__post_init__()
        if self.wavenumber is None:
            msg = "phase profile needs the wavenumber profile"
            raise ValueError(msg)
        object.__setattr__(self, "wavenumber", _frozen_array(self.wavenumber))


@dataclass(frozen=True)
class MonotonicityCertificate:
    """Sampled lower bound of the symmetric part of a flux Jacobian."""

    a_lo: float
    witness: FloatArray
    samples_per_axis: int
    box_lower: FloatArray
    box_upper: FloatArray

    @property
    def certified(self) -> bool:
        """Whether the sampled bound certifies monotonicity."""
        return self.a_lo > 0


@dataclass(frozen=True)
class FluxSet:
    """Diffusive fluxes and reaction multipliers extracted from a concentration profile."""

    grid: Grid
    diffusive: FloatArray
    raw_multiplier: FloatArray
    multipliers: FloatArray
    stoichiometric_residual: float
    decomposition_residual: float
    constraint_violation: float = 0.0
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        """Freeze arrays."""
        object.__setattr__(self, "diffusive", _frozen_array(self.diffusive, ndim=2))
        object.__setattr__(self, "raw_multiplier", _frozen_array(self.raw_multiplier, ndim=2))
        object.__setattr__(self, "multipliers", _frozen_array(self.multipliers, ndim=2))


@dataclass(frozen=True)
class TurbulenceFluxSet:
    """Momentum flux, turbulent energy flux and turbulent energy source."""

    y: FloatArray
    momentum_flux: FloatArray
    kinetic_flux: FloatArray
    source: FloatArray


@dataclass(frozen=True)
class InfiltrationReport:
    """Flux through y=0 of an infiltration profile and the predicted mass law."""

    q0: float
    mass0: float
    exponent: float

    def mass_law(self, t: Any) -> Any:
        """Predicted mass M(t) = M(0) * (1+t)^(1/2) on the positive half line."""
        return self.mass0 * np.sqrt(1.0 + np.asarray(t, dtype=float))


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary condition of a one-dimensional field."""

    kind: BoundaryKind = BoundaryKind.NEUMANN_ZERO
    left: Optional[FloatArray] = None
    right: Optional[FloatArray] = None

    def __post_init__(self) -> None:
        """Check that Dirichlet data is present."""
        if self.kind is BoundaryKind.DIRICHLET:
            if self.left is None or self.right is None:
                msg = "dirichlet boundary needs left and right values"
                raise ValueError(msg)
            object.__setattr__(self, "left", _frozen_array(np.atleast_1d(self.left)))
            object.__setattr__(self, "right", _frozen_array(np.atleast_1d(self.right)))

    @classmethod
    def dirichlet(cls, left: Any, right: Any) -> BoundaryCondition:
        """Reservoir values imposed at both ends."""
        return cls(BoundaryKind.DIRICHLET, np.atleast_1d(left), np.atleast_1d(right))

    @classmethod
    def neumann_zero(cls) -> BoundaryCondition:
        """Zero-flux ends."""
        return cls(BoundaryKind.NEUMANN_ZERO)


@dataclass(frozen=True)
class Field1D:
    """State of a one-dimensional multi-component field at time t."""

    x: FloatArray
    values: FloatArray
    t: float = 0.0
    boundary: BoundaryCondition = field(default_factory=BoundaryCondition.neumann_zero)

    def __post_init__(self) -> None:
        """Freeze arrays and check shapes."""
        x = _frozen_array(self.x)
        values = _frozen_array(self.values, ndim=2)
        if values.shape[0] != x.shape[0]:
            msg = f"field has {values.shape[0]} rows but {x.shape[0]} nodes"
            raise ValueError(msg)
        if x.shape[0] < GridDefaults.MIN_NODES or np.any(np.diff(x) <= 0):
            msg = "spatial nodes must be strictly increasing with at least 3 nodes"
            raise ValueError(msg)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", values)

    @property
    def spacing(self) -> float:
        """Uniform node spacing."""
        return float(self.x[1] - self.x[0])

    @property
    def half_width(self) -> float:
        """Half-width X of the domain [-X, X]."""
        return float(max(-self.x[0], self.x[-1]))

    @property
    def components(self) -> int:
        """Number of components."""
        return int(self.values.shape[1])


@dataclass(frozen=True)
class TimeStepPolicy:
    """Time stepping and snapshot policy for the simulators."""

    snapshot_times: tuple[float, ...]
    dt: Optional[float] = None
    cfl_fraction: float = SimulationDefaults.CFL_FRACTION
    dt_floor: float = SimulationDefaults.DT_FLOOR
    dt_max: Optional[float] = None

    def __post_init__(self) -> None:
        """Validate the policy."""
        times = tuple(float(t) for t in self.snapshot_times)
        if not times:
            msg = "snapshot_times must not be empty"
            raise ValueError(msg)
        if any(b <= a for a, b in zip(times, times[1:])):
            msg = "snapshot_times must be strictly increasing"
            raise ValueError(msg)
        if times[0] < 0:
            msg = "snapshot_times must be nonnegative"
            raise ValueError(msg)
        if self.dt is not None and self.dt <= 0:
            msg = "dt must be positive"
            raise ValueError(msg)
        if not 0 < self.cfl_fraction <= 1:
            msg = "cfl_fraction must lie in (0, 1]"
            raise ValueError(msg)
        object.__setattr__(self, "snapshot_times", times)

    @property
    def final_time(self) -> float:
        """Last snapshot time."""
        return self.snapshot_times[-1]

    @classmethod
    def uniform(cls, final_time: float, count: int, **kwargs: Any) -> TimeStepPolicy:
        """Snapshots at count+1 equally spaced times in [0, final_time]."""
        times = tuple(float(t) for t in np.linspace(0.0, final_time, count + 1))
        return cls(times, **kwargs)


@dataclass
class ZeroTrack:
    """Positions of one zero of Re A followed across snapshots."""

    times: list[float] = field(default_factory=list)
    positions: list[float] = field(default_factory=list)
    terminated: bool = False
    flag: str = ""

    def append(self, t: float, position: float) -> None:
        """Extend the track by one matched position."""
        self.times.append(t)
        self.positions.append(position)

    def speeds(self) -> FloatArray:
        """Finite-difference speeds at the tracked times."""
        if len(self.times) < 2:
            return np.zeros(len(self.times))
        return np.gradient(np.asarray(self.positions), np.asarray(self.times))

    def speed_at(self, t: float) -> float:
        """Speed at the tracked time closest to t."""
        index = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return float(self.speeds()[index])


@dataclass(frozen=True)
class Trajectory:
    """Snapshots of a time-dependent run with its ledgers and diagnostics."""

    system: SystemKind
    snapshots: tuple[Field1D, ...]
    boundary_inflow: FloatArray
    clamped_mass: float = 0.0
    conservation: Optional[FloatArray] = None
    diagnostics: dict[str, FloatArray] = field(default_factory=dict)
    zero_tracks: tuple[ZeroTrack, ...] = ()
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        """Check snapshot ordering."""
        times = [snap.t for snap in self.snapshots]
        if any(b <= a for a, b in zip(times, times[1:])):
            msg = "snapshot times must be strictly increasing"
            raise ValueError(msg)
        object.__setattr__(self, "boundary_inflow", _frozen_array(self.boundary_inflow, ndim=2))

    @property
    def times(self) -> FloatArray:
        """Snapshot times."""
        return np.array([snap.t for snap in self.snapshots], dtype=float)

    def snapshot_at(self, t: float) -> Field1D:
        """Snapshot whose time is closest to t."""
        index = int(np.argmin(np.abs(self.times - t)))
        return self.snapshots[index]


@dataclass(frozen=True)
class ConservationLedger:
    """Trapezoidal integrals of conserved quantities per snapshot."""

    times: FloatArray
    quantities: dict[str, FloatArray]

    def relative_drift(self, name: str) -> float:
        """Max deviation from the initial value relative to max(1, |initial|)."""
        series = self.quantities[name]
        scale = max(1.0, abs(float(series[0])))
        return float(np.max(np.abs(series - series[0])) / scale)


@dataclass(frozen=True)
class ConvergenceCurve:
    """Scaled-variable distance to a reference profile per snapshot time."""

    times: FloatArray
    errors: FloatArray
    alpha: float
    beta: float

    def is_decreasing(self, start: int = 0) -> bool:
        """Whether the errors decrease strictly from snapshot `start` on."""
        return bool(np.all(np.diff(self.errors[start:]) < 0))


@dataclass(frozen=True)
class CurveSet:
    """Named columns sharing one abscissa, the unit handed to the writers."""

    x_label: str
    x: FloatArray
    columns: dict[str, FloatArray]
    title: str = ""

    def __post_init__(self) -> None:
        """Validate column lengths."""
        if not self.columns:
            msg = "curve set must contain at least one column"
            raise ValueError(msg)
        x = _frozen_array(self.x)
        columns = {}
        for name, column in self.columns.items():
            values = _frozen_array(column)
            if values.shape != x.shape:
                msg = f"column '{name}' has length {values.shape[0]} but abscissa has {x.shape[0]}"
                raise ValueError(msg)
            columns[name] = values
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "columns", columns)

    @property
    def names(self) -> list[str]:
        """Column names in order."""
        return list(self.columns)


@dataclass
class RunReport:
    """Machine-readable record of one run, emitted on success and on failure."""

    config: dict[str, Any]
    status: str = "ok"
    residual_norms: dict[str, float] = field(default_factory=dict)
    iterations: dict[str, int] = field(default_factory=dict)
    flux_summaries: dict[str, Any] = field(default_factory=dict)
    ledgers: dict[str, Any] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)
    wall_clock_seconds: float = 0.0
    artifacts: list[str] = field(default_factory=list)
    error: Optional[str] = None
    residual_history: list[float] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def fail(self, error: Exception) -> None:
        """Record a failure, keeping the residual history when the error carries one."""
        self.status = "failed"
        self.error = str(error)
        history = getattr(error, "residual_history", None)
        if history:
            self.residual_history = [float(r) for r in history]

    def to_dict(self) -> dict[str, Any]:
        """Plain dictionary for JSON serialization."""
        return {
            "status": self.status,
            "config": self.config,
            "residual_norms": self.residual_norms,
            "iterations": self.iterations,
            "flux_summaries": self.flux_summaries,
            "ledgers": self.ledgers,
            "diagnostics": self.diagnostics,
            "wall_clock_seconds": self.wall_clock_seconds,
            "artifacts": self.artifacts,
            "error": self.error,
            "residual_history": self.residual_history,
            "warnings": self.warnings,
        }
