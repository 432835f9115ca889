"""Unit tests for models module."""

import numpy as np
import pytest

from simprof.exceptions import DomainError, SolverError
from simprof.models import (
    BoundaryCondition,
    BoundaryKind,
    ConservationLedger,
    ConvergenceCurve,
    CurveSet,
    Field1D,
    Grid,
    OutputFormat,
    PhaseProfile,
    Profile,
    RunReport,
    SolveOptions,
    SystemKind,
    TimeStepPolicy,
    Trajectory,
    ZeroTrack,
)


class TestOutputFormat:
    """Test OutputFormat enum."""

    def test_supported_formats(self) -> None:
        """Test the list of supported format strings."""
        assert OutputFormat.get_supported_formats() == ["csv", "json", "svg", "html", "all"]

    def test_expand_all(self) -> None:
        """Test ALL expands to every concrete format."""
        assert OutputFormat.ALL.expand() == [
            OutputFormat.CSV,
            OutputFormat.JSON,
            OutputFormat.SVG,
            OutputFormat.HTML,
        ]

    def test_expand_single(self) -> None:
        """Test a concrete format expands to itself."""
        assert OutputFormat.SVG.expand() == [OutputFormat.SVG]


class TestGrid:
    """Test Grid dataclass."""

    def test_nodes_and_spacing(self) -> None:
        """Test nodes are uniform and symmetric with 0 as the centre node."""
        grid = Grid(1.0, 5)

        np.testing.assert_allclose(grid.nodes, [-1.0, -0.5, 0.0, 0.5, 1.0])
        assert grid.spacing == 0.5
        assert grid.center_index == 2
        assert grid.nodes[grid.center_index] == 0.0

    def test_nodes_read_only(self) -> None:
        """Test the node array cannot be modified."""
        grid = Grid(2.0, 11)
        with pytest.raises(ValueError):
            grid.nodes[0] = 5.0

    @pytest.mark.parametrize(
        ("half_width", "nodes", "message"),
        [
            (0.0, 11, "half-width must be positive"),
            (-1.0, 11, "half-width must be positive"),
            (1.0, 1, "need at least 3 nodes"),
            (1.0, 10, "node count must be odd"),
        ],
    )
    def test_invalid(self, half_width: float, nodes: int, message: str) -> None:
        """Test invalid grids are rejected."""
        with pytest.raises(DomainError, match=message):
            Grid(half_width, nodes)


class TestSolveOptions:
    """Test SolveOptions validation."""

    def test_defaults(self) -> None:
        """Test default options."""
        options = SolveOptions()

        assert options.tol == 1e-10
        assert options.damping
        assert options.continuation_steps == 1

    @pytest.mark.parametrize(
        ("kwargs", "message"),
        [
            ({"tol": 0.0}, "tol must be positive"),
            ({"max_iter": 0}, "max_iter must be at least 1"),
            ({"continuation_steps": 0}, "continuation_steps must be at least 1"),
        ],
    )
    def test_invalid(self, kwargs: dict[str, float], message: str) -> None:
        """Test invalid options are rejected."""
        with pytest.raises(ValueError, match=message):
            SolveOptions(**kwargs)  # type: ignore[arg-type]


class TestProfile:
    """Test Profile and PhaseProfile."""

    def test_column_promotion_and_labels(self) -> None:
        """Test a 1-D value array becomes one column with a default label."""
        grid = Grid(1.0, 5)
        profile = Profile(grid, np.linspace(0, 1, 5), 0.0, 1.0)

        assert profile.values.shape == (5, 1)
        assert profile.components == 1
        assert profile.labels == ("U1",)
        np.testing.assert_allclose(profile.left_limit, [0.0])
        np.testing.assert_allclose(profile.component(0), np.linspace(0, 1, 5))

    def test_row_mismatch(self) -> None:
        """Test the row count must match the grid."""
        with pytest.raises(ValueError, match="profile has 4 rows but grid has 5 nodes"):
            Profile(Grid(1.0, 5), np.zeros((4, 2)), [0, 0], [1, 1])

    def test_phase_profile_needs_wavenumber(self) -> None:
        """Test a phase profile without wavenumbers is rejected."""
        grid = Grid(1.0, 5)
        with pytest.raises(ValueError, match="needs the wavenumber profile"):
            PhaseProfile(grid, np.zeros(5), 0.0, 0.0)

        phase = PhaseProfile(grid, np.zeros(5), 0.0, 0.0, wavenumber=np.full(5, 0.3))
        assert phase.wavenumber is not None
        assert phase.wavenumber.shape == (5,)


class TestBoundaryAndField:
    """Test BoundaryCondition and Field1D."""

    def test_dirichlet(self) -> None:
        """Test Dirichlet data is stored as arrays."""
        bc = BoundaryCondition.dirichlet(1.0, [2.0, 3.0])

        assert bc.kind is BoundaryKind.DIRICHLET
        np.testing.assert_allclose(bc.left, [1.0])
        np.testing.assert_allclose(bc.right, [2.0, 3.0])

    def test_dirichlet_requires_values(self) -> None:
        """Test Dirichlet boundaries need both ends."""
        with pytest.raises(ValueError, match="needs left and right values"):
            BoundaryCondition(BoundaryKind.DIRICHLET, left=np.ones(1))

    def test_field_defaults(self) -> None:
        """Test a field defaults to zero-flux ends."""
        x = np.linspace(-1, 1, 5)
        state = Field1D(x, np.ones(5))

        assert state.boundary.kind is BoundaryKind.NEUMANN_ZERO
        assert state.spacing == pytest.approx(0.5)
        assert state.half_width == pytest.approx(1.0)
        assert state.components == 1

    def test_field_rejects_unsorted_nodes(self) -> None:
        """Test nodes must increase."""
        with pytest.raises(ValueError, match="strictly increasing"):
            Field1D(np.array([0.0, 2.0, 1.0]), np.zeros(3))


class TestTimeStepPolicy:
    """Test TimeStepPolicy."""

    def test_uniform(self) -> None:
        """Test uniform snapshot times."""
        policy = TimeStepPolicy.uniform(2.0, 4, dt=0.01)

        assert policy.snapshot_times == (0.0, 0.5, 1.0, 1.5, 2.0)
        assert policy.final_time == 2.0
        assert policy.dt == 0.01

    @pytest.mark.parametrize(
        ("kwargs", "message"),
        [
            ({"snapshot_times": ()}, "must not be empty"),
            ({"snapshot_times": (0.0, 1.0, 1.0)}, "strictly increasing"),
            ({"snapshot_times": (-1.0, 1.0)}, "nonnegative"),
            ({"snapshot_times": (0.0, 1.0), "dt": -0.1}, "dt must be positive"),
            ({"snapshot_times": (0.0, 1.0), "cfl_fraction": 1.5}, "cfl_fraction"),
        ],
    )
    def test_invalid(self, kwargs: dict[str, object], message: str) -> None:
        """Test invalid policies are rejected."""
        with pytest.raises(ValueError, match=message):
            TimeStepPolicy(**kwargs)  # type: ignore[arg-type]


class TestZeroTrackAndTrajectory:
    """Test ZeroTrack and Trajectory."""

    def test_speeds(self) -> None:
        """Test finite-difference speeds of a uniformly moving zero."""
        track = ZeroTrack()
        for t in (0.0, 1.0, 2.0, 3.0):
            track.append(t, 5.0 - 0.5 * t)

        np.testing.assert_allclose(track.speeds(), -0.5)
        assert track.speed_at(2.2) == pytest.approx(-0.5)

    def test_single_point_speed(self) -> None:
        """Test a one-point track has zero speed."""
        track = ZeroTrack([1.0], [2.0])
        np.testing.assert_allclose(track.speeds(), [0.0])

    def test_trajectory_snapshot_lookup(self) -> None:
        """Test the closest snapshot is returned."""
        x = np.linspace(-1, 1, 5)
        snaps = tuple(Field1D(x, np.full(5, t), t=t) for t in (0.0, 1.0, 2.0))
        trajectory = Trajectory(SystemKind.PME, snaps, np.zeros(3))

        np.testing.assert_allclose(trajectory.times, [0.0, 1.0, 2.0])
        assert trajectory.snapshot_at(1.4).t == 1.0
        assert trajectory.boundary_inflow.shape == (3, 1)

    def test_trajectory_rejects_unordered(self) -> None:
        """Test snapshots must be ordered in time."""
        x = np.linspace(-1, 1, 5)
        snaps = (Field1D(x, np.zeros(5), t=1.0), Field1D(x, np.zeros(5), t=0.5))
        with pytest.raises(ValueError, match="strictly increasing"):
            Trajectory(SystemKind.RDS, snaps, np.zeros(2))


class TestLedgerAndCurves:
    """Test ledgers, convergence curves and curve sets."""

    def test_relative_drift(self) -> None:
        """Test drift is relative to max(1, |initial|)."""
        ledger = ConservationLedger(
            np.array([0.0, 1.0, 2.0]),
            {"mass": np.array([10.0, 10.5, 9.0]), "small": np.array([0.1, 0.2, 0.1])},
        )

        assert ledger.relative_drift("mass") == pytest.approx(0.1)
        assert ledger.relative_drift("small") == pytest.approx(0.1)

    def test_convergence_is_decreasing(self) -> None:
        """Test monotone decrease from a start index."""
        curve = ConvergenceCurve(np.arange(4.0), np.array([0.0, 0.5, 0.3, 0.1]), 0.5, 0.5)

        assert not curve.is_decreasing()
        assert curve.is_decreasing(start=1)

    def test_curve_set(self) -> None:
        """Test column names keep their order."""
        curves = CurveSet("y", [0.0, 1.0], {"b": [1.0, 2.0], "a": [3.0, 4.0]})

        assert curves.names == ["b", "a"]

    def test_curve_set_validation(self) -> None:
        """Test empty and mismatched curve sets are rejected."""
        with pytest.raises(ValueError, match="at least one column"):
            CurveSet("y", [0.0], {})
        with pytest.raises(ValueError, match="column 'a' has length 1 but abscissa has 2"):
            CurveSet("y", [0.0, 1.0], {"a": [1.0]})


class TestRunReport:
    """Test RunReport."""

    def test_fail_keeps_history(self) -> None:
        """Test a solver failure records status, error and residual history."""
        report = RunReport(config={"problem": "rds_profile"})
        report.fail(SolverError("Newton did not converge", [1.0, 0.1]))

        data = report.to_dict()
        assert data["status"] == "failed"
        assert data["residual_history"] == [1.0, 0.1]
        assert "Newton did not converge" in data["error"]

    def test_default_dict(self) -> None:
        """Test a fresh report serializes with status ok."""
        data = RunReport(config={}).to_dict()

        assert data["status"] == "ok"
        assert data["artifacts"] == []
        assert data["error"] is None
