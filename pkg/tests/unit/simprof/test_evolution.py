"""Unit tests for evolution module."""

import math

import numpy as np
import pytest

from simprof.evolution import (
    amplitude_defect,
    conserved_quantities,
    locate_zeros,
    roll_field,
    run_gl,
    run_pme,
    run_rds,
    run_turbulence,
    scaled_convergence,
    self_similar_gl_field,
)
from simprof.exceptions import CFLViolationError, DomainError, PreconditionError, ScaledWindowError
from simprof.models import BoundaryCondition, Field1D, PhaseProfile, SystemKind, TimeStepPolicy
from simprof.profile_bvp import BarenblattProfile, TurbulenceParams, make_grid, turbulence_exact
from simprof.reaction_network import DiffusionMatrix, three_species_binary, two_species


@pytest.fixture
def barenblatt_field() -> Field1D:
    """Barenblatt data for m = 2 on [-8, 8] with zero-flux ends."""
    x = np.linspace(-8.0, 8.0, 401)
    return Field1D(x, BarenblattProfile(2.0, 1.0)(x))


class TestRunPME:
    """Test the porous medium simulator."""

    def test_mass_conservation(self, barenblatt_field: Field1D) -> None:
        """Test zero-flux ends conserve the trapezoidal mass."""
        trajectory = run_pme(2.0, barenblatt_field, TimeStepPolicy.uniform(1.0, 4))
        ledger = conserved_quantities(trajectory)

        assert trajectory.system is SystemKind.PME
        assert len(trajectory.snapshots) == 5
        assert ledger.relative_drift("mass") < 1e-10
        assert trajectory.clamped_mass == 0.0

    def test_self_similar_convergence(self, barenblatt_field: Field1D) -> None:
        """Test Barenblatt data stays close to the scaled Barenblatt profile."""
        profile = BarenblattProfile(2.0, 1.0)
        trajectory = run_pme(2.0, barenblatt_field, TimeStepPolicy.uniform(1.0, 4))
        curve = scaled_convergence(trajectory, profile.to_profile(make_grid(3.0, 121)), profile.alpha, profile.beta)

        assert curve.errors[0] < 1e-3
        assert np.max(curve.errors) < 0.05

    def test_window_exceeds_domain(self, barenblatt_field: Field1D) -> None:
        """Test a reference window that outgrows the domain raises ScaledWindowError."""
        profile = BarenblattProfile(2.0, 1.0)
        trajectory = run_pme(2.0, barenblatt_field, TimeStepPolicy.uniform(1.0, 2))

        with pytest.raises(ScaledWindowError, match="maximal usable t"):
            scaled_convergence(trajectory, profile.to_profile(make_grid(7.5, 151)), profile.alpha, profile.beta)

    def test_dirichlet_inflow(self) -> None:
        """Test mass entering through a reservoir is recorded as inflow."""
        x = np.linspace(-5.0, 5.0, 201)
        initial = Field1D(x, np.where(x < 0, 1.0, 0.0), boundary=BoundaryCondition.dirichlet(1.0, 0.0))
        trajectory = run_pme(2.0, initial, TimeStepPolicy.uniform(0.5, 2))
        mass = conserved_quantities(trajectory).quantities["mass"]

        assert trajectory.boundary_inflow[-1, 0] == pytest.approx(mass[-1] - mass[0], abs=1e-2)

    def test_invalid_data(self, barenblatt_field: Field1D) -> None:
        """Test negative data and small exponents are rejected."""
        negative = Field1D(barenblatt_field.x, -np.ones(401))
        with pytest.raises(DomainError, match="nonnegative"):
            run_pme(2.0, negative, TimeStepPolicy.uniform(1.0, 1))
        with pytest.raises(DomainError, match="at least 1"):
            run_pme(0.5, barenblatt_field, TimeStepPolicy.uniform(1.0, 1))

    def test_cfl_floor(self, barenblatt_field: Field1D) -> None:
        """Test a stable step below the floor raises CFLViolationError."""
        with pytest.raises(CFLViolationError, match="below floor"):
            run_pme(2.0, barenblatt_field, TimeStepPolicy((0.0, 1.0), dt_floor=1.0))

    def test_snapshot_before_start(self, barenblatt_field: Field1D) -> None:
        """Test snapshots earlier than the initial time are rejected."""
        later = Field1D(barenblatt_field.x, barenblatt_field.values, t=2.0)
        with pytest.raises(DomainError, match="precedes the initial time"):
            run_pme(2.0, later, TimeStepPolicy((1.0, 3.0)))


class TestRunRDS:
    """Test the reaction-diffusion simulator."""

    def test_conserved_quantities(self) -> None:
        """Test u = Q c is conserved with zero-flux ends."""
        network = three_species_binary()
        x = np.linspace(-5.0, 5.0, 201)
        left = np.tile([2.0 / 3.0, 2.0 / 3.0, 4.0 / 9.0], (201, 1))
        right = np.tile([1.0, 0.5, 0.5], (201, 1))
        initial = Field1D(x, np.where((x < 0)[:, None], left, right))
        policy = TimeStepPolicy.uniform(1.0, 4, dt=0.01)
        trajectory = run_rds(network, DiffusionMatrix((1.0, 2.0, 0.5)), initial, policy)
        ledger = conserved_quantities(trajectory)

        assert trajectory.labels == ("c1", "c2", "c3")
        assert ledger.relative_drift("u1") < 1e-9
        assert ledger.relative_drift("u2") < 1e-9
        assert trajectory.diagnostics["equilibrium_defect"].shape == (5,)

    def test_fast_reactions_stay_near_equilibrium(self) -> None:
        """Test kappa = 100 leaves a ten times smaller equilibrium defect at t = 1 than kappa = 1."""
        x = np.linspace(-10.0, 10.0, 201)
        initial = Field1D(x, np.column_stack([1.0 + 0.5 * np.tanh(x), np.full(201, 0.5)]))
        policy = TimeStepPolicy((0.0, 1.0), dt=0.01)
        defects: list[float] = []
        for kappa in (1.0, 100.0):
            trajectory = run_rds(two_species(1.0, 2.0, kappa), DiffusionMatrix((1.0, 1.0)), initial, policy)
            defects.append(float(trajectory.diagnostics["equilibrium_defect"][-1]))

        assert defects[0] > 10.0 * defects[1]

    def test_reservoirs_must_be_equilibria(self) -> None:
        """Test Dirichlet ends off the equilibrium manifold are rejected."""
        x = np.linspace(-1.0, 1.0, 21)
        boundary = BoundaryCondition.dirichlet([1.0, 2.0], [1.0, 1.0])
        initial = Field1D(x, np.ones((21, 2)), boundary=boundary)

        with pytest.raises(PreconditionError, match="reservoir values in reaction equilibrium"):
            run_rds(two_species(1.0, 1.0), DiffusionMatrix((1.0, 1.0)), initial, TimeStepPolicy.uniform(1.0, 1))

    def test_species_mismatch(self) -> None:
        """Test the field must carry one column per species."""
        x = np.linspace(-1.0, 1.0, 21)
        initial = Field1D(x, np.ones((21, 2)))

        with pytest.raises(DomainError, match="expected 3 species"):
            run_rds(three_species_binary(), DiffusionMatrix((1.0, 1.0, 1.0)), initial, TimeStepPolicy.uniform(1.0, 1))


class TestRunTurbulence:
    """Test the turbulence simulator."""

    def test_momentum_conservation(self) -> None:
        """Test zero-flux ends conserve momentum."""
        x = np.linspace(-6.0, 6.0, 241)
        values = np.column_stack([np.exp(-(x**2)), np.maximum(1.0 - x**2 / 4.0, 0.0)])
        trajectory = run_turbulence(TurbulenceParams(), Field1D(x, values), TimeStepPolicy.uniform(1.0, 4))
        ledger = conserved_quantities(trajectory)

        assert trajectory.labels == ("v", "k")
        assert ledger.relative_drift("momentum") < 1e-10
        assert set(ledger.quantities) == {"momentum", "energy", "kinetic", "turbulent"}

    def test_exact_data_follows_similarity_scaling(self) -> None:
        """Test v(t, x) stays close to V(x/sqrt(1+t)) when started from the exact solution."""
        exact = turbulence_exact(1.0)
        x = np.linspace(-6.0, 6.0, 601)
        values = np.column_stack([exact.velocity(x), exact.turbulent_energy(x)])
        initial = Field1D(x, values, boundary=BoundaryCondition.dirichlet(values[0], values[-1]))
        trajectory = run_turbulence(TurbulenceParams(), initial, TimeStepPolicy.uniform(1.0, 2))

        for snap in trajectory.snapshots:
            expected = exact.velocity(x / math.sqrt(1.0 + snap.t))
            assert np.max(np.abs(snap.values[:, 0] - expected)) < 2e-2

    @pytest.mark.parametrize(
        ("params", "values", "message"),
        [
            (TurbulenceParams(dimension=2), np.ones((21, 2)), "one-dimensional"),
            (TurbulenceParams(), np.ones((21, 1)), "components \\(v, k\\)"),
            (TurbulenceParams(), np.column_stack([np.ones(21), -np.ones(21)]), "nonnegative"),
        ],
    )
    def test_invalid(self, params: TurbulenceParams, values: np.ndarray, message: str) -> None:
        """Test invalid dimensions and fields are rejected."""
        x = np.linspace(-1.0, 1.0, 21)
        with pytest.raises(DomainError, match=message):
            run_turbulence(params, Field1D(x, values), TimeStepPolicy.uniform(1.0, 1))


class TestGinzburgLandau:
    """Test the Ginzburg-Landau simulator and zero tracking."""

    def test_locate_zeros(self) -> None:
        """Test zeros of a sampled sine."""
        x = np.linspace(0.5, 10.0, 2001)
        np.testing.assert_allclose(locate_zeros(x, np.sin(x)), [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-5)

    def test_pure_roll_is_steady(self) -> None:
        """Test a pure roll keeps its amplitude and stationary zeros."""
        initial = roll_field(np.linspace(-10.0, 10.0, 401), 0.3)
        trajectory = run_gl(initial, TimeStepPolicy.uniform(2.0, 4))

        assert amplitude_defect(initial.x, initial.values) < 1e-2
        assert np.max(trajectory.diagnostics["amplitude_defect"]) < 1e-2
        assert np.all(trajectory.diagnostics["zero_count"] == trajectory.diagnostics["zero_count"][0])
        for track in trajectory.zero_tracks:
            assert not track.terminated
            assert abs(track.positions[-1] - track.positions[0]) < 1e-2

    def test_self_similar_field_of_constant_wavenumber(self) -> None:
        """Test a constant phase profile gives the pure roll at every time."""
        grid = make_grid(5.0, 101)
        eta = np.full(101, 0.3)
        phase = PhaseProfile(grid, 0.3 * grid.nodes, [-1.5], [1.5], wavenumber=eta)
        x = np.linspace(-12.0, 12.0, 97)

        for t in (0.0, 3.0):
            field = self_similar_gl_field(phase, x, t)
            np.testing.assert_allclose(field.values, roll_field(x, 0.3).values, atol=1e-12)
            assert field.t == t

    def test_norm_ledger(self) -> None:
        """Test the ledger of a complex field records its L2 norm."""
        initial = roll_field(np.linspace(-5.0, 5.0, 101), 0.2)
        trajectory = run_gl(initial, TimeStepPolicy.uniform(0.2, 1))

        assert "norm" in conserved_quantities(trajectory).quantities

    def test_invalid_field(self) -> None:
        """Test a real field is rejected."""
        x = np.linspace(-1.0, 1.0, 21)
        with pytest.raises(DomainError, match="components \\(re, im\\)"):
            run_gl(Field1D(x, np.ones(21)), TimeStepPolicy.uniform(1.0, 1))
