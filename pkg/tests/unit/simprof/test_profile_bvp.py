"""Unit tests for profile_bvp module."""

import math

import numpy as np
import pytest
from scipy import integrate

from simprof.exceptions import DomainError, EckhausViolationError, PreconditionError, SolverError
from simprof.models import GLOrdering, Grid, Profile, SolveOptions
from simprof.profile_bvp import (
    BarenblattProfile,
    EckhausFlux,
    GLParams,
    LinearFlux,
    PMEParams,
    PowerFlux,
    TurbulenceParams,
    barenblatt,
    composed_concentration_profile,
    eckhaus_phi,
    eckhaus_phi_prime,
    erf_profile_E,
    erf_profile_derivative,
    gl_eta_profile,
    gl_psi_reconstruct,
    gl_psi_residual,
    initial_guess,
    make_grid,
    residual,
    solve_profile,
    turbulence_barenblatt,
    turbulence_exact,
    turbulence_exact_residuals,
    turbulence_similarity_pair,
    uniform_estimate_constant,
)
from simprof.reaction_network import DiffusionMatrix, EffectiveDiffusion, three_species_binary, two_species


class TestErrorFunctionProfile:
    """Test the error-function profile E."""

    def test_limits_and_midpoint(self) -> None:
        """Test E tends to 0 and 1 and equals 1/2 at 0."""
        assert erf_profile_E(0.0) == pytest.approx(0.5)
        assert erf_profile_E(-40.0) == pytest.approx(0.0)
        assert erf_profile_E(40.0) == pytest.approx(1.0)

    def test_solves_ode(self) -> None:
        """Test E'' + z E' = 0."""
        z = np.linspace(-5, 5, 101)

        np.testing.assert_allclose(erf_profile_derivative(z, 2) + z * erf_profile_derivative(z), 0.0, atol=1e-15)

    def test_invalid_order(self) -> None:
        """Test only first and second derivatives exist."""
        with pytest.raises(DomainError, match="order"):
            erf_profile_derivative(0.0, 3)


class TestFluxMaps:
    """Test the scalar and diagonal flux maps."""

    def test_linear_flux(self) -> None:
        """Test A(u) = D u and its constant Jacobian."""
        flux = LinearFlux([1.0, 3.0])
        u = np.ones((4, 2))

        np.testing.assert_allclose(flux.value(u)[0], [1.0, 3.0])
        assert flux.jacobian(u).shape == (4, 2, 2)
        assert flux.reference_diffusivity == 2.0

    def test_linear_flux_rejects_nonpositive(self) -> None:
        """Test nonpositive diffusivities are rejected."""
        with pytest.raises(DomainError, match="diffusivities must be positive"):
            LinearFlux([1.0, 0.0])

    def test_power_flux(self) -> None:
        """Test u^m with slope m u^(m-1)."""
        flux = PowerFlux(3.0)
        u = np.array([[0.0], [2.0]])

        np.testing.assert_allclose(flux.value(u), [[0.0], [8.0]])
        np.testing.assert_allclose(flux.jacobian(u)[:, 0, 0], [0.0, 12.0])

    def test_power_flux_rejects_small_exponent(self) -> None:
        """Test m < 1 is rejected."""
        with pytest.raises(DomainError, match="at least 1"):
            PowerFlux(0.5)

    def test_eckhaus_phi(self) -> None:
        """Test Phi is odd with Phi'(0) = 1 and Phi' vanishing at 1/sqrt(3)."""
        eta = np.array([-0.3, 0.3])

        np.testing.assert_allclose(eckhaus_phi(eta), -eckhaus_phi(eta[::-1]))
        assert eckhaus_phi_prime(0.0) == pytest.approx(1.0)
        assert eckhaus_phi_prime(1.0 / math.sqrt(3.0)) == pytest.approx(0.0, abs=1e-14)
        step = 1e-6
        numeric = (eckhaus_phi(0.2 + step) - eckhaus_phi(0.2 - step)) / (2 * step)
        assert numeric == pytest.approx(float(eckhaus_phi_prime(0.2)), rel=1e-7)

    def test_eckhaus_bounds(self) -> None:
        """Test the clamp lies just inside the Eckhaus window."""
        flux = EckhausFlux(margin=1e-3)

        assert flux.upper_bounds is not None
        assert flux.upper_bounds[0] == pytest.approx(1.0 / math.sqrt(3.0) - 1e-3)


class TestSolveProfile:
    """Test the damped Newton profile solver."""

    def test_linear_flux_matches_error_function(self) -> None:
        """Test D U'' + (y/2) U' = 0 reproduces U_- + (U_+ - U_-) E(y/sqrt(2D))."""
        grid = make_grid(10.0, 2001)
        profile = solve_profile(LinearFlux(2.0), 1.0, 3.0, grid)
        exact = 1.0 + 2.0 * erf_profile_E(grid.nodes / math.sqrt(4.0))

        np.testing.assert_allclose(profile.component(0), exact, atol=1e-4)
        assert profile.residual_norm <= 1e-7
        assert profile.values[0, 0] == 1.0
        assert profile.values[-1, 0] == 3.0

    def test_residual_is_not_grid_scaled(self) -> None:
        """Test the reported residual is the discrete operator itself, exact for quadratics."""
        grid = make_grid(2.0, 41)
        y = grid.nodes
        profile = Profile(grid, (y**2)[:, np.newaxis], [4.0], [4.0])
        values = residual(profile, LinearFlux(1.0))

        np.testing.assert_allclose(values[1:-1, 0], 2.0 + y[1:-1] ** 2, rtol=1e-10)
        assert values[0, 0] == values[-1, 0] == 0.0

    def test_initial_guess_is_exact_at_ends(self) -> None:
        """Test the initial guess matches the limits at both ends."""
        grid = make_grid(5.0, 101)
        guess = initial_guess(LinearFlux([1.0, 1.0]), [0.0, 1.0], [2.0, -1.0], grid)

        np.testing.assert_allclose(guess[0], [0.0, 1.0])
        np.testing.assert_allclose(guess[-1], [2.0, -1.0])

    @pytest.mark.parametrize(("half_width", "nodes"), [(10.0, 4001), (6.0, 1201), (20.0, 2001)])
    def test_power_flux_is_monotone_and_bounded(self, half_width: float, nodes: int) -> None:
        """Test the porous medium mixing profile converges and stays between its limits."""
        profile = solve_profile(PowerFlux(2.0), 1.0, 0.0, make_grid(half_width, nodes))
        values = profile.component(0)

        assert np.all(values >= 0.0)
        assert np.all(values <= 1.0 + 1e-12)
        assert np.all(np.diff(values) <= 1e-12)
        assert profile.residual_norm <= 1e-7
        assert np.max(np.abs(residual(profile, PowerFlux(2.0))[values > 1e-3])) <= 1e-7
        assert values[-2] <= 1e-12

    def test_degenerate_front_converges_without_continuation(self) -> None:
        """Test the u = 0 region of the porous medium flux does not stall the line search."""
        options = SolveOptions(escalate=False)
        profile = solve_profile(PowerFlux(2.0), 1.0, 0.0, make_grid(), options)

        assert profile.continuation_steps == 1
        assert profile.newton_iterations < options.max_iter
        assert profile.residual_history[-1] == profile.residual_norm

    def test_two_species_closed_form(self) -> None:
        """Test beta = gamma = 1 gives C = C_- + (C_+ - C_-) E(y/sqrt(d1 + d2))."""
        network = two_species(beta=1.0, gamma=1.0)
        flux = EffectiveDiffusion(network, DiffusionMatrix((1.0, 0.5)))
        grid = make_grid(10.0, 2001)
        profile = solve_profile(flux, [0.4], [2.4], grid)
        concentrations = composed_concentration_profile(profile, network.reduction)
        exact = 0.2 + 1.0 * erf_profile_E(grid.nodes / math.sqrt(1.5))

        np.testing.assert_allclose(concentrations.component(0), exact, atol=1e-4)
        np.testing.assert_allclose(concentrations.component(1), exact, atol=1e-4)
        assert concentrations.labels == ("C1", "C2")

    def test_three_species_profile(self) -> None:
        """Test a two-component reduced profile converges and keeps its limits."""
        network = three_species_binary()
        flux = EffectiveDiffusion(network, DiffusionMatrix((1.0, 1.0, 1.0)))
        profile = solve_profile(flux, [2.0, 0.5], [0.5, 2.0], make_grid(8.0, 801))

        assert profile.components == 2
        np.testing.assert_allclose(profile.values[0], [2.0, 0.5])
        np.testing.assert_allclose(profile.values[-1], [0.5, 2.0])
        assert profile.residual_norm <= 1e-7
        assert uniform_estimate_constant(profile, flux) < 1e-2

    @pytest.mark.parametrize(
        ("left", "right", "message"),
        [
            ([1.0, 2.0], 0.0, "limits need 1 components"),
            (-1.0, 0.0, "below the domain"),
        ],
    )
    def test_invalid_limits(self, left: object, right: object, message: str) -> None:
        """Test malformed or out-of-domain limits are rejected."""
        with pytest.raises(DomainError, match=message):
            solve_profile(PowerFlux(2.0), left, right, make_grid(4.0, 101))

    def test_nonconvergence_raises_with_history(self) -> None:
        """Test an exhausted iteration budget raises SolverError with the residual history."""
        options = SolveOptions(tol=1e-14, max_iter=1, escalate=False)
        with pytest.raises(SolverError, match="profile Newton failed") as exc_info:
            solve_profile(PowerFlux(2.0), 1.0, 0.0, make_grid(6.0, 601), options)

        assert exc_info.value.residual_history
        assert exc_info.value.last_iterate is not None

    def test_composed_profile_rejects_negative_nodes(self) -> None:
        """Test negative reduced states are rejected."""
        network = two_species(1.0, 1.0)
        profile = solve_profile(LinearFlux(1.0), -1.0, 1.0, make_grid(4.0, 41))

        with pytest.raises(DomainError, match="outside the reduced state space"):
            composed_concentration_profile(profile, network.reduction)


class TestBarenblatt:
    """Test closed-form Barenblatt profiles."""

    def test_constant_for_m_two(self) -> None:
        """Test c = 1/12 for m = 2 in one dimension."""
        profile = BarenblattProfile(2.0, 1.0)

        assert profile.constant == pytest.approx(1.0 / 12.0)
        assert profile.support_radius == pytest.approx(math.sqrt(12.0))
        assert profile.alpha == pytest.approx(1.0 / 3.0)

    @pytest.mark.parametrize("m", [1.0, 1.25, 2.0, 3.0])
    def test_steady_residual(self, m: float) -> None:
        """Test (W^m)' + beta y W = 0."""
        profile = BarenblattProfile(m, 1.0)
        y = np.linspace(-6, 6, 241)

        np.testing.assert_allclose(profile.steady_residual(y), 0.0, atol=1e-12)

    def test_discrete_residual_is_small(self) -> None:
        """Test the centered-difference residual decays with the grid."""
        profile = BarenblattProfile(1.0, 1.0)
        coarse = np.max(np.abs(profile.discrete_residual(make_grid(4.0, 201))))
        fine = np.max(np.abs(profile.discrete_residual(make_grid(4.0, 801))))

        assert fine < coarse

    def test_gaussian_mass(self) -> None:
        """Test the m = 1 mass N sqrt(4 pi)."""
        assert BarenblattProfile(1.0, 2.0).total_mass == pytest.approx(2.0 * math.sqrt(4.0 * math.pi))

    def test_mass_matches_quadrature(self) -> None:
        """Test the closed-form mass against a trapezoidal sum."""
        profile = BarenblattProfile(2.0, 1.0)
        y = np.linspace(-4, 4, 8001)

        assert profile.total_mass == pytest.approx(float(integrate.trapezoid(profile(y), y)), rel=1e-5)

    def test_requires_mass_parameter(self) -> None:
        """Test the mixing branch has no Barenblatt profile."""
        params = PMEParams(2.0, left=1.0, right=0.0)

        assert not params.is_barenblatt
        assert params.beta == 0.5
        with pytest.raises(PreconditionError, match="mass parameter"):
            barenblatt(params)

    def test_params_need_branch_data(self) -> None:
        """Test parameters without N or limits are rejected."""
        with pytest.raises(ValueError, match="either the mass parameter"):
            PMEParams(2.0)

    def test_to_profile(self) -> None:
        """Test sampling on a grid keeps the W label."""
        sampled = barenblatt(PMEParams(2.0, mass_parameter=1.0)).to_profile(make_grid(4.0, 81))

        assert sampled.labels == ("W",)
        assert sampled.values[sampled.grid.center_index, 0] == pytest.approx(1.0)


class TestTurbulence:
    """Test turbulence closed forms."""

    def test_exact_solution(self) -> None:
        """Test V and K inside and outside the turbulent zone."""
        exact = turbulence_exact(1.5)

        assert exact.velocity(3.0) == pytest.approx(1.5 / math.sqrt(2.0))
        assert exact.turbulent_energy(0.0) == pytest.approx(1.5**2 / 4.0)
        assert exact.turbulent_energy(2.0) == 0.0

    def test_exact_residuals(self) -> None:
        """Test the steady residuals vanish away from the kinks and are NaN on them."""
        y = np.array([-3.0, -1.5, -0.7, 0.0, 0.4, 1.5, 2.0])
        momentum, energy = turbulence_exact_residuals(1.5, y)

        assert np.isnan(momentum[1]) and np.isnan(energy[5])
        finite = np.isfinite(momentum)
        np.testing.assert_allclose(momentum[finite], 0.0, atol=1e-14)
        np.testing.assert_allclose(energy[finite], 0.0, atol=1e-14)

    def test_exact_rejects_nonpositive(self) -> None:
        """Test A must be positive."""
        with pytest.raises(DomainError, match="half-width"):
            turbulence_exact(0.0)

    def test_barenblatt_residual(self) -> None:
        """Test the zero-flux residual of the turbulent energy profile."""
        params = TurbulenceParams(alpha_exp=0.5, beta_exp=0.5, kappa_diff=2.0, eta_visc=1.0)
        profile = turbulence_barenblatt(params, 1.0)
        y = np.linspace(-5, 5, 201)

        np.testing.assert_allclose(profile.steady_residual(y), 0.0, atol=1e-12)
        assert params.gamma == pytest.approx(0.4)

    def test_similarity_pair_momentum(self) -> None:
        """Test the velocity integrates to the requested momentum."""
        pair = turbulence_similarity_pair(TurbulenceParams(), 1.0, 2.0)
        radius = pair.energy_profile.support_radius
        y = np.linspace(-radius, radius, 20001)

        assert float(integrate.trapezoid(pair.velocity(y), y)) == pytest.approx(2.0, rel=1e-4)

    def test_similarity_pair_without_energy(self) -> None:
        """Test momentum cannot sit on a vanishing energy profile."""
        with pytest.raises(DomainError, match="vanishing energy profile"):
            turbulence_similarity_pair(TurbulenceParams(), 0.0, 1.0)


class TestGinzburgLandau:
    """Test the wavenumber and phase profiles."""

    def test_ordering(self) -> None:
        """Test the text ordering swaps the caption pair."""
        caption = GLParams.from_ordering(GLOrdering.CAPTION)
        text = GLParams.from_ordering(GLOrdering.TEXT)

        assert (caption.eta_minus, caption.eta_plus) == (0.45, 0.3)
        assert (text.eta_minus, text.eta_plus) == (0.3, 0.45)

    def test_eckhaus_violation(self) -> None:
        """Test wavenumbers outside the Eckhaus window are rejected."""
        with pytest.raises(EckhausViolationError, match="Eckhaus"):
            GLParams(0.6, 0.3)

    def test_phase_range(self) -> None:
        """Test phases must lie in [0, 2 pi)."""
        with pytest.raises(DomainError, match="phase"):
            GLParams(0.1, 0.2, phi_minus=7.0)

    def test_roll_amplitude(self) -> None:
        """Test |roll| = sqrt(1 - eta^2)."""
        roll = GLParams(0.3, 0.45).roll(np.linspace(0, 10, 11), side="plus")

        np.testing.assert_allclose(np.hypot(roll[:, 0], roll[:, 1]), math.sqrt(1 - 0.45**2))

    def test_eta_and_phase_profiles(self) -> None:
        """Test the wavenumber profile and the reconstructed phase."""
        params = GLParams(0.45, 0.3)
        grid = Grid(10.0, 1001)
        eta = gl_eta_profile(params, grid)
        values = eta.component(0)

        assert eta.labels == ("eta",)
        assert np.all(values <= 0.45 + 1e-12)
        assert np.all(values >= 0.3 - 1e-12)
        assert np.all(np.diff(values) <= 1e-12)

        phase = gl_psi_reconstruct(eta, params)
        assert phase.labels == ("psi",)
        assert phase.component(0)[0] == pytest.approx(-0.45 * 10.0)
        assert phase.anchor_discrepancy < 1e-3
        assert np.max(np.abs(gl_psi_residual(phase)[5:-5])) < 1e-2

    def test_phase_needs_solved_profile(self) -> None:
        """Test a vector profile cannot be integrated to a phase."""
        profile = solve_profile(LinearFlux([1.0, 1.0]), [0.0, 0.0], [1.0, 1.0], make_grid(4.0, 41))

        with pytest.raises(PreconditionError, match="solved scalar wavenumber profile"):
            gl_psi_reconstruct(profile, GLParams(0.1, 0.2))
