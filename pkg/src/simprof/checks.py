"""Bundled invariant suite run by `simprof check`."""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from simprof.constants import EckhausConfig
from simprof.evolution import (
    conserved_quantities,
    roll_field,
    run_gl,
    run_pme,
    run_rds,
    run_turbulence,
    scaled_convergence,
    self_similar_gl_field,
)
from simprof.exceptions import EckhausViolationError
from simprof.flux_ness import (
    componentwise_multipliers,
    exact_turbulence_fluxes,
    lagrange_multiplier,
    zero_speed_profile,
)
from simprof.models import BoundaryCondition, Field1D, Profile, SolveOptions, TimeStepPolicy, Trajectory
from simprof.profile_bvp import (
    GLParams,
    PMEParams,
    PowerFlux,
    TurbulenceParams,
    barenblatt,
    composed_concentration_profile,
    erf_profile_E,
    gl_eta_profile,
    gl_psi_reconstruct,
    gl_psi_residual,
    make_grid,
    solve_profile,
    turbulence_exact,
    turbulence_exact_residuals,
)
from simprof.reaction_network import (
    DiffusionMatrix,
    EffectiveDiffusion,
    ReactionNetwork,
    certify_monotone,
    chain_invariant_region,
    reduce_psi,
    three_species_binary,
    two_reaction_chain,
    two_species,
)

logger = logging.getLogger(__name__)

TIGHT = SolveOptions(tol=1e-12)

# Relative size of U' below which centered differences are dominated by solver noise
DERIVATIVE_NOISE = 1e-8


@dataclass(frozen=True)
class Measurement:
    """One measured quantity with its acceptance limit."""

    label: str
    value: float
    limit: float
    relation: str = "<"

    @property
    def passed(self) -> bool:
        """Whether the value satisfies the limit."""
        if not math.isfinite(self.value):
            return False
        return self.value < self.limit if self.relation == "<" else self.value > self.limit

    def describe(self) -> str:
        """Single-line summary."""
        return f"{self.label} = {self.value:.3e} ({self.relation} {self.limit:.1e})"


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant check."""

    name: str
    measurements: tuple[Measurement, ...] = ()
    error: Optional[str] = None
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        """Whether the check ran and every measurement passed."""
        return self.error is None and bool(self.measurements) and all(m.passed for m in self.measurements)


@dataclass(frozen=True)
class InvariantCheck:
    """A named check of the suite."""

    name: str
    description: str
    measure: Callable[[], list[Measurement]]
    slow: bool = False

    def run(self) -> CheckResult:
        """Run the check, turning exceptions into a failed result."""
        start = time.perf_counter()
        try:
            measurements = tuple(self.measure())
        except Exception as err:  # noqa: BLE001
            logger.warning("check %s raised %s", self.name, err)
            return CheckResult(self.name, error=f"{type(err).__name__}: {err}", seconds=time.perf_counter() - start)
        result = CheckResult(self.name, measurements, seconds=time.perf_counter() - start)
        logger.info("check %s %s in %.2fs", self.name, "passed" if result.passed else "FAILED", result.seconds)
        return result


def _sup(values: object) -> float:
    array = np.abs(np.asarray(values, dtype=float))
    finite = array[np.isfinite(array)]
    return float(finite.max()) if finite.size else 0.0


def _reduced_profile(
    network: ReactionNetwork, diffusion: tuple[float, ...], c_minus: Sequence[float], c_plus: Sequence[float]
) -> tuple[Profile, Profile, DiffusionMatrix]:
    d = DiffusionMatrix(diffusion)
    q = network.conservation
    flux = EffectiveDiffusion(network, d)
    u_profile = solve_profile(flux, q @ np.asarray(c_minus), q @ np.asarray(c_plus), make_grid(), TIGHT)
    return u_profile, composed_concentration_profile(u_profile, network.reduction), d


def check_barenblatt_residual() -> list[Measurement]:
    y = make_grid(4.0, 801).nodes
    out = []
    for m in (1.25, 2.0, 3.0):
        closed = barenblatt(PMEParams(m, mass_parameter=1.0))
        inside = np.abs(y) < closed.support_radius
        out.append(Measurement(f"flux residual m={m:g}", _sup(closed.steady_residual(y[inside])), 1e-10))
    c2 = barenblatt(PMEParams(2.0, mass_parameter=1.0)).constant
    out.append(Measurement("|c_2 - 1/12|", abs(c2 - 1.0 / 12.0), 1e-15))
    return out


def check_reduction_exactness() -> list[Measurement]:
    pair = two_species(beta=1.0, gamma=2.0)
    out = [
        Measurement("Psi(1) - (1/2, 1/4)", _sup(reduce_psi(pair, [1.0]) - [0.5, 0.25]), 1e-12),
        Measurement("Psi(6) - (3/2, 9/4)", _sup(reduce_psi(pair, [6.0]) - [1.5, 2.25]), 1e-12),
    ]
    rng = np.random.default_rng(20210101)
    for network in (pair, three_species_binary(), two_reaction_chain()):
        u = rng.uniform(0.0, 10.0, size=(1000, network.conserved_count))
        c = reduce_psi(network, u)
        out.append(Measurement(f"{network.name} |Q Psi(u) - u|", _sup(c @ network.conservation.T - u), 1e-10))
        out.append(Measurement(f"{network.name} |R(Psi(u))|", _sup(network.rate(c)), 1e-10))
    return out


def check_two_species_closed_form() -> list[Measurement]:
    network = two_species(beta=1.0, gamma=1.0)
    _, c_profile, d = _reduced_profile(network, (1.0, 0.5), (0.2, 0.2), (1.2, 1.2))
    closed = 0.2 + 1.0 * erf_profile_E(c_profile.y / math.sqrt(1.5))
    out = [Measurement("sup |C - closed form|", _sup(c_profile.values - closed[:, np.newaxis]), 1e-4)]
    first, second = componentwise_multipliers(c_profile, d, 1.0, 1.0)
    out.append(Measurement("component multipliers disagree", _sup(first - second), 1e-6))
    _, equal_profile, equal_d = _reduced_profile(network, (1.0, 1.0), (0.2, 0.2), (1.2, 1.2))
    fluxes = lagrange_multiplier(equal_profile, equal_d, network)
    out.append(Measurement("max |Lambda| for d1 = d2", _sup(fluxes.multipliers), 1e-8))
    return out


def _derivative_bound_excess(
    network: ReactionNetwork, diffusion: tuple[float, ...], u_minus: float, u_plus: float
) -> float:
    """Largest U' - bound over nodes where U' is above the solver noise; inf if U' turns negative."""
    d = DiffusionMatrix(diffusion)
    profile = solve_profile(EffectiveDiffusion(network, d), u_minus, u_plus, make_grid(), TIGHT)
    y, u, h = profile.y, profile.component(0), profile.grid.spacing
    derivative = (u[2:] - u[:-2]) / (2.0 * h)
    bound = np.exp(-y[1:-1] ** 2 / (4.0 * d.upper)) * math.sqrt(d.upper / (8.0 * d.lower**2)) * (u_plus - u_minus)
    noise = DERIVATIVE_NOISE * abs(u_plus - u_minus)
    if np.any(derivative < -noise):
        return math.inf
    resolved = derivative > noise
    if not np.any(resolved):
        return math.inf
    return float(np.max(derivative[resolved] - bound[resolved]))


def check_derivative_bound() -> list[Measurement]:
    return [
        Measurement(
            "max U' - bound, (1,2), d=(1,1)",
            _derivative_bound_excess(two_species(1.0, 2.0), (1.0, 1.0), 1.0, 6.0),
            1e-12,
        ),
        Measurement(
            "max U' - bound, (1,1), d=(1,0.5)",
            _derivative_bound_excess(two_species(1.0, 1.0), (1.0, 0.5), 0.4, 2.4),
            1e-12,
        ),
    ]


def check_monotonicity_criterion() -> list[Measurement]:
    network = three_species_binary()
    good = EffectiveDiffusion(network, DiffusionMatrix((2.0, 2.0, 10.0)))
    bad = EffectiveDiffusion(network, DiffusionMatrix((60.0, 2.0, 10.0)))
    certified = certify_monotone(good.jacobian, np.array([0.1, 0.1]), np.array([6.0, 6.0]), 9)
    witness = certify_monotone(bad.jacobian, np.array([1e3, 1e-3]), np.array([1e4, 1e-2]), 9)
    return [
        Measurement("a_lo for d=(2,2,10)", certified.a_lo, 0.0, ">"),
        Measurement("-a_lo for d=(60,2,10)", -witness.a_lo, 0.0, ">"),
    ]


def check_symmetric_three_species() -> list[Measurement]:
    network = three_species_binary()
    d = DiffusionMatrix((2.0, 2.0, 10.0))
    u_profile = solve_profile(EffectiveDiffusion(network, d), [6.9, 1.9], [1.9, 6.9], make_grid(), TIGHT)
    c = composed_concentration_profile(u_profile, network.reduction)
    values = c.values
    multipliers = lagrange_multiplier(c, d, network).multipliers[:, 0]
    ends = max(values[0, 2], values[-1, 2])
    return [
        Measurement("sup |C1(y) - C2(-y)|", _sup(values[:, 0] - values[::-1, 1]), 1e-5),
        Measurement("sup |C3(y) - C3(-y)|", _sup(values[:, 2] - values[::-1, 2]), 1e-5),
        Measurement("max C3 - C3(+-inf)", float(values[:, 2].max() - ends), 0.1, ">"),
        Measurement("sup |Lambda(y) - Lambda(-y)|", _sup(multipliers - multipliers[::-1]), 1e-5),
    ]


def check_chain_profile() -> list[Measurement]:
    network = two_reaction_chain()
    b_minus, b_plus = 0.5, 1.5
    _, c, d = _reduced_profile(
        network, (1.0, 2.0, 3.0), (b_minus, b_minus**2, b_minus**2), (b_plus, b_plus**2, b_plus**2)
    )
    lower, upper = chain_invariant_region(b_minus, b_plus)
    steps = np.diff(c.values, axis=0)
    outside = np.maximum(lower - c.values, 0.0) + np.maximum(c.values - upper, 0.0)
    fluxes = lagrange_multiplier(c, d, network)
    return [
        Measurement("min increment", float(steps.min()), 0.0, ">"),
        Measurement("distance to invariant region", _sup(outside), 1e-12),
        Measurement("|Q lambda|", fluxes.stoichiometric_residual, 1e-6),
        Measurement("decomposition residual", fluxes.decomposition_residual, 1e-8),
    ]


def check_turbulence_exact() -> list[Measurement]:
    half_width = 1.5
    y = np.linspace(-4.0, 4.0, 1601)
    momentum, energy = turbulence_exact_residuals(half_width, y)
    exact = turbulence_exact(half_width)
    inside = np.abs(y) <= half_width
    fluxes = exact_turbulence_fluxes(exact, y)
    k = exact.turbulent_energy(y)
    return [
        Measurement("momentum equation residual", _sup(momentum), 1e-12),
        Measurement("energy equation residual", _sup(energy), 1e-12),
        Measurement("energy density - A^2/4", _sup(exact.energy(y[inside]) - half_width**2 / 4.0), 1e-12),
        Measurement("Q_mom + K/sqrt(2)", _sup(fluxes.momentum_flux + k / math.sqrt(2.0)), 1e-12),
        Measurement("S_kin - K/2", _sup(fluxes.source - k / 2.0), 1e-12),
    ]


def check_gl_profile() -> list[Measurement]:
    params = GLParams(0.45, 0.3)
    eta = gl_eta_profile(params, make_grid())
    phase = gl_psi_reconstruct(eta, params)
    try:
        GLParams(0.6, 0.3)
        rejected = 0.0
    except EckhausViolationError:
        rejected = 1.0
    return [
        Measurement("eta residual", eta.residual_norm, 1e-8),
        Measurement("left/right phase discrepancy", phase.anchor_discrepancy, 1e-6),
        Measurement("steady phase residual", _sup(gl_psi_residual(phase)[1:-1]), 1e-4),
        Measurement("rejects eta = 0.6", rejected, 0.5, ">"),
        Measurement("|eta| margin to 1/sqrt(3)", EckhausConfig.BOUND - _sup(eta.values), 0.0, ">"),
    ]


@lru_cache(maxsize=None)
def _barenblatt_run(nodes: int) -> Trajectory:
    """Zero-flux m = 2 run from Barenblatt data on [-8, 8] up to t = 3."""
    closed = barenblatt(PMEParams(2.0, mass_parameter=1.0))
    x = make_grid(8.0, nodes).nodes
    initial = Field1D(x, closed(x), 0.0, BoundaryCondition.neumann_zero())
    return run_pme(2.0, initial, TimeStepPolicy((0.0, 3.0)))


def check_pme_self_similarity() -> list[Measurement]:
    params = PMEParams(2.0, mass_parameter=1.0)
    reference = barenblatt(params).to_profile(make_grid(4.0, 801))
    trajectory = _barenblatt_run(2001)
    curve = scaled_convergence(trajectory, reference, params.alpha, params.beta)
    ledger = conserved_quantities(trajectory)
    return [
        Measurement("scaled sup-error at t=3", float(curve.errors[-1]), 1e-2),
        Measurement("mass drift", ledger.relative_drift("mass"), 1e-10),
    ]


def check_barenblatt_order() -> list[Measurement]:
    params = PMEParams(2.0, mass_parameter=1.0)
    closed = barenblatt(params)
    reference = closed.to_profile(make_grid(4.0, 801))
    window = 0.5 * closed.support_radius
    curves = [
        scaled_convergence(_barenblatt_run(nodes), reference, params.alpha, params.beta, window=window)
        for nodes in (1001, 2001)
    ]
    errors = [float(curve.errors[-1]) for curve in curves]
    ratio = errors[0] / errors[1] if errors[1] > 0 else math.inf
    return [Measurement("error ratio when halving h", ratio, 3.0, ">")]


def check_infiltration_mass_law() -> list[Measurement]:
    grid = make_grid(20.0, 2001)
    profile = solve_profile(PowerFlux(2.0), 1.0, 0.0, grid)
    x = grid.nodes
    initial = Field1D(x, profile.values, 0.0, BoundaryCondition.dirichlet(1.0, 0.0))
    times = tuple(float(t) for t in np.linspace(0.0, 10.0, 11))
    trajectory = run_pme(2.0, initial, TimeStepPolicy(times))
    half = x >= 0
    mass = np.array([integrate.trapezoid(s.values[half, 0], x[half]) for s in trajectory.snapshots])
    t = trajectory.times
    later = t >= 1.0
    deviation = np.abs(mass[later] / mass[0] / np.sqrt(1.0 + t[later]) - 1.0)
    return [Measurement("relative deviation from sqrt(1+t)", float(deviation.max()), 2e-2)]


def check_turbulence_conservation() -> list[Measurement]:
    grid = make_grid(10.0, 801)
    x = grid.nodes
    values = np.stack([np.exp(-(x**2)), 0.5 * np.exp(-(x**2))], axis=-1)
    initial = Field1D(x, values, 0.0, BoundaryCondition.neumann_zero())
    times = tuple(float(t) for t in np.linspace(0.0, 5.0, 11))
    trajectory = run_turbulence(TurbulenceParams(), initial, TimeStepPolicy(times))
    ledger = conserved_quantities(trajectory)
    kinetic = ledger.quantities["kinetic"]
    return [
        Measurement("momentum drift", ledger.relative_drift("momentum"), 5e-3),
        Measurement("energy drift", ledger.relative_drift("energy"), 5e-3),
        Measurement("max kinetic increase after t=1", float(np.max(np.diff(kinetic[2:]))), 0.0),
    ]


def check_turbulence_exact_simulation() -> list[Measurement]:
    exact = turbulence_exact(1.0)
    x = make_grid(8.0, 1601).nodes
    values = np.stack([exact.velocity(x), exact.turbulent_energy(x)], axis=-1)
    initial = Field1D(x, values, 0.0, BoundaryCondition.dirichlet(values[0], values[-1]))
    trajectory = run_turbulence(TurbulenceParams(), initial, TimeStepPolicy((0.0, 1.0, 2.0, 3.0)))
    grid = make_grid(3.0, 601)
    reference = Profile(
        grid=grid,
        values=np.stack([exact.velocity(grid.nodes), exact.turbulent_energy(grid.nodes)], axis=-1),
        left_limit=[exact.velocity(grid.nodes[0]), 0.0],
        right_limit=[exact.velocity(grid.nodes[-1]), 0.0],
        labels=("V", "K"),
    )
    curve = scaled_convergence(trajectory, reference, 0.0, 0.5, component=0)
    return [Measurement("sup |v - V(x/sqrt(1+t))| for t <= 3", float(np.max(curve.errors)), 2e-2)]


def _equilibrium_defect_at(kappa: float) -> float:
    """Largest equilibrium defect at t = 1 of a two-species run started off equilibrium."""
    network = two_species(beta=1.0, gamma=2.0, kappa=kappa)
    x = make_grid(10.0, 401).nodes
    values = np.stack([1.0 + 0.5 * np.tanh(x), np.full_like(x, 0.5)], axis=-1)
    policy = TimeStepPolicy((0.0, 1.0), dt=0.01)
    trajectory = run_rds(network, DiffusionMatrix((1.0, 1.0)), Field1D(x, values), policy)
    return float(trajectory.diagnostics["equilibrium_defect"][-1])


def check_fast_reaction_equilibration() -> list[Measurement]:
    slow = _equilibrium_defect_at(1.0)
    fast = _equilibrium_defect_at(100.0)
    ratio = slow / fast if fast > 0 else math.inf
    return [Measurement("defect ratio kappa=1 / kappa=100 at t=1", ratio, 10.0, ">")]


def check_gl_pure_roll() -> list[Measurement]:
    grid = make_grid(10.0, 1001)
    eta = 0.3
    initial = roll_field(grid.nodes, eta)
    trajectory = run_gl(initial, TimeStepPolicy((0.0, 1.0, 2.0, 5.0)))
    final = trajectory.snapshots[-1].values
    amplitude = np.sqrt((final**2).sum(axis=1))
    speeds = [float(np.max(np.abs(track.speeds()))) for track in trajectory.zero_tracks if len(track.times) > 1]
    return [
        Measurement("sup ||A| - sqrt(1-eta^2)|", _sup(amplitude - math.sqrt(1.0 - eta**2)), 1e-6),
        Measurement("max zero speed", max(speeds, default=math.inf), 1e-5),
    ]


def check_gl_mixed_zero_speeds() -> list[Measurement]:
    params = GLParams(*EckhausConfig.CAPTION_PAIR)
    phase = gl_psi_reconstruct(gl_eta_profile(params, make_grid()), params)
    speed_profile = zero_speed_profile(phase)
    grid = make_grid(60.0, 2401)
    late = tuple(float(t) for t in np.arange(190.0, 200.0 + 1e-9, 0.5))
    trajectory = run_gl(self_similar_gl_field(phase, grid.nodes), TimeStepPolicy((20.0, 50.0, 100.0, *late)))
    final = 200.0
    scale = math.sqrt(1.0 + final)
    worst = 0.0
    reference = _sup(speed_profile[np.abs(phase.y) <= 2.0]) / scale
    counted = 0
    for track in trajectory.zero_tracks:
        if track.terminated or abs(track.times[-1] - final) > 1e-9 or len(track.times) < 2:
            continue
        y = track.positions[-1] / scale
        if abs(y) > 2.0:
            continue
        predicted = float(np.interp(y, phase.y, speed_profile)) / scale
        worst = max(worst, abs(track.speed_at(final) - predicted))
        counted += 1
    return [
        Measurement("central zeros tracked", float(counted), 0.0, ">"),
        Measurement("relative zero speed error", worst / reference, 0.1),
    ]


SUITE: tuple[InvariantCheck, ...] = (
    InvariantCheck("barenblatt_residual", "Barenblatt flux residual and c_2 = 1/12", check_barenblatt_residual),
    InvariantCheck(
        "reduction_exactness", "Psi closed forms, Q Psi(u) = u and R(Psi(u)) = 0", check_reduction_exactness
    ),
    InvariantCheck("two_species_closed_form", "E-based closed form and multipliers", check_two_species_closed_form),
    InvariantCheck("derivative_bound", "Gaussian bound on U'", check_derivative_bound),
    InvariantCheck(
        "monotonicity_criterion", "sampled monotonicity of the three-species flux", check_monotonicity_criterion
    ),
    InvariantCheck(
        "symmetric_three_species", "symmetric nonmonotone three-species profile", check_symmetric_three_species
    ),
    InvariantCheck("chain_profile", "two-reaction chain profile and multipliers", check_chain_profile),
    InvariantCheck("turbulence_exact", "exact turbulence solution and fluxes", check_turbulence_exact),
    InvariantCheck("gl_profile", "wavenumber and phase profiles", check_gl_profile),
    InvariantCheck("pme_self_similarity", "porous medium run from Barenblatt data", check_pme_self_similarity),
    InvariantCheck("barenblatt_order", "scaled Barenblatt error when halving h", check_barenblatt_order),
    InvariantCheck("infiltration_mass_law", "half-line mass grows like sqrt(1+t)", check_infiltration_mass_law),
    InvariantCheck("turbulence_conservation", "momentum and energy of a zero-flux run", check_turbulence_conservation),
    InvariantCheck(
        "turbulence_exact_simulation", "run from the exact turbulence solution", check_turbulence_exact_simulation
    ),
    InvariantCheck(
        "fast_reaction_equilibration", "kappa = 100 stays closer to equilibrium", check_fast_reaction_equilibration
    ),
    InvariantCheck("gl_pure_roll", "pure roll keeps its amplitude and zeros", check_gl_pure_roll),
    InvariantCheck(
        "gl_mixed_zero_speeds", "zero speeds of the mixed-wavenumber run", check_gl_mixed_zero_speeds, slow=True
    ),
)


def check_names() -> list[str]:
    """Names of all checks in the suite."""
    return [check.name for check in SUITE]


def select_checks(names: Optional[Iterable[str]] = None, include_slow: bool = False) -> list[InvariantCheck]:
    """Checks by name, or all fast checks (plus slow ones on request).

    Raises:
        ValueError: If a name is not in the suite
    """
    if names:
        wanted = list(names)
        unknown = sorted(set(wanted) - set(check_names()))
        if unknown:
            msg = f"Unknown check(s): {', '.join(unknown)}. Available: {', '.join(check_names())}"
            raise ValueError(msg)
        return [check for check in SUITE if check.name in wanted]
    return [check for check in SUITE if include_slow or not check.slow]


def run_checks(checks: Sequence[InvariantCheck], jobs: int = 1) -> list[CheckResult]:
    """Run checks, optionally on a thread pool; results keep the suite order."""
    if jobs <= 1:
        return [check.run() for check in checks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda check: check.run(), checks))
