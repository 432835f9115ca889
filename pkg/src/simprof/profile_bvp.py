"""Similarity profiles of the scaled equations.

The central solver computes U on a truncated line with U(-L) = U_- and U(L) = U_+ for

    0 = (A(U))'' + (y/2) U'

where A is a monotone flux map. The module also provides the closed-form profiles used as
oracles: Barenblatt profiles, the error-function profile, the exact turbulence solution and
the Ginzburg-Landau wavenumber and phase profiles.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Protocol, Union

import numpy as np
from scipy import integrate, sparse, special
from scipy.sparse.linalg import spsolve

from simprof.constants import EckhausConfig, GridDefaults, ReductionDefaults, SolverDefaults
from simprof.exceptions import DomainError, EckhausViolationError, PreconditionError, SolverError
from simprof.models import FloatArray, Grid, GLOrdering, PhaseProfile, Profile, SolveOptions
from simprof.reaction_network import ReductionMap, certify_monotone

logger = logging.getLogger(__name__)


class FluxMap(Protocol):
    """Monotone flux map A acting on node-major arrays of shape (n, m)."""

    @property
    def components(self) -> int:
        """Number of components m."""
        ...

    @property
    def lower_bounds(self) -> Optional[FloatArray]:
        """Componentwise lower bounds of the domain of A, if any."""
        ...

    @property
    def upper_bounds(self) -> Optional[FloatArray]:
        """Componentwise upper bounds of the domain of A, if any."""
        ...

    @property
    def reference_diffusivity(self) -> float:
        """Diffusivity used by the error-function initial guess."""
        ...

    def value(self, u: FloatArray) -> FloatArray:
        """A(u) with shape (n, m)."""
        ...

    def jacobian(self, u: FloatArray) -> FloatArray:
        """DA(u) with shape (n, m, m)."""
        ...


class LinearFlux:
    """A(u) = D u for a diagonal matrix D."""

    def __init__(self, diffusivity: Union[float, Any]) -> None:
        """Initialize with one diffusivity per component.

        Raises:
            DomainError: If a diffusivity is not positive
        """
        self.diffusivity = np.atleast_1d(np.asarray(diffusivity, dtype=float))
        if np.any(self.diffusivity <= 0):
            raise DomainError("D", self.diffusivity.tolist(), "diffusivities must be positive")

    @property
    def components(self) -> int:
        """Number of components."""
        return int(self.diffusivity.size)

    @property
    def lower_bounds(self) -> Optional[FloatArray]:
        """Unbounded."""
        return None

    @property
    def upper_bounds(self) -> Optional[FloatArray]:
        """Unbounded."""
        return None

    @property
    def reference_diffusivity(self) -> float:
        """Mean diffusivity."""
        return float(self.diffusivity.mean())

    def value(self, u: FloatArray) -> FloatArray:
        """D u."""
        return np.asarray(u * self.diffusivity)

    def jacobian(self, u: FloatArray) -> FloatArray:
        """Constant diagonal Jacobian."""
        return np.broadcast_to(np.diag(self.diffusivity), (*u.shape[:-1], self.components, self.components)).copy()


class PowerFlux:
    """Porous-medium flux A(u) = u^m on u >= 0."""

    def __init__(self, exponent: float) -> None:
        """Initialize with the exponent m >= 1.

        Raises:
            DomainError: If m < 1
        """
        if exponent < 1:
            raise DomainError("m", exponent, "porous medium exponent must be at least 1")
        self.exponent = float(exponent)

    @property
    def components(self) -> int:
        """Scalar flux."""
        return 1

    @property
    def lower_bounds(self) -> Optional[FloatArray]:
        """u >= 0."""
        return np.zeros(1)

    @property
    def upper_bounds(self) -> Optional[FloatArray]:
        """Unbounded above."""
        return None

    @property
    def reference_diffusivity(self) -> float:
        """Unit diffusivity."""
        return 1.0

    def value(self, u: FloatArray) -> FloatArray:
        """u^m."""
        return np.asarray(np.maximum(u, 0.0) ** self.exponent)

    def jacobian(self, u: FloatArray) -> FloatArray:
        """m u^(m-1), with the one-sided derivative at u = 0."""
        base = np.maximum(u, 0.0)
        if self.exponent == 1.0:
            slope = np.ones_like(base)
        else:
            slope = self.exponent * base ** (self.exponent - 1.0)
        return np.asarray(slope[..., np.newaxis])


def eckhaus_phi(eta: Any) -> FloatArray:
    """Phi(eta) = 3 eta + log((1-eta)/(1+eta)), so that Phi'(eta) = (1-3eta^2)/(1-eta^2)."""
    eta = np.asarray(eta, dtype=float)
    return np.asarray(3.0 * eta + np.log1p(-eta) - np.log1p(eta))


def eckhaus_phi_prime(eta: Any) -> FloatArray:
    """Phi'(eta) = (1-3eta^2)/(1-eta^2)."""
    eta = np.asarray(eta, dtype=float)
    return np.asarray((1.0 - 3.0 * eta**2) / (1.0 - eta**2))


class EckhausFlux:
    """Wavenumber flux Phi on the clamped Eckhaus window."""

    def __init__(self, margin: float = EckhausConfig.CLAMP_MARGIN) -> None:
        """Initialize with the clamp margin below 1/sqrt(3)."""
        self.limit = EckhausConfig.BOUND - margin

    @property
    def components(self) -> int:
        """Scalar flux."""
        return 1

    @property
    def lower_bounds(self) -> Optional[FloatArray]:
        """-1/sqrt(3) + margin."""
        return np.array([-self.limit])

    @property
    def upper_bounds(self) -> Optional[FloatArray]:
        """1/sqrt(3) - margin."""
        return np.array([self.limit])

    @property
    def reference_diffusivity(self) -> float:
        """Phi'(0)."""
        return 1.0

    def value(self, u: FloatArray) -> FloatArray:
        """Phi(eta)."""
        return eckhaus_phi(u)

    def jacobian(self, u: FloatArray) -> FloatArray:
        """Phi'(eta)."""
        return np.asarray(eckhaus_phi_prime(u)[..., np.newaxis])


def make_grid(half_width: float = GridDefaults.HALF_WIDTH, nodes_count: int = GridDefaults.NODES) -> Grid:
    """Uniform grid on [-L, L] with an odd number of nodes."""
    return Grid(half_width=float(half_width), nodes_count=int(nodes_count))


def erf_profile_E(z: Any) -> Any:
    """E(z) = (1 + erf(z/sqrt(2)))/2, the solution of E'' + z E' = 0 with limits 0 and 1."""
    return 0.5 * (1.0 + special.erf(np.asarray(z, dtype=float) / math.sqrt(2.0)))


def erf_profile_derivative(z: Any, order: int = 1) -> Any:
    """First or second derivative of E."""
    z = np.asarray(z, dtype=float)
    density = np.exp(-0.5 * z**2) / math.sqrt(2.0 * math.pi)
    if order == 1:
        return density
    if order == 2:
        return -z * density
    raise DomainError("order", order, "only first and second derivatives are available")


def _limits(flux: FluxMap, left: Any, right: Any) -> tuple[FloatArray, FloatArray]:
    u_minus = np.atleast_1d(np.asarray(left, dtype=float))
    u_plus = np.atleast_1d(np.asarray(right, dtype=float))
    if u_minus.shape != (flux.components,) or u_plus.shape != (flux.components,):
        raise DomainError("U", (u_minus.tolist(), u_plus.tolist()), f"limits need {flux.components} components")
    lower, upper = flux.lower_bounds, flux.upper_bounds
    for name, limit in (("U-", u_minus), ("U+", u_plus)):
        if lower is not None and np.any(limit < lower):
            raise DomainError(name, limit.tolist(), "limit lies below the domain of the flux")
        if upper is not None and np.any(limit > upper):
            raise DomainError(name, limit.tolist(), "limit lies above the domain of the flux")
    return u_minus, u_plus


def initial_guess(flux: FluxMap, left: Any, right: Any, grid: Grid) -> FloatArray:
    """Error-function interpolant U_- + (U_+ - U_-) E(y/sqrt(2 d)) with exact boundary values."""
    u_minus = np.atleast_1d(np.asarray(left, dtype=float))
    u_plus = np.atleast_1d(np.asarray(right, dtype=float))
    weight = erf_profile_E(grid.nodes / math.sqrt(2.0 * flux.reference_diffusivity))
    guess = u_minus[np.newaxis, :] + (u_plus - u_minus)[np.newaxis, :] * weight[:, np.newaxis]
    guess[0] = u_minus
    guess[-1] = u_plus
    return np.asarray(guess)


def _interior_residual(flux: FluxMap, u: FloatArray, grid: Grid) -> FloatArray:
    """h^2-scaled discrete operator; boundary rows are zero."""
    flux_values = flux.value(u)
    h = grid.spacing
    y = grid.nodes[1:-1, np.newaxis]
    out = np.zeros_like(u)
    out[1:-1] = flux_values[2:] - 2.0 * flux_values[1:-1] + flux_values[:-2] + 0.25 * h * y * (u[2:] - u[:-2])
    return out


def residual(profile: Profile, flux: FluxMap) -> FloatArray:
    """Per-node discrete residual of (A(U))'' + (y/2)U'; boundary rows are zero."""
    return _interior_residual(flux, np.array(profile.values), profile.grid) / profile.grid.spacing**2


@dataclass
class _NewtonState:
    """Mutable bookkeeping shared by the continuation stages of one solve."""

    history: list[float] = field(default_factory=list)
    iterations: int = 0
    projections: int = 0
    stagnated: bool = False


class _ProfileNewton:
    """Semismooth damped Newton iteration for one set of boundary values.

    Entries constrained by the domain of A satisfy the complementarity form
    mid((u - upper)/h^2, -L(u), (u - lower)/h^2) = 0, where L is the discrete operator.
    Entries resting on a bound get scaled identity rows; the remaining rows use the operator Jacobian.
    """

    def __init__(self, flux: FluxMap, grid: Grid, options: SolveOptions, state: _NewtonState) -> None:
        self.flux = flux
        self.grid = grid
        self.options = options
        self.state = state
        n, m = grid.nodes_count, flux.components
        self.shape = (n, m)
        self.lower = flux.lower_bounds
        self.upper = flux.upper_bounds
        self._floor = np.full(m, -np.inf) if self.lower is None else np.broadcast_to(self.lower, (m,))
        self._ceiling = np.full(m, np.inf) if self.upper is None else np.broadcast_to(self.upper, (m,))
        self._inv_h2 = 1.0 / grid.spacing**2
        self._eye = np.eye(m)
        interior = np.arange(1, n - 1)
        comp = np.arange(m)
        self._rows = np.broadcast_to(interior[:, None, None] * m + comp[None, :, None], (n - 2, m, m))
        self._cols = {
            offset: np.broadcast_to((interior + offset)[:, None, None] * m + comp[None, None, :], (n - 2, m, m))
            for offset in (-1, 0, 1)
        }

    def project(self, u: FloatArray) -> tuple[FloatArray, int]:
        """Clip into the flux domain and count the entries that were outside."""
        count = 0
        if self.lower is not None:
            count += int(np.count_nonzero(u < self.lower))
            u = np.maximum(u, self.lower)
        if self.upper is not None:
            count += int(np.count_nonzero(u > self.upper))
            u = np.minimum(u, self.upper)
        return u, count

    def system_residual(self, u: FloatArray, left: FloatArray, right: FloatArray) -> tuple[FloatArray, FloatArray]:
        """Complementarity residual with boundary rows, and the mask of entries resting on a bound."""
        res = -_interior_residual(self.flux, u, self.grid) * self._inv_h2
        below = (u - self._floor) * self._inv_h2
        on_lower = below <= res
        res = np.where(on_lower, below, res)
        above = (u - self._ceiling) * self._inv_h2
        on_upper = above >= res
        res = np.where(on_upper, above, res)
        on_bound = on_lower | on_upper
        on_bound[0] = on_bound[-1] = False
        res[0] = u[0] - left
        res[-1] = u[-1] - right
        return res, on_bound

    def threshold(self, u: FloatArray) -> float:
        """Tolerance raised to the round-off floor of the discrete residual."""
        scale = float(np.max(np.abs(self.flux.value(u)))) if u.size else 0.0
        return max(self.options.tol, SolverDefaults.ROUNDOFF_FACTOR * np.finfo(float).eps * scale * self._inv_h2)

    def jacobian(self, u: FloatArray, on_bound: FloatArray) -> sparse.csc_matrix:
        """Block-tridiagonal Jacobian with identity rows at the boundary and scaled ones at entries on a bound.

        The diffusion blocks are shifted by a small multiple of the identity so that degenerate
        entries with DA = 0 do not make the operator rows singular.
        """
        n, m = self.shape
        da = self.flux.jacobian(u)
        shift = SolverDefaults.JACOBIAN_FLOOR * max(1.0, float(np.max(np.abs(da))))
        da = da + shift * self._eye
        advection = (0.25 * self.grid.spacing * self.grid.nodes[1:-1])[:, None, None] * self._eye
        blocks = {
            -1: -self._inv_h2 * (da[:-2] - advection),
            0: 2.0 * self._inv_h2 * da[1:-1],
            1: -self._inv_h2 * (da[2:] + advection),
        }
        free = ~on_bound[1:-1].reshape(-1)
        keep = np.broadcast_to(free.reshape(n - 2, m)[:, :, None], (n - 2, m, m)).reshape(-1)
        rows = [np.concatenate([self._rows.reshape(-1)[keep]] * 3)]
        cols = [np.concatenate([self._cols[offset].reshape(-1)[keep] for offset in (-1, 0, 1)])]
        vals = [np.concatenate([blocks[offset].reshape(-1)[keep] for offset in (-1, 0, 1)])]
        bound_rows = np.flatnonzero(np.concatenate([np.zeros(m, bool), ~free, np.zeros(m, bool)]))
        end_rows = np.concatenate([np.arange(m), np.arange((n - 1) * m, n * m)])
        rows.extend([bound_rows, end_rows])
        cols.extend([bound_rows, end_rows])
        vals.extend([np.full(bound_rows.size, self._inv_h2), np.ones(end_rows.size)])
        matrix = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n * m, n * m)
        )
        return matrix.tocsc()

    def solve(self, u: FloatArray, left: FloatArray, right: FloatArray) -> FloatArray:
        """Iterate from u until the max-norm residual falls below the threshold.

        A line search that cannot reduce the residual any further is accepted as convergence
        when the residual already sits within a small factor of the round-off floor.

        Raises:
            SolverError: On a singular step, a failed line search, too many projections or iterations
        """
        u, _ = self.project(u)
        res, on_bound = self.system_residual(u, left, right)
        norm = float(np.max(np.abs(res)))
        for iteration in range(self.options.max_iter + 1):
            self.state.history.append(norm)
            threshold = self.threshold(u)
            if norm <= threshold:
                logger.debug("Newton converged after %d iterations, residual %.3e", iteration, norm)
                return u
            if iteration == self.options.max_iter:
                break
            step = spsolve(self.jacobian(u, on_bound), -res.reshape(-1)).reshape(self.shape)
            if not np.all(np.isfinite(step)):
                raise SolverError("singular Newton system", self.state.history, u)
            merit = float(np.linalg.norm(res))
            lam = 1.0
            accepted = False
            for _ in range(self.options.max_halvings + 1):
                trial, count = self.project(u + lam * step)
                trial_res, trial_on_bound = self.system_residual(trial, left, right)
                trial_merit = float(np.linalg.norm(trial_res))
                if not self.options.damping or trial_merit <= (1.0 - SolverDefaults.ARMIJO_SLOPE * lam) * merit:
                    accepted = True
                    break
                lam *= SolverDefaults.HALVING_FACTOR
            if not accepted:
                if norm <= SolverDefaults.STAGNATION_FACTOR * threshold:
                    logger.info("Newton stagnated at residual %.3e near the round-off floor %.3e", norm, threshold)
                    self.state.stagnated = True
                    return u
                raise SolverError("line search failed to reduce the residual", self.state.history, u)
            self.state.projections += count
            if self.state.projections > self.options.projection_cap:
                raise SolverError(
                    f"iterate left the flux domain {self.state.projections} times", self.state.history, trial
                )
            self.state.iterations += 1
            u, res, on_bound = trial, trial_res, trial_on_bound
            norm = float(np.max(np.abs(res)))
        raise SolverError(f"Newton did not converge in {self.options.max_iter} iterations", self.state.history, u)


def _monotonicity_warnings(flux: FluxMap, u_minus: FloatArray, u_plus: FloatArray) -> list[str]:
    lower = np.minimum(u_minus, u_plus)
    upper = np.maximum(u_minus, u_plus)
    certificate = certify_monotone(flux.jacobian, lower, upper, ReductionDefaults.MONOTONICITY_SAMPLES)
    if certificate.certified:
        return []
    message = (
        f"monotonicity not certified on the data box: smallest symmetric eigenvalue "
        f"{certificate.a_lo:.3e} at u={certificate.witness.tolist()}"
    )
    logger.warning(message)
    return [message]


def solve_profile(
    flux: FluxMap,
    left: Any,
    right: Any,
    grid: Grid,
    options: Optional[SolveOptions] = None,
) -> Profile:
    """Solve 0 = (A(U))'' + (y/2)U' on the grid with U(-L) = U_- and U(L) = U_+.

    Args:
        flux: Monotone flux map with Jacobian
        left: Limit U_- imposed at -L
        right: Limit U_+ imposed at L
        grid: Uniform grid
        options: Solver options

    Returns:
        Solved profile with residual history and projection count

    Raises:
        DomainError: If the limits are malformed or outside the flux domain
        SolverError: If Newton fails after the continuation schedule is exhausted
    """
    options = options or SolveOptions()
    u_minus, u_plus = _limits(flux, left, right)
    warnings = _monotonicity_warnings(flux, u_minus, u_plus)
    schedule = [options.continuation_steps]
    if options.escalate and options.continuation_steps < SolverDefaults.ESCALATED_CONTINUATION_STEPS:
        schedule.append(SolverDefaults.ESCALATED_CONTINUATION_STEPS)
    failure: Optional[SolverError] = None
    for steps in schedule:
        state = _NewtonState()
        newton = _ProfileNewton(flux, grid, options, state)
        try:
            values = _continuation(newton, flux, u_minus, u_plus, grid, steps)
        except SolverError as error:
            logger.info("profile solve with %d continuation steps failed: %s", steps, error)
            failure = error
            continue
        res, _ = newton.system_residual(values, u_minus, u_plus)
        if state.projections:
            logger.info("profile iterate was projected back %d times", state.projections)
        notes = list(warnings)
        if state.stagnated:
            notes.append("Newton stopped at the round-off floor of the residual")
        return Profile(
            grid=grid,
            values=values,
            left_limit=u_minus,
            right_limit=u_plus,
            residual_norm=float(np.max(np.abs(res))),
            newton_iterations=state.iterations,
            projection_count=state.projections,
            continuation_steps=steps,
            residual_history=tuple(state.history),
            warnings=tuple(notes),
        )
    assert failure is not None
    raise SolverError(
        f"profile Newton failed after continuation with {schedule[-1]} steps: {failure.reason}",
        failure.residual_history,
        failure.last_iterate,
    )


def _continuation(
    newton: _ProfileNewton,
    flux: FluxMap,
    u_minus: FloatArray,
    u_plus: FloatArray,
    grid: Grid,
    steps: int,
) -> FloatArray:
    """Move the limits from their mean to (U_-, U_+) in `steps` solves."""
    mean = 0.5 * (u_minus + u_plus)
    values: Optional[FloatArray] = None
    previous_guess: Optional[FloatArray] = None
    for stage in range(1, steps + 1):
        fraction = stage / steps
        left = mean + fraction * (u_minus - mean)
        right = mean + fraction * (u_plus - mean)
        guess = initial_guess(flux, left, right, grid)
        start = guess if values is None or previous_guess is None else values + (guess - previous_guess)
        start[0], start[-1] = left, right
        if steps > 1:
            logger.debug("continuation stage %d/%d", stage, steps)
        values = newton.solve(start, left, right)
        previous_guess = guess
    assert values is not None
    return values


def uniform_estimate_constant(profile: Profile, flux: FluxMap) -> float:
    """sup |U(y) - u(y)| / |U_+ - U_-| against the error-function interpolant u."""
    gap = float(np.max(np.abs(profile.right_limit - profile.left_limit)))
    if gap == 0.0:
        return 0.0
    interpolant = initial_guess(flux, profile.left_limit, profile.right_limit, profile.grid)
    return float(np.max(np.abs(profile.values - interpolant)) / gap)


def composed_concentration_profile(u_profile: Profile, reduction: ReductionMap) -> Profile:
    """Nodewise C(y) = Psi(U(y)).

    Raises:
        DomainError: If some node lies outside the nonnegative orthant
    """
    offending = np.flatnonzero(np.any(u_profile.values < 0, axis=1))
    if offending.size:
        raise DomainError("U", offending.tolist(), "nodes lie outside the reduced state space")
    concentrations = reduction.psi(np.array(u_profile.values))
    return Profile(
        grid=u_profile.grid,
        values=concentrations,
        left_limit=reduction.psi(np.array(u_profile.left_limit)),
        right_limit=reduction.psi(np.array(u_profile.right_limit)),
        residual_norm=u_profile.residual_norm,
        newton_iterations=u_profile.newton_iterations,
        projection_count=u_profile.projection_count,
        continuation_steps=u_profile.continuation_steps,
        residual_history=u_profile.residual_history,
        labels=tuple(f"C{k + 1}" for k in range(concentrations.shape[-1])),
        warnings=u_profile.warnings,
        solved=u_profile.solved,
    )


@dataclass(frozen=True)
class PMEParams:
    """Porous medium parameters for the Barenblatt or the mixing branch."""

    m: float
    mass_parameter: Optional[float] = None
    left: Optional[float] = None
    right: Optional[float] = None

    def __post_init__(self) -> None:
        """Validate the exponent and the branch data."""
        if self.m < 1:
            raise DomainError("m", self.m, "porous medium exponent must be at least 1")
        if self.mass_parameter is None and (self.left is None or self.right is None):
            msg = "either the mass parameter N or both limits U- and U+ are required"
            raise ValueError(msg)
        if self.mass_parameter is not None and self.mass_parameter < 0:
            raise DomainError("N", self.mass_parameter, "mass parameter must be nonnegative")
        for name, value in (("U-", self.left), ("U+", self.right)):
            if value is not None and value < 0:
                raise DomainError(name, value, "limits must be nonnegative")

    @property
    def is_barenblatt(self) -> bool:
        """Whether the parameters describe the Barenblatt branch."""
        return self.mass_parameter is not None

    @property
    def alpha(self) -> float:
        """Amplitude exponent: 1/(m+1) for Barenblatt, 0 for mixing."""
        return 1.0 / (self.m + 1.0) if self.is_barenblatt else 0.0

    @property
    def beta(self) -> float:
        """Spatial exponent: 1/(m+1) for Barenblatt, 1/2 for mixing."""
        return 1.0 / (self.m + 1.0) if self.is_barenblatt else 0.5


@dataclass(frozen=True)
class BarenblattProfile:
    """Closed-form Barenblatt profile W(|y|) = max{0, N - c|y|^2}^(1/(m-1)) in d dimensions."""

    m: float
    mass_parameter: float
    dimension: int = 1

    def __post_init__(self) -> None:
        """Validate parameters."""
        if self.m < 1:
            raise DomainError("m", self.m, "porous medium exponent must be at least 1")
        if self.mass_parameter < 0:
            raise DomainError("N", self.mass_parameter, "mass parameter must be nonnegative")
        if self.dimension < 1:
            raise DomainError("d", self.dimension, "dimension must be at least 1")

    @property
    def alpha(self) -> float:
        """Amplitude exponent d/(d(m-1)+2)."""
        return self.dimension / (self.dimension * (self.m - 1.0) + 2.0)

    @property
    def beta(self) -> float:
        """Spatial exponent 1/(d(m-1)+2)."""
        return 1.0 / (self.dimension * (self.m - 1.0) + 2.0)

    @property
    def constant(self) -> float:
        """c = (m-1) beta / (2m); 1/12 for m = 2 in one dimension."""
        return (self.m - 1.0) * self.beta / (2.0 * self.m)

    @property
    def support_radius(self) -> float:
        """Radius of the support, infinite in the Gaussian case."""
        if self.m == 1.0:
            return math.inf
        return math.sqrt(self.mass_parameter / self.constant)

    def __call__(self, y: Any) -> FloatArray:
        """W at radius |y|."""
        r = np.abs(np.asarray(y, dtype=float))
        if self.m == 1.0:
            return np.asarray(self.mass_parameter * np.exp(-0.25 * r**2))
        base = np.maximum(self.mass_parameter - self.constant * r**2, 0.0)
        return np.asarray(base ** (1.0 / (self.m - 1.0)))

    def flux(self, y: Any) -> FloatArray:
        """Radial flux Q = -(W^m)' = beta y W, exact on and off the support."""
        return np.asarray(self.beta * np.asarray(y, dtype=float) * self(y))

    def steady_residual(self, y: Any) -> FloatArray:
        """(W^m)' + beta y W evaluated analytically."""
        y = np.asarray(y, dtype=float)
        w = self(y)
        if self.m == 1.0:
            derivative = -0.5 * y * w
        else:
            base = np.maximum(self.mass_parameter - self.constant * y**2, 0.0)
            derivative = np.where(
                base > 0,
                -2.0 * self.constant * y * self.m / (self.m - 1.0) * base ** (1.0 / (self.m - 1.0)),
                0.0,
            )
        return np.asarray(derivative + self.beta * y * w)

    def discrete_residual(self, grid: Grid) -> FloatArray:
        """Centered-difference residual of (W^m)'' + beta (y W)' on interior nodes."""
        y = grid.nodes
        h = grid.spacing
        w = self(y)
        wm = w**self.m
        out = np.zeros_like(y)
        out[1:-1] = (wm[2:] - 2.0 * wm[1:-1] + wm[:-2]) / h**2 + self.beta * (y[2:] * w[2:] - y[:-2] * w[:-2]) / (
            2.0 * h
        )
        return out

    @property
    def total_mass(self) -> float:
        """Integral of W over R^d in closed form."""
        n = self.mass_parameter
        d = self.dimension
        if n == 0.0:
            return 0.0
        if self.m == 1.0:
            return n * (4.0 * math.pi) ** (d / 2.0)
        power = 1.0 / (self.m - 1.0)
        sphere = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
        return float(
            0.5 * sphere * n ** (power + d / 2.0) * self.constant ** (-d / 2.0) * special.beta(d / 2.0, power + 1.0)
        )

    def to_profile(self, grid: Grid) -> Profile:
        """Sample W on a grid."""
        values = self(grid.nodes)
        return Profile(
            grid=grid,
            values=values,
            left_limit=values[:1],
            right_limit=values[-1:],
            labels=("W",),
        )


def barenblatt(params: PMEParams, dimension: int = 1) -> BarenblattProfile:
    """Closed-form Barenblatt profile for the Barenblatt branch of the parameters.

    Raises:
        PreconditionError: If the parameters carry no mass parameter
    """
    if params.mass_parameter is None:
        raise PreconditionError("barenblatt", "a mass parameter N")
    return BarenblattProfile(params.m, params.mass_parameter, dimension)


@dataclass(frozen=True)
class TurbulenceParams:
    """Parameters of the two-field turbulence model v_t = (eta k^b v_x)_x, k_t = (kappa k^b k_x)_x + eta k^a v_x^2."""

    eta_visc: float = 1.0
    kappa_diff: float = 1.0
    alpha_exp: float = 1.0
    beta_exp: float = 1.0
    dimension: int = 1

    def __post_init__(self) -> None:
        """Validate positivity."""
        for name, value in (
            ("eta", self.eta_visc),
            ("kappa", self.kappa_diff),
            ("alpha", self.alpha_exp),
            ("beta", self.beta_exp),
        ):
            if not value > 0:
                raise DomainError(name, value, "turbulence parameters must be positive")
        if self.dimension < 1:
            raise DomainError("d", self.dimension, "dimension must be at least 1")

    @property
    def gamma(self) -> float:
        """Scaling exponent 1/(2 + beta d)."""
        return 1.0 / (2.0 + self.beta_exp * self.dimension)

    @property
    def is_exact_branch(self) -> bool:
        """Whether alpha = beta = 1 and kappa = eta = 1."""
        return self.alpha_exp == self.beta_exp == 1.0 and self.kappa_diff == self.eta_visc == 1.0


@dataclass(frozen=True)
class TurbulenceExact:
    """Exact self-similar solution with infinite energy and constant energy density A^2/4."""

    half_width: float

    def __post_init__(self) -> None:
        """Validate A > 0."""
        if not self.half_width > 0:
            raise DomainError("A", self.half_width, "half-width must be positive")

    def _inside(self, y: FloatArray) -> FloatArray:
        return np.asarray(np.abs(y) <= self.half_width)

    def velocity(self, y: Any) -> FloatArray:
        """V(y) = y/sqrt(2) inside, +-A/sqrt(2) outside."""
        y = np.asarray(y, dtype=float)
        return np.asarray(np.clip(y, -self.half_width, self.half_width) / math.sqrt(2.0))

    def turbulent_energy(self, y: Any) -> FloatArray:
        """K(y) = (A^2 - y^2)/4 inside, 0 outside."""
        y = np.asarray(y, dtype=float)
        return np.asarray(np.where(self._inside(y), 0.25 * (self.half_width**2 - y**2), 0.0))

    def velocity_derivative(self, y: Any) -> FloatArray:
        """V'(y)."""
        y = np.asarray(y, dtype=float)
        return np.asarray(np.where(self._inside(y), 1.0 / math.sqrt(2.0), 0.0))

    def turbulent_energy_derivative(self, y: Any, order: int = 1) -> FloatArray:
        """K'(y) or K''(y)."""
        y = np.asarray(y, dtype=float)
        inside = self._inside(y)
        if order == 1:
            return np.asarray(np.where(inside, -0.5 * y, 0.0))
        return np.asarray(np.where(inside, -0.5, 0.0))

    def energy(self, y: Any) -> FloatArray:
        """Energy density e(y) = V^2/2 + K."""
        return np.asarray(0.5 * self.velocity(y) ** 2 + self.turbulent_energy(y))


def turbulence_exact(half_width: float) -> TurbulenceExact:
    """Exact piecewise solution (V, K) for alpha = beta = 1 and kappa = eta = 1."""
    return TurbulenceExact(float(half_width))


def turbulence_exact_residuals(half_width: float, y: Any) -> tuple[FloatArray, FloatArray]:
    """Analytic steady residuals (KV')' + (y/2)V' and (KK')' + (y/2)K' + K V'^2.

    The residuals are undefined at |y| = A and reported as NaN there.
    """
    exact = turbulence_exact(half_width)
    y = np.asarray(y, dtype=float)
    k = exact.turbulent_energy(y)
    dk = exact.turbulent_energy_derivative(y)
    ddk = exact.turbulent_energy_derivative(y, order=2)
    dv = exact.velocity_derivative(y)
    momentum = dk * dv + 0.5 * y * dv
    energy = dk**2 + k * ddk + 0.5 * y * dk + k * dv**2
    kink = np.abs(np.abs(y) - half_width) == 0.0
    return np.where(kink, np.nan, momentum), np.where(kink, np.nan, energy)


@dataclass(frozen=True)
class TurbulenceBarenblatt:
    """Barenblatt-type turbulent energy K(y) = max{0, N - c|y|^2}^(1/beta) with c = beta gamma/(2 kappa)."""

    params: TurbulenceParams
    mass_parameter: float

    @property
    def constant(self) -> float:
        """c fixed by the radial steady residual of the scaled k equation."""
        return self.params.beta_exp * self.params.gamma / (2.0 * self.params.kappa_diff)

    @property
    def support_radius(self) -> float:
        """Radius of the support."""
        return math.sqrt(self.mass_parameter / self.constant)

    def __call__(self, y: Any) -> FloatArray:
        """K at radius |y|."""
        r = np.abs(np.asarray(y, dtype=float))
        base = np.maximum(self.mass_parameter - self.constant * r**2, 0.0)
        return np.asarray(base ** (1.0 / self.params.beta_exp))

    def steady_residual(self, y: Any) -> FloatArray:
        """Radial zero-flux residual gamma y K + kappa K^beta K' evaluated analytically."""
        r = np.asarray(y, dtype=float)
        k = self(r)
        beta = self.params.beta_exp
        base = np.maximum(self.mass_parameter - self.constant * r**2, 0.0)
        # K^beta K' = K (K^beta)'/beta on the support
        gradient_term = np.where(base > 0, k * (-2.0 * self.constant * r) / beta, 0.0)
        return np.asarray(self.params.gamma * r * k + self.params.kappa_diff * gradient_term)

    def integral(self, power: float = 1.0) -> float:
        """Integral of K^power over R^d by quadrature."""
        d = self.params.dimension
        radius = self.support_radius
        if radius == 0.0:
            return 0.0
        sphere = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
        value, _ = integrate.quad(lambda r: r ** (d - 1) * float(self(r)) ** power, 0.0, radius)
        return float(sphere * value)


def turbulence_barenblatt(params: TurbulenceParams, mass_parameter: float) -> TurbulenceBarenblatt:
    """Barenblatt-type self-similar turbulent energy profile."""
    if mass_parameter < 0:
        raise DomainError("N", mass_parameter, "mass parameter must be nonnegative")
    return TurbulenceBarenblatt(params, float(mass_parameter))


@dataclass(frozen=True)
class TurbulenceSimilarityPair:
    """Finite-energy similarity pair V = v K^(kappa/eta) with K of Barenblatt type."""

    energy_profile: TurbulenceBarenblatt
    prefactor: float

    @property
    def exponent(self) -> float:
        """kappa / eta."""
        params = self.energy_profile.params
        return params.kappa_diff / params.eta_visc

    def velocity(self, y: Any) -> FloatArray:
        """V(y)."""
        return np.asarray(self.prefactor * self.energy_profile(y) ** self.exponent)

    def turbulent_energy(self, y: Any) -> FloatArray:
        """K(y)."""
        return self.energy_profile(y)


def turbulence_similarity_pair(
    params: TurbulenceParams, mass_parameter: float, momentum: float
) -> TurbulenceSimilarityPair:
    """Pair (V, K) whose velocity carries the given total momentum.

    Raises:
        DomainError: If K vanishes identically while the momentum is nonzero
    """
    energy_profile = turbulence_barenblatt(params, mass_parameter)
    weight = energy_profile.integral(params.kappa_diff / params.eta_visc)
    if weight == 0.0:
        if momentum != 0.0:
            raise DomainError("momentum", momentum, "cannot carry momentum on a vanishing energy profile")
        return TurbulenceSimilarityPair(energy_profile, 0.0)
    return TurbulenceSimilarityPair(energy_profile, momentum / weight)


@dataclass(frozen=True)
class GLParams:
    """Wavenumbers and phases of the roll patterns imposed at the two ends."""

    eta_minus: float
    eta_plus: float
    phi_minus: float = 0.0
    phi_plus: float = 0.0

    def __post_init__(self) -> None:
        """Reject wavenumbers outside the Eckhaus-stable window."""
        for name, value in (("eta_minus", self.eta_minus), ("eta_plus", self.eta_plus)):
            if not abs(value) < EckhausConfig.BOUND:
                raise EckhausViolationError(name, value, EckhausConfig.BOUND)
        for name, value in (("phi_minus", self.phi_minus), ("phi_plus", self.phi_plus)):
            if not 0.0 <= value < 2.0 * math.pi:
                raise DomainError(name, value, "phase must lie in [0, 2pi)")

    @classmethod
    def from_ordering(cls, ordering: GLOrdering, pair: tuple[float, float] = EckhausConfig.CAPTION_PAIR) -> GLParams:
        """Pair in caption order (eta_-, eta_+) or swapped for the text order."""
        first, second = pair
        if ordering is GLOrdering.TEXT:
            first, second = second, first
        return cls(first, second)

    def roll(self, x: Any, side: str = "minus") -> FloatArray:
        """Roll pattern sqrt(1-eta^2) exp(i(eta x + phi)) as (real, imaginary) columns."""
        eta, phi = (self.eta_minus, self.phi_minus) if side == "minus" else (self.eta_plus, self.phi_plus)
        x = np.asarray(x, dtype=float)
        amplitude = math.sqrt(1.0 - eta**2)
        return np.stack([amplitude * np.cos(eta * x + phi), amplitude * np.sin(eta * x + phi)], axis=-1)


def gl_eta_profile(params: GLParams, grid: Grid, options: Optional[SolveOptions] = None) -> Profile:
    """Wavenumber profile solving (Phi(eta))'' + (y/2)eta' = 0 with eta(+-L) = eta_+-."""
    flux = EckhausFlux()
    profile = solve_profile(flux, params.eta_minus, params.eta_plus, grid, options)
    warnings = list(profile.warnings)
    if float(np.max(np.abs(profile.values))) >= flux.limit:
        message = "wavenumber profile reaches the Eckhaus clamp; solution is unreliable"
        logger.warning(message)
        warnings.append(message)
    return Profile(
        grid=profile.grid,
        values=profile.values,
        left_limit=profile.left_limit,
        right_limit=profile.right_limit,
        residual_norm=profile.residual_norm,
        newton_iterations=profile.newton_iterations,
        projection_count=profile.projection_count,
        continuation_steps=profile.continuation_steps,
        residual_history=profile.residual_history,
        labels=("eta",),
        warnings=tuple(warnings),
    )


def gl_psi_reconstruct(eta_profile: Profile, params: GLParams) -> PhaseProfile:
    """Phase profile psi(y) = eta_- y + int_{-L}^y (eta - eta_-), checked against the right-anchored form.

    Raises:
        PreconditionError: If the wavenumber profile is not a solved scalar profile
    """
    if not eta_profile.solved or eta_profile.components != 1:
        raise PreconditionError("gl_psi_reconstruct", "a solved scalar wavenumber profile")
    y = eta_profile.y
    eta = eta_profile.component(0)
    left_anchored = params.eta_minus * y + integrate.cumulative_trapezoid(eta - params.eta_minus, y, initial=0.0)
    tail = integrate.cumulative_trapezoid((eta - params.eta_plus)[::-1], -y[::-1], initial=0.0)[::-1]
    right_anchored = params.eta_plus * y - tail
    discrepancy = float(np.max(np.abs(left_anchored - right_anchored)))
    logger.debug("phase anchor discrepancy %.3e", discrepancy)
    return PhaseProfile(
        grid=eta_profile.grid,
        values=left_anchored,
        left_limit=left_anchored[:1],
        right_limit=left_anchored[-1:],
        residual_norm=eta_profile.residual_norm,
        newton_iterations=eta_profile.newton_iterations,
        residual_history=eta_profile.residual_history,
        labels=("psi",),
        warnings=eta_profile.warnings,
        wavenumber=eta,
        anchor_discrepancy=discrepancy,
    )


def gl_psi_residual(phase: PhaseProfile) -> FloatArray:
    """Steady phase residual (Phi(psi_y)) + (y/2) psi_y - psi/2 with psi_y the stored wavenumber."""
    assert phase.wavenumber is not None
    y = phase.y
    flux_term = np.gradient(eckhaus_phi(phase.wavenumber), phase.grid.spacing)
    return np.asarray(flux_term + 0.5 * y * phase.wavenumber - 0.5 * phase.component(0))
