"""Time-dependent simulators for the unscaled systems.

Every simulator advances a Field1D on a uniform grid and records snapshots at the times of a
TimeStepPolicy. Zero-flux ends treat the end nodes as half cells, so trapezoidal integrals of
the conserved quantities are exactly the discrete conserved sums.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from typing import Any, Optional, Union

import numpy as np
from scipy import integrate
from scipy.linalg import solve_banded

from simprof.constants import ReductionDefaults, SimulationDefaults
from simprof.exceptions import (
    CFLViolationError,
    DomainError,
    NegativityBudgetError,
    PreconditionError,
    ScaledWindowError,
)
from simprof.models import (
    BoundaryCondition,
    BoundaryKind,
    ConservationLedger,
    ConvergenceCurve,
    Field1D,
    FloatArray,
    PhaseProfile,
    Profile,
    SystemKind,
    TimeStepPolicy,
    Trajectory,
    ZeroTrack,
)
from simprof.profile_bvp import TurbulenceParams
from simprof.reaction_network import DiffusionMatrix, ReactionNetwork

logger = logging.getLogger(__name__)


def _tridiagonal(n: int, coupling: float, kind: BoundaryKind, shift: float = 0.0) -> FloatArray:
    """Banded form of I - coupling*L - shift*I with the given ends, for solve_banded((1, 1), ...)."""
    ab = np.zeros((3, n))
    ab[0, 1:] = -coupling
    ab[1, :] = 1.0 + 2.0 * coupling - shift
    ab[2, :-1] = -coupling
    if kind is BoundaryKind.DIRICHLET:
        ab[1, 0] = ab[1, -1] = 1.0
        ab[0, 1] = 0.0
        ab[2, -2] = 0.0
    else:
        # half cells at the ends
        ab[0, 1] = -2.0 * coupling
        ab[2, -2] = -2.0 * coupling
    return ab


class _Stepper(ABC):
    """State and update rule of one simulator."""

    labels: tuple[str, ...] = ()

    def __init__(self, initial: Field1D, policy: TimeStepPolicy) -> None:
        self.x = np.array(initial.x)
        self.h = initial.spacing
        self.values = np.array(initial.values, dtype=float)
        self.boundary = initial.boundary
        self.policy = policy
        self.inflow = np.zeros(self.values.shape[1])
        self.clamped = 0.0
        self.dirichlet = initial.boundary.kind is BoundaryKind.DIRICHLET
        if self.dirichlet:
            assert initial.boundary.left is not None and initial.boundary.right is not None
            self.values[0] = initial.boundary.left
            self.values[-1] = initial.boundary.right

    @abstractmethod
    def stable_dt(self) -> float:
        """Largest stable explicit step, infinite for implicit updates."""

    @abstractmethod
    def step(self, dt: float) -> None:
        """Advance the state by dt."""

    def default_dt(self) -> float:
        """Step used when neither stability nor the policy limits it."""
        return self.h

    def time_step(self, t: float) -> float:
        """Step size at time t.

        Raises:
            CFLViolationError: If the stable step falls below the floor
        """
        stable = self.stable_dt()
        dt = self.policy.cfl_fraction * stable if math.isfinite(stable) else self.default_dt()
        if self.policy.dt is not None:
            dt = min(dt, self.policy.dt)
        if self.policy.dt_max is not None:
            dt = min(dt, self.policy.dt_max)
        if dt < self.policy.dt_floor:
            raise CFLViolationError(dt, self.policy.dt_floor, t)
        return dt

    def record(self, t: float) -> dict[str, float]:
        """Scalar diagnostics at a snapshot."""
        return {}

    def snapshot(self, t: float) -> Field1D:
        """Copy of the current state."""
        return Field1D(self.x, self.values.copy(), t, self.boundary)

    def clamp(self, values: FloatArray) -> FloatArray:
        """Clamp negative entries to zero and charge the removed mass against the budget.

        Raises:
            NegativityBudgetError: If the clamped mass exceeds the budget relative to the total
        """
        negative = values < 0
        if not np.any(negative):
            return values
        self.clamped += float(-values[negative].sum() * self.h)
        total = float(np.abs(values).sum() * self.h)
        values = np.where(negative, 0.0, values)
        if total > 0 and self.clamped > SimulationDefaults.CLAMP_BUDGET * total:
            raise NegativityBudgetError(self.clamped / total, SimulationDefaults.CLAMP_BUDGET)
        logger.debug("clamped %.3e of negative mass", self.clamped)
        return values


def _march(
    stepper: _Stepper, start: float, policy: TimeStepPolicy
) -> tuple[list[Field1D], FloatArray, dict[str, FloatArray]]:
    """Advance through the snapshot times, recording state, inflow and diagnostics."""
    snapshots: list[Field1D] = []
    inflow: list[FloatArray] = []
    diagnostics: dict[str, list[float]] = {}
    t = start
    steps = 0
    for target in policy.snapshot_times:
        tolerance = SimulationDefaults.TIME_TOLERANCE * max(1.0, abs(target))
        if target < t - tolerance:
            raise DomainError("snapshot_times", target, f"precedes the initial time {start}")
        while target - t > tolerance:
            dt = min(stepper.time_step(t), target - t)
            stepper.step(dt)
            t += dt
            steps += 1
        t = target
        snapshots.append(stepper.snapshot(t))
        inflow.append(stepper.inflow.copy())
        for name, value in stepper.record(t).items():
            diagnostics.setdefault(name, []).append(value)
    logger.info("%s finished after %d steps at t=%.6g", type(stepper).__name__, steps, t)
    return snapshots, np.array(inflow), {name: np.asarray(series) for name, series in diagnostics.items()}


class _PMEStepper(_Stepper):
    """Explicit conservative update with face flux u_{i+1}^m - u_i^m."""

    labels = ("u",)

    def __init__(self, m: float, initial: Field1D, policy: TimeStepPolicy) -> None:
        super().__init__(initial, policy)
        self.m = m

    def stable_dt(self) -> float:
        peak = float(self.values.max())
        if self.m == 1.0:
            return 0.5 * self.h**2
        if peak <= 0:
            return math.inf
        return self.h**2 / (2.0 * self.m * peak ** (self.m - 1.0))

    def default_dt(self) -> float:
        return self.policy.final_time

    def step(self, dt: float) -> None:
        u = self.values[:, 0]
        um = u**self.m
        face = um[1:] - um[:-1]
        du = np.zeros_like(u)
        du[1:-1] = face[1:] - face[:-1]
        if self.dirichlet:
            self.inflow[0] += dt / self.h * (face[-1] - face[0])
        else:
            du[0] = 2.0 * face[0]
            du[-1] = -2.0 * face[-1]
        self.values[:, 0] = self.clamp(u + dt / self.h**2 * du)


def run_pme(m: float, initial: Field1D, policy: TimeStepPolicy) -> Trajectory:
    """Porous medium equation u_t = (u^m)_xx with Dirichlet reservoirs or zero-flux ends.

    Raises:
        DomainError: If m < 1 or the initial data is negative
        CFLViolationError: If the stable step falls below the policy floor
    """
    if m < 1:
        raise DomainError("m", m, "porous medium exponent must be at least 1")
    if np.any(initial.values < 0):
        raise DomainError("initial", float(initial.values.min()), "porous medium data must be nonnegative")
    stepper = _PMEStepper(m, initial, policy)
    snapshots, inflow, diagnostics = _march(stepper, initial.t, policy)
    return Trajectory(
        system=SystemKind.PME,
        snapshots=tuple(snapshots),
        boundary_inflow=inflow,
        clamped_mass=stepper.clamped,
        diagnostics=diagnostics,
        labels=stepper.labels,
    )


class _RDSStepper(_Stepper):
    """Implicit diffusion with explicit reaction sub-steps."""

    def __init__(
        self, network: ReactionNetwork, diffusion: DiffusionMatrix, initial: Field1D, policy: TimeStepPolicy
    ) -> None:
        super().__init__(initial, policy)
        self.network = network
        self.d = diffusion.values
        self.labels = tuple(f"c{k + 1}" for k in range(network.species_count))
        self._direction_size = float(np.abs(network.directions).sum(axis=0).max())
        self._banded: dict[tuple[float, int], FloatArray] = {}

    def stable_dt(self) -> float:
        return math.inf

    def _reaction_stiffness(self) -> float:
        order = self.network.max_order
        peak = max(1.0, float(self.values.max()))
        return self.network.max_rate_constant * order * peak ** (order - 1.0) * self._direction_size

    def step(self, dt: float) -> None:
        reacting = slice(1, -1) if self.dirichlet else slice(None)
        substeps = max(1, math.ceil(self._reaction_stiffness() * dt / SimulationDefaults.REACTION_SUBSTEP_LIMIT))
        sub_dt = dt / substeps
        for _ in range(substeps):
            block = self.values[reacting]
            self.values[reacting] = block + sub_dt * self.network.rate(block)
            self.values = self.clamp(self.values)
        kind = self.boundary.kind
        for j, d in enumerate(self.d):
            key = (dt, j)
            if key not in self._banded:
                self._banded[key] = _tridiagonal(len(self.x), dt * d / self.h**2, kind)
            rhs = self.values[:, j].copy()
            if self.dirichlet:
                assert self.boundary.left is not None and self.boundary.right is not None
                rhs[0] = self.boundary.left[j]
                rhs[-1] = self.boundary.right[j]
            column = solve_banded((1, 1), self._banded[key], rhs)
            if self.dirichlet:
                self.inflow[j] += dt * d / self.h * ((column[0] - column[1]) + (column[-1] - column[-2]))
            self.values[:, j] = column
        self.values = self.clamp(self.values)

    def record(self, t: float) -> dict[str, float]:
        return {"equilibrium_defect": float(np.max(self.network.equilibrium_defect(self.values)))}


def run_rds(
    network: ReactionNetwork,
    diffusion: DiffusionMatrix,
    initial: Field1D,
    policy: TimeStepPolicy,
) -> Trajectory:
    """Reaction-diffusion system c_t = D c_xx + R(c) with the conserved quantities Q c tracked.

    Raises:
        DomainError: If the initial data is negative or has the wrong number of species
        PreconditionError: If Dirichlet reservoir values are not reaction equilibria
        NegativityBudgetError: If clamping removes more than the budget
    """
    if initial.components != network.species_count:
        raise DomainError("initial", initial.components, f"expected {network.species_count} species")
    if np.any(initial.values < 0):
        raise DomainError("initial", float(initial.values.min()), "concentrations must be nonnegative")
    if initial.boundary.kind is BoundaryKind.DIRICHLET:
        ends = np.vstack([initial.boundary.left, initial.boundary.right])
        if np.max(network.equilibrium_defect(ends)) > ReductionDefaults.CONSTRAINT_TOLERANCE:
            raise PreconditionError("run_rds", "reservoir values in reaction equilibrium")
    stepper = _RDSStepper(network, diffusion, initial, policy)
    snapshots, inflow, diagnostics = _march(stepper, initial.t, policy)
    return Trajectory(
        system=SystemKind.RDS,
        snapshots=tuple(snapshots),
        boundary_inflow=inflow,
        clamped_mass=stepper.clamped,
        conservation=network.conservation,
        diagnostics=diagnostics,
        labels=stepper.labels,
    )


class _TurbulenceStepper(_Stepper):
    """Explicit conservative update of (v, k) with arithmetic-mean face mobilities."""

    labels = ("v", "k")

    def __init__(self, params: TurbulenceParams, initial: Field1D, policy: TimeStepPolicy) -> None:
        super().__init__(initial, policy)
        self.params = params

    def stable_dt(self) -> float:
        peak = float(self.values[:, 1].max())
        if peak <= 0:
            return math.inf
        coefficient = max(self.params.eta_visc, self.params.kappa_diff) * peak**self.params.beta_exp
        return self.h**2 / (2.0 * coefficient)

    def default_dt(self) -> float:
        return self.policy.final_time

    def step(self, dt: float) -> None:
        v, k = self.values[:, 0], self.values[:, 1]
        h = self.h
        kb = k**self.params.beta_exp
        ka = k**self.params.alpha_exp
        mobility = 0.5 * (kb[1:] + kb[:-1])
        source_mobility = 0.5 * (ka[1:] + ka[:-1])
        dv = (v[1:] - v[:-1]) / h
        flux_v = self.params.eta_visc * mobility * dv
        flux_k = self.params.kappa_diff * mobility * (k[1:] - k[:-1]) / h
        face_source = self.params.eta_visc * source_mobility * dv**2
        new_v = v.copy()
        new_k = k.copy()
        new_v[1:-1] += dt / h * (flux_v[1:] - flux_v[:-1])
        new_k[1:-1] += dt / h * (flux_k[1:] - flux_k[:-1]) + 0.5 * dt * (face_source[1:] + face_source[:-1])
        if self.dirichlet:
            self.inflow += dt * np.array([flux_v[-1] - flux_v[0], flux_k[-1] - flux_k[0]])
        else:
            new_v[0] += 2.0 * dt / h * flux_v[0]
            new_v[-1] -= 2.0 * dt / h * flux_v[-1]
            new_k[0] += 2.0 * dt / h * flux_k[0] + dt * face_source[0]
            new_k[-1] += -2.0 * dt / h * flux_k[-1] + dt * face_source[-1]
        self.values[:, 0] = new_v
        self.values[:, 1] = self.clamp(new_k)


def run_turbulence(params: TurbulenceParams, initial: Field1D, policy: TimeStepPolicy) -> Trajectory:
    """Two-field turbulence model in one dimension.

    Raises:
        DomainError: If the field does not have the components (v, k), k < 0 or d != 1
    """
    if params.dimension != 1:
        raise DomainError("d", params.dimension, "only one-dimensional simulation is supported")
    if initial.components != 2:
        raise DomainError("initial", initial.components, "turbulence fields have the components (v, k)")
    if np.any(initial.values[:, 1] < 0):
        raise DomainError("k", float(initial.values[:, 1].min()), "turbulent kinetic energy must be nonnegative")
    stepper = _TurbulenceStepper(params, initial, policy)
    snapshots, inflow, diagnostics = _march(stepper, initial.t, policy)
    return Trajectory(
        system=SystemKind.TURBULENCE,
        snapshots=tuple(snapshots),
        boundary_inflow=inflow,
        clamped_mass=stepper.clamped,
        diagnostics=diagnostics,
        labels=stepper.labels,
    )


def locate_zeros(x: FloatArray, values: FloatArray) -> FloatArray:
    """Zeros of a sampled function by sign changes and linear interpolation."""
    left, right = values[:-1], values[1:]
    exact = np.flatnonzero(values == 0.0)
    crossing = np.flatnonzero(left * right < 0)
    positions = x[crossing] - left[crossing] * (x[crossing + 1] - x[crossing]) / (right[crossing] - left[crossing])
    return np.sort(np.concatenate([positions, x[exact]]))


class _ZeroTracker:
    """Greedy nearest-neighbour matching of zeros between snapshots."""

    def __init__(self, max_jump: float) -> None:
        self.max_jump = max_jump
        self.tracks: list[ZeroTrack] = []
        self._active: list[int] = []

    def update(self, t: float, zeros: FloatArray) -> None:
        pairs = sorted(
            (abs(self.tracks[index].positions[-1] - z), index, k)
            for index in self._active
            for k, z in enumerate(zeros)
        )
        matched_tracks: set[int] = set()
        matched_zeros: set[int] = set()
        for distance, index, k in pairs:
            if distance > self.max_jump:
                break
            if index in matched_tracks or k in matched_zeros:
                continue
            self.tracks[index].append(t, float(zeros[k]))
            matched_tracks.add(index)
            matched_zeros.add(k)
        for index in self._active:
            if index not in matched_tracks:
                track = self.tracks[index]
                track.terminated = True
                track.flag = "annihilated"
                logger.debug("zero track at x=%.4g terminated at t=%.6g", track.positions[-1], t)
        self._active = sorted(matched_tracks)
        for k, z in enumerate(zeros):
            if k not in matched_zeros:
                track = ZeroTrack()
                track.append(t, float(z))
                self.tracks.append(track)
                self._active.append(len(self.tracks) - 1)


def amplitude_defect(x: FloatArray, values: FloatArray) -> float:
    """sup |rho^2 + (d/dx arg A)^2 - 1| over nodes where the amplitude is not negligible."""
    re, im = values[:, 0], values[:, 1]
    rho2 = re**2 + im**2
    dre = np.gradient(re, x)
    dim = np.gradient(im, x)
    usable = rho2 > SimulationDefaults.AMPLITUDE_FLOOR
    wavenumber = (re[usable] * dim[usable] - im[usable] * dre[usable]) / rho2[usable]
    return float(np.max(np.abs(rho2[usable] + wavenumber**2 - 1.0))) if np.any(usable) else 0.0


class _GLStepper(_Stepper):
    """Semi-implicit real Ginzburg-Landau update: linear part implicit, cubic part explicit."""

    labels = ("re", "im")

    def __init__(self, initial: Field1D, policy: TimeStepPolicy) -> None:
        super().__init__(initial, policy)
        self.tracker = _ZeroTracker(SimulationDefaults.ZERO_MATCH_JUMP_CELLS * self.h)
        self._banded: dict[float, FloatArray] = {}

    def stable_dt(self) -> float:
        return math.inf

    def default_dt(self) -> float:
        return SimulationDefaults.GL_TIME_STEP

    def step(self, dt: float) -> None:
        a = self.values
        if dt not in self._banded:
            self._banded[dt] = _tridiagonal(len(self.x), dt / self.h**2, self.boundary.kind, shift=dt)
        rhs = a - dt * (a**2).sum(axis=1, keepdims=True) * a
        if self.dirichlet:
            rhs[0] = self.boundary.left
            rhs[-1] = self.boundary.right
        self.values = solve_banded((1, 1), self._banded[dt], rhs)

    def record(self, t: float) -> dict[str, float]:
        zeros = locate_zeros(self.x, self.values[:, 0])
        self.tracker.update(t, zeros)
        return {"amplitude_defect": amplitude_defect(self.x, self.values), "zero_count": float(zeros.size)}


def run_gl(initial: Field1D, policy: TimeStepPolicy) -> Trajectory:
    """Real Ginzburg-Landau equation A_t = A_xx + A - |A|^2 A with zeros of Re A tracked.

    The complex field is stored as the components (Re A, Im A). Zero tracks that lose their zero
    between snapshots are terminated and flagged.
    """
    if initial.components != 2:
        raise DomainError("initial", initial.components, "complex fields have the components (re, im)")
    if not np.all(np.isfinite(initial.values)):
        raise DomainError("initial", "non-finite", "amplitude must be bounded")
    stepper = _GLStepper(initial, policy)
    snapshots, inflow, diagnostics = _march(stepper, initial.t, policy)
    return Trajectory(
        system=SystemKind.GINZBURG_LANDAU,
        snapshots=tuple(snapshots),
        boundary_inflow=inflow,
        diagnostics=diagnostics,
        zero_tracks=tuple(stepper.tracker.tracks),
        labels=stepper.labels,
    )


def roll_field(x: Any, eta: float, phi: float = 0.0, t: float = 0.0) -> Field1D:
    """Pure roll sqrt(1-eta^2) exp(i(eta x + phi)) with its own values imposed at the ends."""
    x = np.asarray(x, dtype=float)
    amplitude = math.sqrt(1.0 - eta**2)
    values = np.stack([amplitude * np.cos(eta * x + phi), amplitude * np.sin(eta * x + phi)], axis=-1)
    return Field1D(x, values, t, BoundaryCondition.dirichlet(values[0], values[-1]))


def self_similar_gl_field(phase: PhaseProfile, x: Any, t: float = 0.0) -> Field1D:
    """Field rho exp(i psi) with psi = sqrt(1+t) psi_bar(x/sqrt(1+t)), extended linearly beyond the profile grid."""
    assert phase.wavenumber is not None
    x = np.asarray(x, dtype=float)
    scale = math.sqrt(1.0 + t)
    y = x / scale
    nodes = phase.y
    psi_bar = phase.component(0)
    eta_bar = np.array(phase.wavenumber)
    psi = np.interp(y, nodes, psi_bar)
    eta = np.interp(y, nodes, eta_bar)
    below, above = y < nodes[0], y > nodes[-1]
    psi = np.where(below, psi_bar[0] + eta_bar[0] * (y - nodes[0]), psi)
    psi = np.where(above, psi_bar[-1] + eta_bar[-1] * (y - nodes[-1]), psi)
    amplitude = np.sqrt(1.0 - eta**2)
    phase_values = scale * psi
    values = np.stack([amplitude * np.cos(phase_values), amplitude * np.sin(phase_values)], axis=-1)
    return Field1D(x, values, t, BoundaryCondition.dirichlet(values[0], values[-1]))


def scaled_convergence(
    trajectory: Trajectory,
    reference: Profile,
    alpha: float,
    beta: float,
    *,
    component: int = 0,
    window: Optional[float] = None,
) -> ConvergenceCurve:
    """Max-norm distance of (1+t)^alpha u(t, y(1+t)^beta) to a reference profile per snapshot.

    Args:
        trajectory: Simulated trajectory
        reference: Profile in scaled variables
        alpha: Amplitude exponent
        beta: Spatial exponent
        component: Field component compared with the reference
        window: Restrict the comparison to |y| <= window

    Raises:
        ScaledWindowError: If the scaled window exceeds the simulation domain at some snapshot
    """
    y = reference.y
    ref = reference.component(0 if reference.components == 1 else component)
    if window is not None:
        keep = np.abs(y) <= window
        y, ref = y[keep], ref[keep]
    reach = float(np.max(np.abs(y)))
    errors = []
    for snap in trajectory.snapshots:
        stretch = (1.0 + snap.t) ** beta
        if reach * stretch > snap.half_width * (1.0 + 1e-12):
            max_time = (snap.half_width / reach) ** (1.0 / beta) - 1.0
            raise ScaledWindowError(snap.t, max_time)
        sampled = np.interp(y * stretch, snap.x, snap.values[:, component])
        errors.append(float(np.max(np.abs((1.0 + snap.t) ** alpha * sampled - ref))))
    return ConvergenceCurve(trajectory.times, np.asarray(errors), alpha, beta)


def conserved_quantities(trajectory: Trajectory) -> ConservationLedger:
    """Trapezoidal integrals of the conserved quantities of each snapshot."""
    series: dict[str, list[float]] = {}

    def add(name: str, x: FloatArray, density: Union[FloatArray, Any]) -> None:
        series.setdefault(name, []).append(float(integrate.trapezoid(density, x)))

    for snap in trajectory.snapshots:
        x, values = snap.x, snap.values
        if trajectory.system is SystemKind.PME:
            add("mass", x, values[:, 0])
        elif trajectory.system is SystemKind.RDS:
            conserved = values @ trajectory.conservation.T if trajectory.conservation is not None else values
            for j in range(conserved.shape[1]):
                add(f"u{j + 1}", x, conserved[:, j])
            for i in range(values.shape[1]):
                add(f"c{i + 1}", x, values[:, i])
        elif trajectory.system is SystemKind.TURBULENCE:
            v, k = values[:, 0], values[:, 1]
            add("momentum", x, v)
            add("energy", x, 0.5 * v**2 + k)
            add("kinetic", x, 0.5 * v**2)
            add("turbulent", x, k)
        else:
            add("norm", x, (values**2).sum(axis=1))
    return ConservationLedger(
        trajectory.times,
        {name: np.asarray(values) for name, values in series.items()},
    )
