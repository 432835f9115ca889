"""Composition root: turns a validated run configuration into computations and artifacts."""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Collection, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
from scipy import integrate

from simprof.artifacts import (
    flux_curves,
    profile_curves,
    write_csv,
    write_report,
    write_trajectory_csv,
    write_zero_tracks_csv,
)
from simprof.config import ProblemTag, RunConfig
from simprof.constants import DefaultValues
from simprof.core import CurvePlotter, create_plotter
from simprof.evolution import (
    conserved_quantities,
    run_gl,
    run_pme,
    run_rds,
    run_turbulence,
    scaled_convergence,
    self_similar_gl_field,
)
from simprof.exceptions import ConfigValidationError, SingularityError, SolverError
from simprof.flux_ness import (
    exact_turbulence_fluxes,
    infiltration_report,
    lagrange_multiplier,
    nonlinear_flux,
    turbulence_fluxes,
    zero_speed_profile,
)
from simprof.models import (
    BoundaryCondition,
    CurveSet,
    FloatArray,
    Field1D,
    OutputFormat,
    PhaseProfile,
    Profile,
    RunReport,
    Trajectory,
)
from simprof.profile_bvp import (
    GLParams,
    PMEParams,
    PowerFlux,
    TurbulenceParams,
    barenblatt,
    composed_concentration_profile,
    gl_eta_profile,
    gl_psi_reconstruct,
    gl_psi_residual,
    solve_profile,
    turbulence_exact,
    turbulence_exact_residuals,
    turbulence_similarity_pair,
    uniform_estimate_constant,
)
from simprof.reaction_network import DiffusionMatrix, EffectiveDiffusion, ReactionNetwork, reduce_psi

logger = logging.getLogger(__name__)

# Central zeros of the mixed Ginzburg-Landau run lie within this similarity-variable window.
CENTRAL_ZERO_WINDOW = 2.0


@dataclass
class RunOutputs:
    """Curves and trajectories produced by one run, keyed by artifact stem."""

    curves: dict[str, CurveSet] = field(default_factory=dict)
    trajectory: Optional[Trajectory] = None


def _max_abs(values: Any) -> float:
    array = np.abs(np.asarray(values, dtype=float))
    finite = array[np.isfinite(array)]
    return float(finite.max()) if finite.size else 0.0


def _record_profile(report: RunReport, name: str, profile: Profile) -> None:
    report.residual_norms[name] = profile.residual_norm
    report.iterations[name] = profile.newton_iterations
    report.diagnostics[f"{name}_projections"] = profile.projection_count
    report.diagnostics[f"{name}_continuation_steps"] = profile.continuation_steps
    report.warnings.extend(profile.warnings)


def _record_ledger(report: RunReport, trajectory: Trajectory) -> CurveSet:
    ledger = conserved_quantities(trajectory)
    report.ledgers = {
        "times": ledger.times.tolist(),
        "quantities": {name: series.tolist() for name, series in ledger.quantities.items()},
        "relative_drift": {name: ledger.relative_drift(name) for name in ledger.quantities},
        "boundary_inflow": trajectory.boundary_inflow.tolist(),
        "clamped_mass": trajectory.clamped_mass,
    }
    for name, series in trajectory.diagnostics.items():
        report.diagnostics[name] = series.tolist()
    return CurveSet("t", ledger.times, dict(ledger.quantities), "conserved quantities")


def _auto_window(config: RunConfig, beta: float) -> float:
    """Largest similarity window that stays inside [-X, X] up to the final snapshot."""
    if config.window is not None:
        return config.window
    final = config.time_policy.final_time
    domain = config.domain.half_width
    return min(config.half_width, domain / (1.0 + final) ** beta) * (1.0 - 1e-9)


def _interpolate(profile: Profile, x: FloatArray) -> FloatArray:
    """Profile values at x, held constant beyond its grid."""
    return np.stack([np.interp(x, profile.y, profile.component(k)) for k in range(profile.components)], axis=-1)


def _pme_barenblatt(config: RunConfig, report: RunReport) -> RunOutputs:
    assert config.mass_parameter is not None
    y = config.grid.nodes
    profiles: dict[str, Any] = {}
    fluxes: dict[str, Any] = {}
    constants: dict[str, float] = {}
    for m in config.exponents:
        closed = barenblatt(PMEParams(m, mass_parameter=config.mass_parameter), config.dimension)
        label = f"m={m:g}"
        profiles[f"W_{label}"] = closed(y)
        fluxes[f"Q_{label}"] = closed.flux(y)
        constants[label] = closed.constant
        report.residual_norms[f"barenblatt_{label}"] = _max_abs(closed.steady_residual(y))
        report.diagnostics.setdefault("support_radius", {})[label] = closed.support_radius
        report.diagnostics.setdefault("total_mass", {})[label] = closed.total_mass
    report.diagnostics["c_m"] = constants
    report.flux_summaries["max_abs_flux"] = {name: _max_abs(values) for name, values in fluxes.items()}
    title = config.title or "Barenblatt profiles"
    return RunOutputs(
        curves={
            DefaultValues.PROFILE_STEM: CurveSet("y", y, profiles, title),
            DefaultValues.FLUXES_STEM: CurveSet("y", y, fluxes, f"{title}: fluxes"),
        }
    )


def _mixing_profile(config: RunConfig, report: RunReport) -> Profile:
    assert config.m is not None and config.u_minus is not None and config.u_plus is not None
    params = PMEParams(config.m, left=config.u_minus[0], right=config.u_plus[0])
    profile = solve_profile(PowerFlux(params.m), params.left, params.right, config.grid, config.solve_options)
    _record_profile(report, DefaultValues.PROFILE_STEM, profile)
    report.diagnostics["uniform_estimate_constant"] = uniform_estimate_constant(profile, PowerFlux(params.m))
    return profile


def _pme_mixing(config: RunConfig, report: RunReport) -> RunOutputs:
    assert config.m is not None
    profile = _mixing_profile(config, report)
    flux = nonlinear_flux(profile, PowerFlux(config.m))[:, 0]
    report.flux_summaries["max_abs_flux"] = _max_abs(flux)
    if profile.right_limit[0] == 0.0:
        infiltration = infiltration_report(profile, config.m)
        report.flux_summaries["Q0"] = infiltration.q0
        report.flux_summaries["M0"] = infiltration.mass0
        report.flux_summaries["mass_exponent"] = infiltration.exponent
    title = config.title or "porous medium mixing profile"
    return RunOutputs(
        curves={
            DefaultValues.PROFILE_STEM: profile_curves(profile, title),
            DefaultValues.FLUXES_STEM: CurveSet("y", profile.y, {"Q": flux}, f"{title}: flux"),
        }
    )


def _pme_simulate(config: RunConfig, report: RunReport) -> RunOutputs:
    assert config.m is not None
    x = config.domain.nodes
    if config.mass_parameter is not None:
        params = PMEParams(config.m, mass_parameter=config.mass_parameter)
        closed = barenblatt(params)
        reference = closed.to_profile(config.grid)
        initial = Field1D(x, closed(x), 0.0, BoundaryCondition.neumann_zero())
    else:
        assert config.u_minus is not None and config.u_plus is not None
        params = PMEParams(config.m, left=config.u_minus[0], right=config.u_plus[0])
        reference = _mixing_profile(config, report)
        initial = Field1D(x, _interpolate(reference, x), 0.0, BoundaryCondition.dirichlet(params.left, params.right))
    trajectory = run_pme(config.m, initial, config.time_policy)
    window = _auto_window(config, params.beta)
    convergence = scaled_convergence(trajectory, reference, params.alpha, params.beta, window=window)
    report.diagnostics["scaled_error"] = convergence.errors.tolist()
    report.diagnostics["scaled_window"] = window
    ledger = _record_ledger(report, trajectory)
    if not params.is_barenblatt and params.right == 0.0:
        half_line = x >= 0
        mass = np.array([integrate.trapezoid(s.values[half_line, 0], x[half_line]) for s in trajectory.snapshots])
        predicted = mass[0] * np.sqrt(1.0 + trajectory.times) / math.sqrt(1.0 + trajectory.times[0])
        report.ledgers["half_line_mass"] = mass.tolist()
        report.ledgers["mass_law"] = predicted.tolist()
    title = config.title or "porous medium simulation"
    return RunOutputs(
        curves={
            DefaultValues.PROFILE_STEM: profile_curves(reference, title),
            DefaultValues.CONVERGENCE_STEM: CurveSet(
                "t", convergence.times, {"scaled_error": convergence.errors}, f"{title}: scaled distance"
            ),
            DefaultValues.LEDGER_STEM: ledger,
        },
        trajectory=trajectory,
    )


def _rds_setup(config: RunConfig, report: RunReport) -> tuple[ReactionNetwork, DiffusionMatrix, FloatArray, FloatArray]:
    assert config.network is not None and config.diffusion is not None
    network = config.network.build()
    values = config.diffusion * network.species_count if len(config.diffusion) == 1 else config.diffusion
    diffusion = DiffusionMatrix(tuple(values))
    if config.u_minus is not None and config.u_plus is not None:
        u_minus, u_plus = np.asarray(config.u_minus), np.asarray(config.u_plus)
    else:
        assert config.c_minus is not None and config.c_plus is not None
        for key, c in (("C_minus", config.c_minus), ("C_plus", config.c_plus)):
            if len(c) != network.species_count:
                raise ConfigValidationError(key, f"expected {network.species_count} concentrations")
        c_minus, c_plus = np.asarray(config.c_minus), np.asarray(config.c_plus)
        u_minus, u_plus = network.conservation @ c_minus, network.conservation @ c_plus
        for key, c, u in (("C_minus", c_minus, u_minus), ("C_plus", c_plus, u_plus)):
            gap = _max_abs(reduce_psi(network, u) - c)
            if gap > 1e-8:
                message = f"{key} is not a reaction equilibrium; using Psi(Q {key}) (distance {gap:.3e})"
                logger.warning(message)
                report.warnings.append(message)
    for key, u in (("U_minus", u_minus), ("U_plus", u_plus)):
        if u.size != network.conserved_count:
            raise ConfigValidationError(key, f"expected {network.conserved_count} conserved quantities")
    return network, diffusion, u_minus, u_plus


def _rds_profile(config: RunConfig, report: RunReport) -> RunOutputs:
    network, diffusion, u_minus, u_plus = _rds_setup(config, report)
    flux = EffectiveDiffusion(network, diffusion)
    u_profile = solve_profile(flux, u_minus, u_plus, config.grid, config.solve_options)
    _record_profile(report, DefaultValues.PROFILE_STEM, u_profile)
    report.diagnostics["uniform_estimate_constant"] = uniform_estimate_constant(u_profile, flux)
    c_profile = composed_concentration_profile(u_profile, network.reduction)
    fluxes = lagrange_multiplier(c_profile, diffusion, network)
    report.residual_norms["stoichiometric"] = fluxes.stoichiometric_residual
    report.residual_norms["decomposition"] = fluxes.decomposition_residual
    report.diagnostics["constraint_violation"] = fluxes.constraint_violation
    report.warnings.extend(fluxes.warnings)
    report.flux_summaries = {
        "max_abs_diffusive": [_max_abs(fluxes.diffusive[:, j]) for j in range(network.species_count)],
        "max_abs_multiplier": [_max_abs(fluxes.multipliers[:, r]) for r in range(network.reaction_count)],
    }
    columns = {label: c_profile.component(k) for k, label in enumerate(c_profile.labels)}
    columns.update({f"U{k + 1}": u_profile.component(k) for k in range(u_profile.components)})
    title = config.title or f"{network.name} profile"
    return RunOutputs(
        curves={
            DefaultValues.PROFILE_STEM: CurveSet("y", c_profile.y, columns, title),
            DefaultValues.FLUXES_STEM: flux_curves(fluxes, c_profile.labels, f"{title}: fluxes"),
        }
    )


def _rds_simulate(config: RunConfig, report: RunReport) -> RunOutputs:
    network, diffusion, u_minus, u_plus = _rds_setup(config, report)
    flux = EffectiveDiffusion(network, diffusion)
    u_profile = solve_profile(flux, u_minus, u_plus, config.grid, config.solve_options)
    _record_profile(report, DefaultValues.PROFILE_STEM, u_profile)
    reference = composed_concentration_profile(u_profile, network.reduction)
    x = config.domain.nodes
    c_minus, c_plus = reference.left_limit, reference.right_limit
    if config.initial_data == "step":
        values = np.where((x < 0)[:, np.newaxis], c_minus[np.newaxis, :], c_plus[np.newaxis, :])
    else:
        values = _interpolate(reference, x)
    initial = Field1D(x, values, 0.0, BoundaryCondition.dirichlet(c_minus, c_plus))
    trajectory = run_rds(network, diffusion, initial, config.time_policy)
    window = _auto_window(config, 0.5)
    columns = {
        label: scaled_convergence(trajectory, reference, 0.0, 0.5, component=k, window=window).errors
        for k, label in enumerate(reference.labels)
    }
    report.diagnostics["scaled_window"] = window
    ledger = _record_ledger(report, trajectory)
    title = config.title or f"{network.name} simulation"
    return RunOutputs(
        curves={
            DefaultValues.PROFILE_STEM: profile_curves(reference, title),
            DefaultValues.CONVERGENCE_STEM: CurveSet("t", trajectory.times, columns, f"{title}: scaled distance"),
            DefaultValues.LEDGER_STEM: ledger,
        },
        trajectory=trajectory,
    )


def _turbulence_params(config: RunConfig) -> TurbulenceParams:
    return TurbulenceParams(config.eta_visc, config.kappa_diff, config.alpha_exp, config.beta_exp, config.dimension)


def _turbulence_exact(config: RunConfig, report: RunReport) -> RunOutputs:
    assert config.turbulence_half_width is not None
    half_width = config.turbulence_half_width
    exact = turbulence_exact(half_width)
    y = config.grid.nodes
    momentum, energy = turbulence_exact_residuals(half_width, y)
    report.residual_norms["momentum_equation"] = _max_abs(momentum)
    report.residual_norms["energy_equation"] = _max_abs(energy)
    inside = np.abs(y) <= half_width
    report.diagnostics["energy_density_defect"] = _max_abs(exact.energy(y[inside]) - half_width**2 / 4.0)
    fluxes = exact_turbulence_fluxes(exact, y)
    report.flux_summaries = {
        "max_abs_momentum_flux": _max_abs(fluxes.momentum_flux),
        "max_abs_kinetic_flux": _max_abs(fluxes.kinetic_flux),
        "max_source": _max_abs(fluxes.source),
    }
    title = config.title or "exact turbulence solution"
    return RunOutputs(
        curves={
            DefaultValues.PROFILE_STEM: CurveSet(
                "y", y, {"V": exact.velocity(y), "K": exact.turbulent_energy(y), "e": exact.energy(y)}, title
            ),
            DefaultValues.FLUXES_STEM: CurveSet(
                "y",
                y,
                {"Q_mom": fluxes.momentum_flux, "Q_kin": fluxes.kinetic_flux, "S_kin": fluxes.source},
                f"{title}: fluxes",
            ),
        }
    )


def _turbulence_simulate(config: RunConfig, report: RunReport) -> RunOutputs:
    params = _turbulence_params(config)
    x = config.domain.nodes
    curves: dict[str, CurveSet] = {}
    title = config.title or "turbulence simulation"
    if config.turbulence_half_width is not None:
        exact = turbulence_exact(config.turbulence_half_width)
        values = np.stack([exact.velocity(x), exact.turbulent_energy(x)], axis=-1)
        initial = Field1D(x, values, 0.0, BoundaryCondition.dirichlet(values[0], values[-1]))
        y = config.grid.nodes
        reference = Profile(
            grid=config.grid,
            values=np.stack([exact.velocity(y), exact.turbulent_energy(y)], axis=-1),
            left_limit=[exact.velocity(y[0]), 0.0],
            right_limit=[exact.velocity(y[-1]), 0.0],
            labels=("V", "K"),
        )
        trajectory = run_turbulence(params, initial, config.time_policy)
        window = _auto_window(config, 0.5)
        columns = {
            label: scaled_convergence(trajectory, reference, 0.0, 0.5, component=k, window=window).errors
            for k, label in enumerate(reference.labels)
        }
        curves[DefaultValues.CONVERGENCE_STEM] = CurveSet("t", trajectory.times, columns, f"{title}: scaled distance")
        curves[DefaultValues.PROFILE_STEM] = profile_curves(reference, title)
    else:
        assert config.mass_parameter is not None
        pair = turbulence_similarity_pair(params, config.mass_parameter, config.momentum)
        v, k = pair.velocity(x), pair.turbulent_energy(x)
        initial = Field1D(x, np.stack([v, k], axis=-1), 0.0, BoundaryCondition.neumann_zero())
        trajectory = run_turbulence(params, initial, config.time_policy)
        curves[DefaultValues.PROFILE_STEM] = CurveSet("x", x, {"v": v, "k": k}, f"{title}: initial data")
    final = trajectory.snapshots[-1]
    fluxes = turbulence_fluxes(final.x, final.values[:, 0], final.values[:, 1])
    report.flux_summaries = {
        "max_abs_momentum_flux": _max_abs(fluxes.momentum_flux),
        "max_abs_kinetic_flux": _max_abs(fluxes.kinetic_flux),
        "max_source": _max_abs(fluxes.source),
    }
    curves[DefaultValues.LEDGER_STEM] = _record_ledger(report, trajectory)
    return RunOutputs(curves=curves, trajectory=trajectory)


def _gl_phase(config: RunConfig, report: RunReport) -> PhaseProfile:
    if config.eta_minus is not None and config.eta_plus is not None:
        params = GLParams(config.eta_minus, config.eta_plus)
    else:
        params = GLParams.from_ordering(config.ordering)
    report.diagnostics["eta_pair"] = [params.eta_minus, params.eta_plus]
    eta_profile = gl_eta_profile(params, config.grid, config.solve_options)
    _record_profile(report, DefaultValues.PROFILE_STEM, eta_profile)
    phase = gl_psi_reconstruct(eta_profile, params)
    report.diagnostics["anchor_discrepancy"] = phase.anchor_discrepancy
    report.residual_norms["phase_equation"] = _max_abs(gl_psi_residual(phase)[1:-1])
    return phase


def _phase_columns(phase: PhaseProfile, report: RunReport) -> dict[str, Any]:
    assert phase.wavenumber is not None
    columns: dict[str, Any] = {"eta": phase.wavenumber, "psi": phase.component(0)}
    try:
        columns["V"] = zero_speed_profile(phase)
    except SingularityError as err:
        message = f"zero speed profile omitted: {err}"
        logger.warning(message)
        report.warnings.append(message)
    return columns


def _gl_profile(config: RunConfig, report: RunReport) -> RunOutputs:
    phase = _gl_phase(config, report)
    title = config.title or "Ginzburg-Landau phase profile"
    return RunOutputs(curves={DefaultValues.PROFILE_STEM: CurveSet("y", phase.y, _phase_columns(phase, report), title)})


def _central_zero_speeds(trajectory: Trajectory, speed_profile: FloatArray, y: FloatArray) -> dict[str, Any]:
    """Tracked speeds of central zeros at the last snapshot against the self-similar prediction."""
    final = float(trajectory.times[-1])
    scale = math.sqrt(1.0 + final)
    central = np.abs(y) <= CENTRAL_ZERO_WINDOW
    reference = _max_abs(speed_profile[central]) / scale
    errors = []
    for track in trajectory.zero_tracks:
        if track.terminated or len(track.times) < 2 or abs(track.times[-1] - final) > 1e-9:
            continue
        position = track.positions[-1]
        if abs(position / scale) > CENTRAL_ZERO_WINDOW:
            continue
        predicted = float(np.interp(position / scale, y, speed_profile)) / scale
        errors.append(abs(track.speed_at(final) - predicted))
    relative = max(errors) / reference if errors and reference > 0 else math.nan
    return {"central_zero_count": len(errors), "zero_speed_relative_error": relative}


def _gl_simulate(config: RunConfig, report: RunReport) -> RunOutputs:
    phase = _gl_phase(config, report)
    columns = _phase_columns(phase, report)
    x = config.domain.nodes
    initial = self_similar_gl_field(phase, x, 0.0)
    trajectory = run_gl(initial, config.time_policy)
    _record_ledger(report, trajectory)
    if "V" in columns:
        report.diagnostics.update(_central_zero_speeds(trajectory, columns["V"], phase.y))
    title = config.title or "Ginzburg-Landau simulation"
    return RunOutputs(
        curves={
            DefaultValues.PROFILE_STEM: CurveSet("y", phase.y, columns, title),
            DefaultValues.CONVERGENCE_STEM: CurveSet(
                "t",
                trajectory.times,
                {"amplitude_defect": trajectory.diagnostics["amplitude_defect"]},
                f"{title}: amplitude constraint",
            ),
        },
        trajectory=trajectory,
    )


_HANDLERS: dict[ProblemTag, Callable[[RunConfig, RunReport], RunOutputs]] = {
    ProblemTag.PME_BARENBLATT: _pme_barenblatt,
    ProblemTag.PME_MIXING: _pme_mixing,
    ProblemTag.PME_SIMULATE: _pme_simulate,
    ProblemTag.RDS_PROFILE: _rds_profile,
    ProblemTag.RDS_SIMULATE: _rds_simulate,
    ProblemTag.TURBULENCE_EXACT: _turbulence_exact,
    ProblemTag.TURBULENCE_SIMULATE: _turbulence_simulate,
    ProblemTag.GL_PROFILE: _gl_profile,
    ProblemTag.GL_SIMULATE: _gl_simulate,
}


def compute(config: RunConfig, report: RunReport) -> RunOutputs:
    """Run the computation the problem tag names, filling the report."""
    logger.info("running problem %s", config.problem.value)
    return _HANDLERS[config.problem](config, report)


class Pipeline:
    """Runs configurations and writes their artifacts into one directory."""

    def __init__(
        self,
        output_dir: Path,
        formats: Sequence[OutputFormat] = (OutputFormat.ALL,),
        *,
        plotters: Optional[Mapping[OutputFormat, CurvePlotter]] = None,
        width: int = DefaultValues.WIDTH,
        height: int = DefaultValues.HEIGHT,
    ) -> None:
        """Initialize the pipeline.

        Args:
            output_dir: Directory receiving all artifacts
            formats: Output formats; 'all' expands to every format
            plotters: Chart plotters by format, created on demand when omitted
            width: Chart width in pixels
            height: Chart height in pixels
        """
        self.output_dir = Path(output_dir)
        self.formats = {concrete for fmt in formats for concrete in fmt.expand()}
        self.plotters = dict(plotters or {})
        for chart in (OutputFormat.SVG, OutputFormat.HTML):
            if chart in self.formats and chart not in self.plotters:
                self.plotters[chart] = create_plotter(chart.value)
        self.width = width
        self.height = height

    def run(self, config: RunConfig, *, only: Optional[Collection[str]] = None) -> RunReport:
        """Compute and write artifacts; the report is written on success and on failure.

        Args:
            config: Validated configuration
            only: Artifact stems to write, all when omitted

        Raises:
            SolverError: If a solve or simulation fails
            ValueError: If the data is invalid for the chosen problem
        """
        report = RunReport(config=config.echo())
        start = time.perf_counter()
        try:
            outputs = compute(config, report)
            self._emit(outputs, report, only)
        except (SolverError, ValueError) as err:
            report.fail(err)
            logger.error("run failed: %s", err)
            raise
        finally:
            report.wall_clock_seconds = time.perf_counter() - start
            path = self.output_dir / DefaultValues.REPORT_FILENAME
            report.artifacts.append(str(path))
            write_report(report, path)
        return report

    def _emit(self, outputs: RunOutputs, report: RunReport, only: Optional[Collection[str]]) -> None:
        for stem, curves in outputs.curves.items():
            if only is not None and stem not in only:
                continue
            if OutputFormat.CSV in self.formats:
                report.artifacts.append(str(write_csv(curves, self.output_dir / f"{stem}.csv")))
            for chart, plotter in self.plotters.items():
                if chart in self.formats:
                    path = plotter.plot(
                        curves, self.output_dir / f"{stem}.{chart.value}", width=self.width, height=self.height
                    )
                    report.artifacts.append(str(path))
        trajectory = outputs.trajectory
        if trajectory is None or OutputFormat.CSV not in self.formats or only is not None:
            return
        path = write_trajectory_csv(trajectory, self.output_dir / DefaultValues.TRAJECTORY_FILENAME)
        report.artifacts.append(str(path))
        if trajectory.zero_tracks:
            path = write_zero_tracks_csv(trajectory, self.output_dir / DefaultValues.ZEROS_FILENAME)
            report.artifacts.append(str(path))
