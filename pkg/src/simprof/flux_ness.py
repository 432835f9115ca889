"""Fluxes that sustain similarity profiles as non-equilibrium steady states."""

from __future__ import annotations

import logging
import math
from typing import Any, Optional, Union

import numpy as np
from scipy import integrate, optimize

from simprof.constants import EckhausConfig, ReductionDefaults
from simprof.exceptions import DomainError, PreconditionError, SingularityError
from simprof.models import FloatArray, FluxSet, InfiltrationReport, PhaseProfile, Profile, TurbulenceFluxSet
from simprof.profile_bvp import FluxMap, PowerFlux, TurbulenceExact, erf_profile_derivative
from simprof.reaction_network import DiffusionMatrix, ReactionNetwork

logger = logging.getLogger(__name__)

DiffusionLike = Union[DiffusionMatrix, float, Any]


def _diffusion_values(diffusion: DiffusionLike, components: int) -> FloatArray:
    if isinstance(diffusion, DiffusionMatrix):
        values = diffusion.values
    else:
        values = np.atleast_1d(np.asarray(diffusion, dtype=float))
    if values.size == 1:
        values = np.full(components, float(values[0]))
    if values.size != components:
        raise DomainError("D", values.tolist(), f"expected {components} diffusion constants")
    return values


def _centered_derivatives(values: FloatArray, spacing: float) -> tuple[FloatArray, FloatArray]:
    """First and second centered differences along axis 0; boundary rows are zero."""
    first = np.zeros_like(values)
    second = np.zeros_like(values)
    first[1:-1] = (values[2:] - values[:-2]) / (2.0 * spacing)
    second[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / spacing**2
    return first, second


def diffusive_fluxes(profile: Profile, diffusion: DiffusionLike) -> FloatArray:
    """Species fluxes Q_j = -d_j C_j' by centered differences, shape (n, m)."""
    values = np.array(profile.values)
    d = _diffusion_values(diffusion, profile.components)
    gradient = np.gradient(values, profile.grid.spacing, axis=0, edge_order=2)
    return np.asarray(-gradient * d[np.newaxis, :])


def nonlinear_flux(profile: Profile, flux: FluxMap) -> FloatArray:
    """Flux -(A(U))' of a nonlinear diffusion profile; -(W^m)' for porous medium profiles."""
    flux_values = flux.value(np.array(profile.values))
    return np.asarray(-np.gradient(flux_values, profile.grid.spacing, axis=0, edge_order=2))


def lagrange_multiplier(profile: Profile, diffusion: DiffusionLike, network: ReactionNetwork) -> FluxSet:
    """Reaction multiplier lambda = -(D C'' + (y/2) C') decomposed onto the reaction directions.

    Args:
        profile: Composed concentration profile C = Psi(U)
        diffusion: Diffusion constants
        network: Network the profile is in equilibrium for

    Returns:
        Flux set with the raw multiplier, per-reaction multipliers and residuals

    Raises:
        PreconditionError: If the reaction directions are linearly dependent
    """
    if profile.components != network.species_count:
        raise DomainError("C", profile.components, f"expected {network.species_count} species")
    directions = network.directions
    if np.linalg.matrix_rank(directions) < network.reaction_count:
        raise PreconditionError("lagrange_multiplier", "linearly independent reaction directions")
    values = np.array(profile.values)
    d = _diffusion_values(diffusion, profile.components)
    first, second = _centered_derivatives(values, profile.grid.spacing)
    y = profile.y[:, np.newaxis]
    raw = -(second * d[np.newaxis, :] + 0.5 * y * first)
    multipliers = np.linalg.lstsq(directions, raw.T, rcond=None)[0].T
    decomposition = float(np.max(np.abs(raw - multipliers @ directions.T)))
    stoichiometric = float(np.max(np.abs(raw @ network.conservation.T)))
    violation = float(np.max(network.equilibrium_defect(np.maximum(values, 0.0))))
    warnings: list[str] = []
    if violation > ReductionDefaults.CONSTRAINT_TOLERANCE:
        message = f"profile violates the reaction equilibrium by {violation:.3e}"
        logger.warning(message)
        warnings.append(message)
    logger.debug("multiplier residuals: Q lambda %.3e, decomposition %.3e", stoichiometric, decomposition)
    return FluxSet(
        grid=profile.grid,
        diffusive=diffusive_fluxes(profile, d),
        raw_multiplier=raw,
        multipliers=multipliers,
        stoichiometric_residual=stoichiometric,
        decomposition_residual=decomposition,
        constraint_violation=violation,
        warnings=tuple(warnings),
    )


def componentwise_multipliers(
    profile: Profile, diffusion: DiffusionLike, beta: float, gamma: float
) -> tuple[FloatArray, FloatArray]:
    """Two-species multiplier from each component: -(d_1C_1''+(y/2)C_1')/gamma and (d_2C_2''+(y/2)C_2')/beta."""
    if profile.components != 2:
        raise DomainError("C", profile.components, "componentwise multipliers need two species")
    d = _diffusion_values(diffusion, 2)
    first, second = _centered_derivatives(np.array(profile.values), profile.grid.spacing)
    y = profile.y
    from_first = -(d[0] * second[:, 0] + 0.5 * y * first[:, 0]) / gamma
    from_second = (d[1] * second[:, 1] + 0.5 * y * first[:, 1]) / beta
    return from_first, from_second


def two_species_multiplier(y: Any, d1: float, d2: float, c_minus: float, c_plus: float) -> FloatArray:
    """Closed-form multiplier of the linear pair X_1 <=> X_2.

    Lambda(y) = -((d1-d2)/(2(d1+d2))) (C_+ - C_-) E''(y/sqrt(d1+d2)).
    """
    total = d1 + d2
    z = np.asarray(y, dtype=float) / math.sqrt(total)
    return np.asarray(-((d1 - d2) / (2.0 * total)) * (c_plus - c_minus) * erf_profile_derivative(z, order=2))


def fit_multiplier_scale(y: Any, multiplier: Any) -> tuple[float, float]:
    """Least-squares fit of a E''(y/s) to a computed multiplier.

    Returns:
        Tuple of (amplitude a, argument scale s)
    """
    y = np.asarray(y, dtype=float)
    lam = np.asarray(multiplier, dtype=float)
    peak = int(np.argmax(np.abs(lam)))
    scale0 = max(abs(float(y[peak])), 1e-3)
    amplitude0 = float(lam[peak]) / float(erf_profile_derivative(math.copysign(1.0, y[peak] or 1.0), order=2))

    def model(x: FloatArray, amplitude: float, scale: float) -> FloatArray:
        return np.asarray(amplitude * erf_profile_derivative(x / scale, order=2))

    params, _ = optimize.curve_fit(model, y, lam, p0=(amplitude0, scale0))
    return float(params[0]), abs(float(params[1]))


def turbulence_fluxes(y: Any, velocity: Any, energy: Any) -> TurbulenceFluxSet:
    """Momentum flux -K V', turbulent energy flux -K K' and source K V'^2 from sampled curves."""
    y = np.asarray(y, dtype=float)
    v = np.asarray(velocity, dtype=float)
    k = np.asarray(energy, dtype=float)
    dv = np.gradient(v, y, edge_order=2)
    dk = np.gradient(k, y, edge_order=2)
    return _turbulence_flux_set(y, k, dv, dk)


def exact_turbulence_fluxes(exact: TurbulenceExact, y: Any) -> TurbulenceFluxSet:
    """Fluxes of the exact turbulence solution with analytic derivatives."""
    y = np.asarray(y, dtype=float)
    return _turbulence_flux_set(
        y,
        exact.turbulent_energy(y),
        exact.velocity_derivative(y),
        exact.turbulent_energy_derivative(y),
    )


def _turbulence_flux_set(y: FloatArray, k: FloatArray, dv: FloatArray, dk: FloatArray) -> TurbulenceFluxSet:
    # k is nonnegative; round-off below zero does not feed the source
    k_plus = np.maximum(k, 0.0)
    return TurbulenceFluxSet(
        y=y,
        momentum_flux=-k * dv,
        kinetic_flux=-k * dk,
        source=k_plus * dv**2,
    )


def gl_amplitude_multiplier(eta_profile: Profile) -> FloatArray:
    """Multiplier -(rho'' + (y/2)rho') of the amplitude rho = sqrt(1 - eta^2).

    Raises:
        DomainError: If |eta| >= 1 at some node
    """
    eta = np.array(eta_profile.values[:, 0])
    bad = np.flatnonzero(np.abs(eta) >= 1.0)
    if bad.size:
        raise DomainError("eta", bad.tolist(), "amplitude undefined where |eta| >= 1")
    rho = np.sqrt(1.0 - eta**2)
    first, second = _centered_derivatives(rho, eta_profile.grid.spacing)
    return np.asarray(-(second + 0.5 * eta_profile.y * first))


def _check_wavenumber(phase: PhaseProfile) -> FloatArray:
    assert phase.wavenumber is not None
    eta = np.array(phase.wavenumber)
    small = np.flatnonzero(np.abs(eta) < EckhausConfig.ZERO_WAVENUMBER)
    if small.size:
        node = int(small[0])
        raise SingularityError("eta", node, float(phase.y[node]))
    if np.any(eta > 0) and np.any(eta < 0):
        node = int(np.flatnonzero(np.sign(eta) != np.sign(eta[0]))[0])
        raise SingularityError("eta", node, float(phase.y[node]))
    return eta


def zero_speed_profile(psi_profile: PhaseProfile) -> FloatArray:
    """Self-similar zero speed V(y) = y/2 - psi/(2 eta).

    Raises:
        SingularityError: If the wavenumber vanishes or changes sign
    """
    eta = _check_wavenumber(psi_profile)
    return np.asarray(0.5 * psi_profile.y - psi_profile.component(0) / (2.0 * eta))


def zero_trajectory(psi_profile: PhaseProfile, x0: Any, t: Any) -> FloatArray:
    """Position x(t) = sqrt(1+t) H(psi(x0)/sqrt(1+t)) of the zero starting at x0.

    H is the piecewise-linear inverse of psi, defined when the wavenumber has one sign.
    """
    _check_wavenumber(psi_profile)
    y = np.array(psi_profile.y)
    psi = np.array(psi_profile.component(0))
    level = np.interp(np.asarray(x0, dtype=float), y, psi)
    if psi[-1] < psi[0]:
        y, psi = y[::-1], psi[::-1]
    scale = np.sqrt(1.0 + np.asarray(t, dtype=float))
    return np.asarray(scale * np.interp(level / scale, psi, y))


def infiltration_report(profile: Profile, m: float, mass0: Optional[float] = None) -> InfiltrationReport:
    """Flux through y = 0 and the mass law M(t) = M(0) sqrt(1+t) of an infiltration profile.

    Args:
        profile: Scalar porous medium profile with U_+ = 0
        m: Porous medium exponent
        mass0: Mass on the positive half line at t = 0; integrated from the profile when omitted

    Raises:
        DomainError: If U_+ is not zero
    """
    right = float(profile.right_limit[0])
    if right != 0.0:
        raise DomainError("U+", right, "infiltration profiles need U+ = 0")
    flux = nonlinear_flux(profile, PowerFlux(m))[:, 0]
    center = profile.grid.center_index
    q0 = float(flux[center])
    if mass0 is None:
        mass0 = float(integrate.trapezoid(profile.component(0)[center:], profile.y[center:]))
    logger.info("infiltration flux Q0=%.6g, mass M0=%.6g", q0, mass0)
    return InfiltrationReport(q0=q0, mass0=float(mass0), exponent=0.5)
