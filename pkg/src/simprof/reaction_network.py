"""Mass-action reaction networks in detailed balance and their stoichiometric reduction.

A network with species X_1..X_i* and reversible reactions r evaluates

    R(c) = sum_r kappa_r (prod c^backward_r - prod c^forward_r) (forward_r - backward_r)

so that a reaction written gamma X_1 <=> beta X_2 consumes X_1 when c_1^gamma > c_2^beta.
The conserved quantities u = Q c parametrize the equilibria through the reduction map
Psi with Q Psi(u) = u and R(Psi(u)) = 0, and the reduced diffusion system has the flux
A(u) = Q D Psi(u).
"""

from __future__ import annotations

import itertools
import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Callable, Optional

import numpy as np
from scipy.linalg import lstsq, null_space

from simprof.constants import ReductionDefaults
from simprof.exceptions import DomainError, SolverError
from simprof.models import FloatArray, MonotonicityCertificate

logger = logging.getLogger(__name__)


class ReductionKind(Enum):
    """Variants of the reduction map Psi."""

    TWO_SPECIES = "two_species"
    THREE_SPECIES_BINARY = "three_species_binary"
    TWO_REACTION_CHAIN = "two_reaction_chain"
    GENERIC_NEWTON = "generic_newton"


@dataclass(frozen=True)
class Reaction:
    """One reversible mass-action reaction."""

    forward: tuple[float, ...]
    backward: tuple[float, ...]
    rate_constant: float = 1.0

    def __post_init__(self) -> None:
        """Validate exponents and rate constant."""
        if len(self.forward) != len(self.backward):
            msg = "forward and backward exponents must have the same length"
            raise ValueError(msg)
        if any(a < 0 for a in self.forward) or any(b < 0 for b in self.backward):
            msg = "stoichiometric exponents must be nonnegative"
            raise ValueError(msg)
        if self.rate_constant <= 0:
            msg = "rate_constant must be positive"
            raise ValueError(msg)
        if tuple(self.forward) == tuple(self.backward):
            msg = "a reaction must change the composition"
            raise ValueError(msg)

    @property
    def direction(self) -> FloatArray:
        """Stoichiometric direction vector (forward minus backward exponents)."""
        return np.asarray(self.forward, dtype=float) - np.asarray(self.backward, dtype=float)


@dataclass(frozen=True)
class DiffusionMatrix:
    """Diagonal matrix of diffusion constants d_1..d_i*."""

    diagonal: tuple[float, ...]

    def __post_init__(self) -> None:
        """Validate positivity."""
        if not self.diagonal:
            msg = "diffusion matrix needs at least one entry"
            raise ValueError(msg)
        for index, d in enumerate(self.diagonal):
            if not d > 0:
                raise DomainError(f"d{index + 1}", d, "diffusion constants must be strictly positive")
        object.__setattr__(self, "diagonal", tuple(float(d) for d in self.diagonal))

    @property
    def values(self) -> FloatArray:
        """Diagonal as an array."""
        return np.asarray(self.diagonal, dtype=float)

    @property
    def lower(self) -> float:
        """Smallest diffusion constant D_*."""
        return min(self.diagonal)

    @property
    def upper(self) -> float:
        """Largest diffusion constant D^*."""
        return max(self.diagonal)

    @property
    def mean(self) -> float:
        """Mean diagonal entry."""
        return float(np.mean(self.diagonal))


class ReductionMap(ABC):
    """Parametrization u -> Psi(u) of the reaction equilibria with Q Psi(u) = u."""

    kind: ReductionKind

    @abstractmethod
    def psi(self, u: FloatArray) -> FloatArray:
        """Evaluate Psi on an array of conserved vectors with trailing axis j*.

        Args:
            u: Conserved quantities, shape (..., j*), componentwise >= 0

        Returns:
            Concentrations, shape (..., i*)
        """

    @abstractmethod
    def jacobian(self, u: FloatArray) -> FloatArray:
        """Evaluate D Psi with shape (..., i*, j*)."""


class TwoSpeciesReduction(ReductionMap):
    """gamma X_1 <=> beta X_2 with Q = (beta, gamma) and c_2^beta = c_1^gamma."""

    kind = ReductionKind.TWO_SPECIES

    def __init__(self, beta: float, gamma: float) -> None:
        """Initialize with the stoichiometric coefficients.

        Args:
            beta: Coefficient of X_2
            gamma: Coefficient of X_1
        """
        self.beta = float(beta)
        self.gamma = float(gamma)
        self.ratio = self.gamma / self.beta

    def _first_component(self, u: FloatArray) -> FloatArray:
        if abs(self.ratio - 1.0) < ReductionDefaults.RATIO_TOLERANCE:
            return u / (self.beta + self.gamma)
        if abs(self.ratio - 2.0) < ReductionDefaults.RATIO_TOLERANCE:
            root = np.sqrt(1.0 + 8.0 * u / self.beta)
            return 2.0 * u / (self.beta * (1.0 + root))
        return self._solve_scalar(u)

    def _solve_scalar(self, u: FloatArray) -> FloatArray:
        """Safeguarded Newton on beta*c + gamma*c^p = u over c in [0, u/beta]."""
        lo = np.zeros_like(u)
        hi = u / self.beta
        c = 0.5 * hi
        p = self.ratio
        for _ in range(ReductionDefaults.BISECTION_MAX_ITERATIONS):
            f = self.beta * c + self.gamma * c**p - u
            lo = np.where(f < 0, c, lo)
            hi = np.where(f > 0, c, hi)
            with np.errstate(divide="ignore", invalid="ignore"):
                slope = self.beta + self.gamma * p * c ** (p - 1.0)
                candidate = c - f / slope
            inside = np.isfinite(candidate) & (candidate > lo) & (candidate < hi)
            c_next = np.where(inside, candidate, 0.5 * (lo + hi))
            if np.all(np.abs(c_next - c) <= ReductionDefaults.NEWTON_TOLERANCE * (1.0 + np.abs(c))):
                return c_next
            c = c_next
        return c

    def psi(self, u: FloatArray) -> FloatArray:
        """Closed forms for gamma/beta in {1, 2}, scalar solve otherwise."""
        scalar = np.asarray(u, dtype=float)[..., 0]
        c1 = self._first_component(scalar)
        if abs(self.ratio - 1.0) < ReductionDefaults.RATIO_TOLERANCE:
            c2 = c1.copy()
        else:
            c2 = (scalar - self.beta * c1) / self.gamma
        return np.stack([c1, c2], axis=-1)

    def jacobian(self, u: FloatArray) -> FloatArray:
        """Derivative from beta*c_1' + gamma*c_2' = 1."""
        c1 = self.psi(u)[..., 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = self.beta + self.gamma * self.ratio * c1 ** (self.ratio - 1.0)
        dc1 = np.where(np.isfinite(slope), 1.0 / slope, 0.0)
        dc2 = (1.0 - self.beta * dc1) / self.gamma
        return np.stack([dc1, dc2], axis=-1)[..., np.newaxis]


class ThreeSpeciesBinaryReduction(ReductionMap):
    """X_1 + X_2 <=> X_3 with Q = [[1, 0, 1], [0, 1, 1]] and c_1 c_2 = c_3."""

    kind = ReductionKind.THREE_SPECIES_BINARY

    @staticmethod
    def s(u: FloatArray) -> FloatArray:
        """s(u) = sqrt((1+u_1+u_2)^2 - 4 u_1 u_2), extended by 1+u_1+u_2 off the open quadrant."""
        u1, u2 = u[..., 0], u[..., 1]
        total = 1.0 + u1 + u2
        inside = (u1 > 0) & (u2 > 0)
        radicand = np.where(inside, total**2 - 4.0 * u1 * u2, total**2)
        return np.sqrt(np.maximum(radicand, 0.0))

    def psi(self, u: FloatArray) -> FloatArray:
        """Closed form with c_3 = 2 u_1 u_2 / (1+u_1+u_2+s)."""
        u = np.asarray(u, dtype=float)
        u1, u2 = u[..., 0], u[..., 1]
        s = self.s(u)
        c3 = 2.0 * u1 * u2 / (1.0 + u1 + u2 + s)
        return np.stack([u1 - c3, u2 - c3, c3], axis=-1)

    def jacobian(self, u: FloatArray) -> FloatArray:
        """Derivative through s_1 = ds/du_1 and s_2 = ds/du_2."""
        u = np.asarray(u, dtype=float)
        u1, u2 = u[..., 0], u[..., 1]
        s = self.s(u)
        inside = (u1 > 0) & (u2 > 0)
        s1 = np.where(inside, (1.0 + u1 - u2) / s, 1.0)
        s2 = np.where(inside, (1.0 + u2 - u1) / s, 1.0)
        jac = np.empty((*u.shape[:-1], 3, 2))
        jac[..., 0, 0] = 0.5 * (1.0 + s1)
        jac[..., 0, 1] = 0.5 * (s2 - 1.0)
        jac[..., 1, 0] = 0.5 * (s1 - 1.0)
        jac[..., 1, 1] = 0.5 * (1.0 + s2)
        jac[..., 2, 0] = 0.5 * (1.0 - s1)
        jac[..., 2, 1] = 0.5 * (1.0 - s2)
        return jac

    @staticmethod
    def s_gradient(u: FloatArray) -> FloatArray:
        """(s_1, s_2) on the open quadrant."""
        u = np.asarray(u, dtype=float)
        u1, u2 = u[..., 0], u[..., 1]
        s = ThreeSpeciesBinaryReduction.s(u)
        return np.stack([(1.0 + u1 - u2) / s, (1.0 + u2 - u1) / s], axis=-1)


class TwoReactionChainReduction(ReductionMap):
    """2X_1 <=> X_2 and X_2 <=> X_3 with Q = (1, 2, 2) and Psi = (sigma, sigma^2, sigma^2)."""

    kind = ReductionKind.TWO_REACTION_CHAIN

    @staticmethod
    def sigma(u: FloatArray) -> FloatArray:
        """sigma(u) = (sqrt(1+16u) - 1)/8 in cancellation-free form."""
        u = np.asarray(u, dtype=float)
        return 2.0 * u / (1.0 + np.sqrt(1.0 + 16.0 * u))

    def psi(self, u: FloatArray) -> FloatArray:
        """Closed form with c_2 = c_3 = (u - sigma)/4."""
        scalar = np.asarray(u, dtype=float)[..., 0]
        sig = self.sigma(scalar)
        rest = 0.25 * (scalar - sig)
        return np.stack([sig, rest, rest], axis=-1)

    def jacobian(self, u: FloatArray) -> FloatArray:
        """sigma' = 1/(1+8 sigma)."""
        scalar = np.asarray(u, dtype=float)[..., 0]
        dsig = 1.0 / (1.0 + 8.0 * self.sigma(scalar))
        drest = 0.25 * (1.0 - dsig)
        return np.stack([dsig, drest, drest], axis=-1)[..., np.newaxis]


class NewtonReduction(ReductionMap):
    """Psi by damped Newton on {Q c = u, log-equilibrium residuals = 0}."""

    kind = ReductionKind.GENERIC_NEWTON

    def __init__(self, network: ReactionNetwork) -> None:
        """Initialize from the network whose equilibria are parametrized."""
        self.network = network

    def _start(self, u: FloatArray, free: FloatArray) -> FloatArray:
        """Positive interior start distributing each u_j over the columns of Q."""
        q = self.network.conservation
        start = np.full(q.shape[1], np.inf)
        row_sums = np.abs(q).sum(axis=1)
        for j in range(q.shape[0]):
            share = u[j] / row_sums[j] if row_sums[j] > 0 else np.inf
            support = q[j] != 0
            start[support] = np.minimum(start[support], share)
        start[~np.isfinite(start)] = 1.0
        start = np.maximum(start, ReductionDefaults.INTERIOR_FLOOR)
        start[~free] = 0.0
        return start

    def _system(self, u: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
        """Free species, active conservation rows and the reactions living on free species."""
        q = self.network.conservation
        active_rows = u > 0
        pinned = np.any(q[~active_rows] != 0, axis=0) if np.any(~active_rows) else np.zeros(q.shape[1], bool)
        free = ~pinned
        directions = self.network.directions
        live = np.all(directions[~free] == 0, axis=0) if np.any(pinned) else np.ones(directions.shape[1], bool)
        return free, active_rows, directions[:, live].T, q[active_rows]

    def _solve_point(self, u: FloatArray) -> FloatArray:
        if np.all(u <= 0):
            return np.zeros(self.network.species_count)
        free, active_rows, log_rows, q_rows = self._system(u)
        c = self._start(u, free)
        z = np.log(c[free])
        u_rows = u[active_rows]
        scale = 1.0 + float(np.max(np.abs(u)))

        def residual(z_free: FloatArray) -> FloatArray:
            conc = np.exp(z_free)
            return np.concatenate([q_rows[:, free] @ conc - u_rows, log_rows[:, free] @ z_free])

        history: list[float] = []
        value = residual(z)
        for _ in range(ReductionDefaults.NEWTON_MAX_ITERATIONS):
            norm = float(np.max(np.abs(value)))
            history.append(norm)
            if norm <= ReductionDefaults.NEWTON_TOLERANCE * scale:
                out = np.zeros(self.network.species_count)
                out[free] = np.exp(z)
                return out
            jac = np.vstack([q_rows[:, free] * np.exp(z)[np.newaxis, :], log_rows[:, free]])
            step = lstsq(jac, -value)[0]
            lam = 1.0
            for _ in range(ReductionDefaults.BISECTION_MAX_ITERATIONS):
                trial = residual(z + lam * step)
                if np.max(np.abs(trial)) < norm:
                    break
                lam *= 0.5
            else:
                break
            z = z + lam * step
            value = trial
        raise SolverError("generic reduction Newton did not converge", history, np.exp(z))

    def psi(self, u: FloatArray) -> FloatArray:
        """Pointwise Newton solves."""
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1, u.shape[-1])
        out = np.array([self._solve_point(row) for row in flat])
        return out.reshape(*u.shape[:-1], self.network.species_count)

    def jacobian(self, u: FloatArray) -> FloatArray:
        """Implicit differentiation of {Q c = u, N log c = 0}."""
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1, u.shape[-1])
        q = self.network.conservation
        log_rows = self.network.directions.T
        j_star = q.shape[0]
        jacs = []
        for row, conc in zip(flat, self.psi(flat)):
            positive = conc > 0
            weights = np.zeros_like(conc)
            weights[positive] = 1.0 / conc[positive]
            system = np.vstack([q, log_rows * weights[np.newaxis, :]])
            rhs = np.vstack([np.eye(j_star), np.zeros((log_rows.shape[0], j_star))])
            jacs.append(lstsq(system, rhs)[0])
        return np.array(jacs).reshape(*u.shape[:-1], q.shape[1], j_star)


class ReactionNetwork:
    """Reversible mass-action network with its stoichiometric map Q."""

    def __init__(
        self,
        species_count: int,
        reactions: Sequence[Reaction],
        conservation: Optional[Any] = None,
        *,
        variant: ReductionKind = ReductionKind.GENERIC_NEWTON,
        parameters: Optional[Mapping[str, float]] = None,
        name: str = "network",
    ) -> None:
        """Initialize the network.

        Args:
            species_count: Number of species i*
            reactions: Reversible reactions
            conservation: Stoichiometric map Q (j* x i*); computed as the left null space of the
                direction matrix when omitted
            variant: Reduction map variant
            parameters: Parameters the network was built from, echoed in reports
            name: Variant name used in configuration files

        Raises:
            ValueError: If dimensions are inconsistent or Q does not annihilate the directions
        """
        if species_count < 1:
            msg = "species_count must be positive"
            raise ValueError(msg)
        if not reactions:
            msg = "Cannot create reaction network with empty reaction list"
            raise ValueError(msg)
        for reaction in reactions:
            if len(reaction.forward) != species_count:
                msg = f"reaction has {len(reaction.forward)} exponents but network has {species_count} species"
                raise ValueError(msg)
        self.species_count = species_count
        self.reactions = tuple(reactions)
        self.variant = variant
        self.parameters = dict(parameters or {})
        self.name = name
        self.directions = np.column_stack([r.direction for r in self.reactions])
        if conservation is None:
            self.conservation = null_space(self.directions.T).T
        else:
            self.conservation = np.atleast_2d(np.asarray(conservation, dtype=float))
        if self.conservation.shape[1] != species_count:
            msg = f"Q has {self.conservation.shape[1]} columns but network has {species_count} species"
            raise ValueError(msg)
        if np.max(np.abs(self.conservation @ self.directions)) > 1e-12:
            msg = "Q must annihilate every reaction direction"
            raise ValueError(msg)
        direction_rank = np.linalg.matrix_rank(self.directions)
        if direction_rank + np.linalg.matrix_rank(self.conservation) != species_count:
            msg = "reaction directions must span the kernel of Q"
            raise ValueError(msg)
        self._forward = np.array([r.forward for r in self.reactions], dtype=float)
        self._backward = np.array([r.backward for r in self.reactions], dtype=float)
        self._rates = np.array([r.rate_constant for r in self.reactions], dtype=float)

    @property
    def conserved_count(self) -> int:
        """Number of conserved quantities j*."""
        return int(self.conservation.shape[0])

    @property
    def reaction_count(self) -> int:
        """Number of reactions."""
        return len(self.reactions)

    @property
    def max_rate_constant(self) -> float:
        """Largest rate constant."""
        return float(self._rates.max())

    @property
    def max_order(self) -> float:
        """Largest total order of a reaction side."""
        return float(max(self._forward.sum(axis=1).max(), self._backward.sum(axis=1).max()))

    @cached_property
    def reduction(self) -> ReductionMap:
        """Reduction map for this network."""
        if self.variant is ReductionKind.TWO_SPECIES:
            return TwoSpeciesReduction(self.parameters["beta"], self.parameters["gamma"])
        if self.variant is ReductionKind.THREE_SPECIES_BINARY:
            return ThreeSpeciesBinaryReduction()
        if self.variant is ReductionKind.TWO_REACTION_CHAIN:
            return TwoReactionChainReduction()
        return NewtonReduction(self)

    def _monomials(self, c: FloatArray) -> tuple[FloatArray, FloatArray]:
        c = np.asarray(c, dtype=float)[..., np.newaxis, :]
        forward = np.prod(c**self._forward, axis=-1)
        backward = np.prod(c**self._backward, axis=-1)
        return forward, backward

    def reaction_rates(self, c: FloatArray) -> FloatArray:
        """Scalar rates kappa_r (prod c^backward - prod c^forward), shape (..., r)."""
        forward, backward = self._monomials(c)
        return self._rates * (backward - forward)

    def rate(self, c: FloatArray) -> FloatArray:
        """Rate vector R(c) with trailing axis i*."""
        return np.asarray(self.reaction_rates(c) @ self.directions.T)

    def equilibrium_defect(self, c: FloatArray) -> FloatArray:
        """Max over reactions of |prod c^backward - prod c^forward|, independent of kappa."""
        forward, backward = self._monomials(c)
        return np.asarray(np.max(np.abs(backward - forward), axis=-1))

    def to_spec(self) -> dict[str, Any]:
        """Configuration-file representation."""
        return {"network": self.name, **self.parameters}


class EffectiveDiffusion:
    """Reduced flux A(u) = Q D Psi(u) with Jacobian Q D DPsi(u)."""

    def __init__(self, network: ReactionNetwork, diffusion: DiffusionMatrix) -> None:
        """Initialize with a network and matching diffusion constants.

        Raises:
            ValueError: If the diffusion matrix size does not match the species count
        """
        if len(diffusion.diagonal) != network.species_count:
            msg = f"expected {network.species_count} diffusion constants, got {len(diffusion.diagonal)}"
            raise ValueError(msg)
        self.network = network
        self.diffusion = diffusion
        self._qd = network.conservation * diffusion.values[np.newaxis, :]

    @property
    def components(self) -> int:
        """Number of conserved quantities."""
        return self.network.conserved_count

    @property
    def lower_bounds(self) -> Optional[FloatArray]:
        """The reduced state space is the nonnegative orthant."""
        return np.zeros(self.components)

    @property
    def upper_bounds(self) -> Optional[FloatArray]:
        """No upper bound."""
        return None

    @property
    def reference_diffusivity(self) -> float:
        """Mean diagonal of D, used by the error-function initial guess."""
        return self.diffusion.mean

    def value(self, u: FloatArray) -> FloatArray:
        """A(u) with trailing axis j*."""
        return np.asarray(self.network.reduction.psi(u) @ self._qd.T)

    def jacobian(self, u: FloatArray) -> FloatArray:
        """DA(u) with trailing axes (j*, j*)."""
        return np.asarray(np.einsum("ji,...ik->...jk", self._qd, self.network.reduction.jacobian(u)))


def two_species(beta: float = 1.0, gamma: float = 2.0, kappa: float = 1.0) -> ReactionNetwork:
    """gamma X_1 <=> beta X_2 with rate kappa (c_2^beta - c_1^gamma)(gamma, -beta)."""
    if beta <= 0 or gamma <= 0:
        raise DomainError("beta/gamma", (beta, gamma), "stoichiometric coefficients must be positive")
    reaction = Reaction(forward=(gamma, 0.0), backward=(0.0, beta), rate_constant=kappa)
    return ReactionNetwork(
        2,
        [reaction],
        conservation=[[beta, gamma]],
        variant=ReductionKind.TWO_SPECIES,
        parameters={"beta": beta, "gamma": gamma, "kappa": kappa},
        name="two_species",
    )


def three_species_binary(kappa: float = 1.0) -> ReactionNetwork:
    """X_1 + X_2 <=> X_3 with rate kappa (c_3 - c_1 c_2)(1, 1, -1)."""
    reaction = Reaction(forward=(1.0, 1.0, 0.0), backward=(0.0, 0.0, 1.0), rate_constant=kappa)
    return ReactionNetwork(
        3,
        [reaction],
        conservation=[[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]],
        variant=ReductionKind.THREE_SPECIES_BINARY,
        parameters={"kappa": kappa},
        name="three_species_binary",
    )


def two_reaction_chain(k1: float = 1.0, k2: float = 1.0) -> ReactionNetwork:
    """2X_1 <=> X_2 and X_2 <=> X_3 with Q = (1, 2, 2)."""
    reactions = [
        Reaction(forward=(2.0, 0.0, 0.0), backward=(0.0, 1.0, 0.0), rate_constant=k1),
        Reaction(forward=(0.0, 1.0, 0.0), backward=(0.0, 0.0, 1.0), rate_constant=k2),
    ]
    return ReactionNetwork(
        3,
        reactions,
        conservation=[[1.0, 2.0, 2.0]],
        variant=ReductionKind.TWO_REACTION_CHAIN,
        parameters={"k1": k1, "k2": k2},
        name="two_reaction_chain",
    )


_BUILDERS: dict[str, Callable[..., ReactionNetwork]] = {
    "two_species": two_species,
    "three_species_binary": three_species_binary,
    "two_reaction_chain": two_reaction_chain,
}


def network_from_spec(spec: Mapping[str, Any]) -> ReactionNetwork:
    """Build a built-in network from {"network": name, **parameters}.

    Raises:
        DomainError: If the variant name is unknown
    """
    params = dict(spec)
    name = params.pop("network", None)
    if name not in _BUILDERS:
        raise DomainError("network", name, f"expected one of {sorted(_BUILDERS)}")
    return _BUILDERS[name](**{key: float(value) for key, value in params.items()})


def eval_rate(network: ReactionNetwork, c: Any) -> FloatArray:
    """Rate vector R(c).

    Raises:
        DomainError: If a concentration is negative
    """
    conc = np.asarray(c, dtype=float)
    if np.any(conc < 0):
        raise DomainError("c", conc.tolist(), "concentrations must be nonnegative")
    return network.rate(conc)


def reduce_psi(network: ReactionNetwork, u: Any) -> FloatArray:
    """Equilibrium concentrations Psi(u) with Q Psi(u) = u.

    Raises:
        DomainError: If u has a negative component
        SolverError: If the generic Newton solve does not converge
    """
    conserved = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(conserved < 0):
        raise DomainError("u", conserved.tolist(), "conserved quantities must be nonnegative")
    return network.reduction.psi(conserved)


def effective_diffusion(network: ReactionNetwork, diffusion: DiffusionMatrix, u: Any) -> tuple[FloatArray, FloatArray]:
    """A(u) = Q D Psi(u) and its Jacobian."""
    conserved = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(conserved < 0):
        raise DomainError("u", conserved.tolist(), "conserved quantities must be nonnegative")
    flux = EffectiveDiffusion(network, diffusion)
    return flux.value(conserved), flux.jacobian(conserved)


def certify_monotone(
    jacobian: Callable[[FloatArray], FloatArray],
    lower: Any,
    upper: Any,
    samples: int,
) -> MonotonicityCertificate:
    """Smallest eigenvalue of the symmetric Jacobian part over a sampled box.

    Args:
        jacobian: Map from points (k, j) to Jacobians (k, j, j)
        lower: Lower box corner
        upper: Upper box corner
        samples: Sample points per axis (1 samples the box centre)

    Returns:
        Certificate with the minimal eigenvalue and the minimizing sample

    Raises:
        DomainError: If the box is empty or samples < 1
    """
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    hi = np.atleast_1d(np.asarray(upper, dtype=float))
    if samples < 1:
        raise DomainError("samples", samples, "need at least one sample per axis")
    if lo.shape != hi.shape or lo.size == 0 or np.any(hi < lo):
        raise DomainError("box", (lo.tolist(), hi.tolist()), "box is empty")
    axes = [np.array([0.5 * (a + b)]) if samples == 1 else np.linspace(a, b, samples) for a, b in zip(lo, hi)]
    points = np.array(list(itertools.product(*axes)))
    jac = jacobian(points)
    symmetric = 0.5 * (jac + np.swapaxes(jac, -1, -2))
    smallest = np.linalg.eigvalsh(symmetric)[:, 0]
    index = int(np.argmin(smallest))
    logger.debug("monotonicity sample minimum %.6g at %s", smallest[index], points[index])
    return MonotonicityCertificate(
        a_lo=float(smallest[index]),
        witness=points[index],
        samples_per_axis=samples,
        box_lower=lo,
        box_upper=hi,
    )


def monotonicity_certificate(
    network: ReactionNetwork,
    diffusion: DiffusionMatrix,
    lower: Any,
    upper: Any,
    samples: int = ReductionDefaults.MONOTONICITY_SAMPLES,
) -> MonotonicityCertificate:
    """Sampled monotonicity certificate of A(u) = Q D Psi(u) on a box of conserved states."""
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    if np.any(lo < 0):
        raise DomainError("box", lo.tolist(), "box must lie in the nonnegative orthant")
    return certify_monotone(EffectiveDiffusion(network, diffusion).jacobian, lo, upper, samples)


def three_species_monotone_window(d3: float) -> tuple[float, float]:
    """Open interval of d_j for which A is monotone in the binary three-species network."""
    root = math.sqrt(8.0)
    return ((3.0 - root) * d3, (3.0 + root) * d3)


def chain_invariant_region(lower: float, upper: float) -> tuple[FloatArray, FloatArray]:
    """Corners of the invariant box [b, B] x [b^2, B^2] x [b^2, B^2] of the two-reaction chain."""
    if not 0 <= lower <= upper:
        raise DomainError("b/B", (lower, upper), "need 0 <= b <= B")
    return (
        np.array([lower, lower**2, lower**2]),
        np.array([upper, upper**2, upper**2]),
    )


def in_invariant_region(c: Any, lower: float, upper: float, tol: float = 1e-12) -> bool:
    """Whether every concentration vector lies in the chain's invariant box."""
    lo, hi = chain_invariant_region(lower, upper)
    conc = np.asarray(c, dtype=float)
    return bool(np.all(conc >= lo - tol) and np.all(conc <= hi + tol))
