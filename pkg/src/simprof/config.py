"""Run configuration files: JSON parsed into a validated pydantic model."""

from __future__ import annotations

import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from simprof.constants import EckhausConfig, GridDefaults, SolverDefaults
from simprof.exceptions import ConfigValidationError
from simprof.models import GLOrdering, Grid, SolveOptions, TimeStepPolicy
from simprof.reaction_network import ReactionNetwork, network_from_spec

logger = logging.getLogger(__name__)


class ProblemTag(str, Enum):
    """Problems a configuration file can describe."""

    PME_BARENBLATT = "pme_barenblatt"
    PME_MIXING = "pme_mixing"
    PME_SIMULATE = "pme_simulate"
    RDS_PROFILE = "rds_profile"
    RDS_SIMULATE = "rds_simulate"
    TURBULENCE_EXACT = "turbulence_exact"
    TURBULENCE_SIMULATE = "turbulence_simulate"
    GL_PROFILE = "gl_profile"
    GL_SIMULATE = "gl_simulate"

    @property
    def is_simulation(self) -> bool:
        """Whether the problem runs a time-dependent simulation."""
        return self.value.endswith("_simulate")


# Each entry lists alternatives; one complete alternative must be present.
_REQUIRED: dict[ProblemTag, tuple[tuple[str, ...], ...]] = {
    ProblemTag.PME_BARENBLATT: (("m", "N"), ("m_values", "N")),
    ProblemTag.PME_MIXING: (("m", "U_minus", "U_plus"),),
    ProblemTag.PME_SIMULATE: (("m", "N", "X", "n_x", "T"), ("m", "U_minus", "U_plus", "X", "n_x", "T")),
    ProblemTag.RDS_PROFILE: (("network", "d", "U_minus", "U_plus"), ("network", "d", "C_minus", "C_plus")),
    ProblemTag.RDS_SIMULATE: (
        ("network", "d", "U_minus", "U_plus", "X", "n_x", "T"),
        ("network", "d", "C_minus", "C_plus", "X", "n_x", "T"),
    ),
    ProblemTag.TURBULENCE_EXACT: (("A",),),
    ProblemTag.TURBULENCE_SIMULATE: (("A", "X", "n_x", "T"), ("N", "X", "n_x", "T")),
    ProblemTag.GL_PROFILE: ((),),
    ProblemTag.GL_SIMULATE: (("X", "n_x", "T"),),
}


class NetworkSpec(BaseModel):
    """Built-in reaction network by variant name plus its parameters."""

    model_config = ConfigDict(extra="forbid")

    network: Literal["two_species", "three_species_binary", "two_reaction_chain"]
    beta: Optional[float] = Field(default=None, gt=0)
    gamma: Optional[float] = Field(default=None, gt=0)
    kappa: Optional[float] = Field(default=None, gt=0)
    k1: Optional[float] = Field(default=None, gt=0)
    k2: Optional[float] = Field(default=None, gt=0)

    def build(self) -> ReactionNetwork:
        """Instantiate the network."""
        return network_from_spec(self.model_dump(exclude_none=True))


class RunConfig(BaseModel):
    """Parameters of one run, keyed by the problem tag."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)

    problem: ProblemTag
    network: Optional[NetworkSpec] = None

    m: Optional[float] = Field(default=None, ge=1)
    m_values: Optional[list[float]] = None
    mass_parameter: Optional[float] = Field(default=None, alias="N", ge=0)
    dimension: int = Field(default=1, ge=1)
    u_minus: Optional[list[float]] = Field(default=None, alias="U_minus")
    u_plus: Optional[list[float]] = Field(default=None, alias="U_plus")
    c_minus: Optional[list[float]] = Field(default=None, alias="C_minus")
    c_plus: Optional[list[float]] = Field(default=None, alias="C_plus")
    diffusion: Optional[list[float]] = Field(default=None, alias="d")

    eta_minus: Optional[float] = None
    eta_plus: Optional[float] = None
    ordering: GLOrdering = GLOrdering.CAPTION

    turbulence_half_width: Optional[float] = Field(default=None, alias="A", gt=0)
    momentum: float = 1.0
    eta_visc: float = Field(default=1.0, gt=0)
    kappa_diff: float = Field(default=1.0, gt=0)
    alpha_exp: float = Field(default=1.0, gt=0)
    beta_exp: float = Field(default=1.0, gt=0)

    half_width: float = Field(default=GridDefaults.HALF_WIDTH, alias="L", gt=0)
    nodes: int = Field(default=GridDefaults.NODES, alias="n")
    domain_half_width: Optional[float] = Field(default=None, alias="X", gt=0)
    domain_nodes: Optional[int] = Field(default=None, alias="n_x")
    final_time: Optional[float] = Field(default=None, alias="T", gt=0)
    snapshots: int = Field(default=10, ge=1)
    snapshot_times: Optional[list[float]] = None
    dt: Optional[float] = Field(default=None, gt=0)
    window: Optional[float] = Field(default=None, gt=0)
    initial_data: Literal["step", "profile"] = Field(default="step", alias="initial")

    tol: float = Field(default=SolverDefaults.TOLERANCE, gt=0)
    max_iter: int = Field(default=SolverDefaults.MAX_ITERATIONS, ge=1)
    continuation_steps: int = Field(default=SolverDefaults.CONTINUATION_STEPS, ge=1)

    output_dir: Optional[str] = None
    title: Optional[str] = None

    @field_validator("u_minus", "u_plus", "c_minus", "c_plus", "diffusion", mode="before")
    @classmethod
    def _promote_scalar(cls, value: Any) -> Any:
        if isinstance(value, (int, float)):
            return [value]
        return value

    @field_validator("u_minus", "u_plus", "c_minus", "c_plus")
    @classmethod
    def _nonnegative(cls, value: Optional[list[float]]) -> Optional[list[float]]:
        if value is not None and any(v < 0 for v in value):
            msg = "limits must be nonnegative"
            raise ValueError(msg)
        return value

    @field_validator("diffusion")
    @classmethod
    def _positive_diffusion(cls, value: Optional[list[float]]) -> Optional[list[float]]:
        if value is not None and any(not v > 0 for v in value):
            msg = "diffusion constants must be positive"
            raise ValueError(msg)
        return value

    @field_validator("m_values")
    @classmethod
    def _exponents(cls, value: Optional[list[float]]) -> Optional[list[float]]:
        if value is not None and (not value or any(v < 1 for v in value)):
            msg = "porous medium exponents must be at least 1"
            raise ValueError(msg)
        return value

    @field_validator("eta_minus", "eta_plus")
    @classmethod
    def _eckhaus(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not abs(value) < EckhausConfig.BOUND:
            msg = f"Eckhaus instability: |eta| must be < 1/sqrt(3) = {EckhausConfig.BOUND:.6f}"
            raise ValueError(msg)
        return value

    @field_validator("nodes", "domain_nodes")
    @classmethod
    def _odd_count(cls, value: Optional[int]) -> Optional[int]:
        if value is None:
            return value
        if value < GridDefaults.MIN_NODES:
            msg = f"node count must be at least {GridDefaults.MIN_NODES}"
            raise ValueError(msg)
        if value % 2 == 0:
            msg = "node count must be odd so that 0 is a node"
            raise ValueError(msg)
        return value

    def provided(self, name: str) -> bool:
        """Whether a parameter, given by its file key, is set."""
        field_name = _FIELD_BY_KEY.get(name, name)
        return getattr(self, field_name) is not None

    def check_required(self) -> None:
        """Check the parameters the problem tag needs.

        Raises:
            ConfigValidationError: Naming the first missing parameter of the closest alternative
        """
        alternatives = _REQUIRED[self.problem]
        best: Optional[list[str]] = None
        for keys in alternatives:
            missing = [key for key in keys if not self.provided(key)]
            if not missing:
                break
            if best is None or len(missing) < len(best):
                best = missing
        else:
            assert best is not None
            raise ConfigValidationError(best[0], f"required for problem '{self.problem.value}'")
        if self.diffusion is not None and self.network is not None:
            expected = self.network.build().species_count
            if len(self.diffusion) not in (1, expected):
                raise ConfigValidationError("d", f"expected {expected} diffusion constants")

    @property
    def grid(self) -> Grid:
        """Similarity-variable grid."""
        return Grid(self.half_width, self.nodes)

    @property
    def domain(self) -> Grid:
        """Simulation grid on [-X, X]."""
        if self.domain_half_width is None or self.domain_nodes is None:
            raise ConfigValidationError("X", f"required for problem '{self.problem.value}'")
        return Grid(self.domain_half_width, self.domain_nodes)

    @property
    def solve_options(self) -> SolveOptions:
        """Newton solver options."""
        return SolveOptions(tol=self.tol, max_iter=self.max_iter, continuation_steps=self.continuation_steps)

    @property
    def time_policy(self) -> TimeStepPolicy:
        """Snapshot policy: explicit times or uniform snapshots up to T."""
        if self.snapshot_times:
            return TimeStepPolicy(tuple(self.snapshot_times), dt=self.dt)
        if self.final_time is None:
            raise ConfigValidationError("T", f"required for problem '{self.problem.value}'")
        return TimeStepPolicy.uniform(self.final_time, self.snapshots, dt=self.dt)

    @property
    def exponents(self) -> list[float]:
        """Porous medium exponents to sweep."""
        if self.m_values:
            return list(self.m_values)
        return [self.m] if self.m is not None else []

    def echo(self) -> dict[str, Any]:
        """Configuration as written in files, without unset entries."""
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)


_FIELD_BY_KEY: dict[str, str] = {
    field.alias: name for name, field in RunConfig.model_fields.items() if field.alias is not None
}


def _parameter_name(error: dict[str, Any]) -> str:
    location = [str(part) for part in error.get("loc", ()) if not isinstance(part, int)]
    return ".".join(location) or "config"


def parse_config(data: dict[str, Any]) -> RunConfig:
    """Validate a configuration mapping.

    Raises:
        ConfigValidationError: Naming the first offending parameter
    """
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as err:
        first = err.errors()[0]
        raise ConfigValidationError(_parameter_name(dict(first)), str(first.get("msg", err))) from err
    config.check_required()
    logger.debug("validated config for problem %s", config.problem.value)
    return config


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a JSON configuration file.

    Raises:
        ConfigValidationError: If the file is not valid JSON or fails validation
        OSError: If the file cannot be read
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ConfigValidationError("config", f"{path} is not valid JSON: {err.msg}") from err
    if not isinstance(data, dict):
        raise ConfigValidationError("config", f"{path} must hold a JSON object")
    return parse_config(data)
