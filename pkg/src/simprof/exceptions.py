"""Custom exceptions for profile solving, simulation and artifact output."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any, Optional


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""

    def __init__(self, parameter: str, value: Any, reason: str) -> None:
        """Initialize the exception.

        Args:
            parameter: Name of the offending parameter
            value: The value that was supplied
            reason: Why the value is rejected
        """
        super().__init__(f"Invalid {parameter}={value!r}: {reason}")
        self.parameter = parameter
        self.value = value
        self.reason = reason


class EckhausViolationError(DomainError):
    """Raised when a roll wavenumber leaves the Eckhaus-stable window."""

    def __init__(self, parameter: str, value: float, bound: float) -> None:
        """Initialize the exception.

        Args:
            parameter: Name of the wavenumber parameter
            value: The wavenumber that was supplied
            bound: The Eckhaus bound 1/sqrt(3)
        """
        super().__init__(
            parameter,
            value,
            f"|{parameter}| must be below {bound:.6f} (Eckhaus instability)",
        )
        self.bound = bound


class ScaledWindowError(DomainError):
    """Raised when the scaled reference window exceeds the simulation domain."""

    def __init__(self, time: float, max_time: float) -> None:
        """Initialize the exception.

        Args:
            time: Snapshot time whose scaled window does not fit
            max_time: Largest time for which the window fits the domain
        """
        super().__init__(
            "t",
            time,
            f"scaled window exceeds the simulation domain; maximal usable t is {max_time:.6g}",
        )
        self.max_time = max_time


class PreconditionError(ValueError):
    """Raised when an input object is not in the state an operation requires."""

    def __init__(self, operation: str, requirement: str) -> None:
        """Initialize the exception.

        Args:
            operation: Name of the operation that was called
            requirement: The unmet requirement
        """
        super().__init__(f"{operation} requires {requirement}")
        self.operation = operation
        self.requirement = requirement


class SingularityError(ValueError):
    """Raised when a nodal quotient becomes singular."""

    def __init__(self, quantity: str, node: int, position: float) -> None:
        """Initialize the exception.

        Args:
            quantity: Name of the vanishing denominator
            node: Grid index of the first singular node
            position: Coordinate of that node
        """
        super().__init__(f"{quantity} vanishes at node {node} (y={position:.6g})")
        self.quantity = quantity
        self.node = node
        self.position = position


class SolverError(RuntimeError):
    """Raised when an iterative solver or time stepper fails."""

    def __init__(
        self,
        reason: str,
        residual_history: Optional[Sequence[float]] = None,
        last_iterate: Any = None,
    ) -> None:
        """Initialize the exception.

        Args:
            reason: Human readable failure reason
            residual_history: Residual norms recorded before the failure
            last_iterate: Last iterate of the solver, if available
        """
        history = list(residual_history or [])
        suffix = f" (last residual {history[-1]:.3e})" if history else ""
        super().__init__(f"{reason}{suffix}")
        self.reason = reason
        self.residual_history = history
        self.last_iterate = last_iterate


class CFLViolationError(SolverError):
    """Raised when the stable explicit time step falls below the floor."""

    def __init__(self, dt: float, dt_floor: float, time: float) -> None:
        """Initialize the exception.

        Args:
            dt: The stable time step that was computed
            dt_floor: The smallest admissible time step
            time: Simulation time at which it happened
        """
        super().__init__(f"stable time step {dt:.3e} below floor {dt_floor:.3e} at t={time:.6g}")
        self.dt = dt
        self.dt_floor = dt_floor
        self.time = time


class NegativityBudgetError(SolverError):
    """Raised when clamping negative concentrations removes too much mass."""

    def __init__(self, clamped_mass: float, budget: float) -> None:
        """Initialize the exception.

        Args:
            clamped_mass: Mass added by clamping, relative to the total
            budget: Allowed relative clamp mass
        """
        super().__init__(f"clamped mass {clamped_mass:.3e} exceeds budget {budget:.3e}")
        self.clamped_mass = clamped_mass
        self.budget = budget


class ConfigValidationError(ValueError):
    """Raised when a run configuration is invalid."""

    def __init__(self, parameter: str, message: str) -> None:
        """Initialize the exception.

        Args:
            parameter: Name of the offending configuration parameter
            message: Validation message
        """
        super().__init__(f"Invalid configuration parameter '{parameter}': {message}")
        self.parameter = parameter
        self.message = message


class UnsupportedFormatError(ValueError):
    """Raised when an unsupported output format is specified."""

    def __init__(self, format_: str, supported_formats: list[str]) -> None:
        """Initialize the exception.

        Args:
            format_: The unsupported format that was specified
            supported_formats: List of supported formats
        """
        supported = ", ".join(f"'{fmt}'" for fmt in supported_formats)
        super().__init__(f"Unsupported output format: '{format_}'. Supported formats: {supported}")
        self.format = format_
        self.supported_formats = supported_formats
