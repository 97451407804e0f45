"""Exception hierarchy for the phasetip package.

Every error raised by the library derives from :class:`PhasetipError`,
so callers (and the CLI) can distinguish library failures from plain
programming errors.
"""

from __future__ import annotations

__all__ = [
    "PhasetipError",
    "ConfigError",
    "IntegrationFailure",
    "NumericalViolation",
    "CoexistenceUndefined",
    "NoCycleError",
    "UndefinedPhaseError",
    "NotBistableError",
    "ManifoldFailure",
    "ResolutionError",
    "PathInvalidError",
    "BracketError",
    "NotAHopfError",
    "ClassificationUndefined",
]


class PhasetipError(Exception):
    """Base class for all phasetip errors."""


class ConfigError(PhasetipError):
    """Invalid configuration value, unknown key, or inconsistent inputs."""


class IntegrationFailure(PhasetipError):
    """The adaptive integrator could not complete a trajectory.

    Carries the last accepted time and state so callers can diagnose
    where the integration broke down.
    """

    def __init__(self, message: str, t: float, state: tuple[float, float]):
        super().__init__(f"{message} (last accepted t={t:.6g}, state={state})")
        self.t = t
        self.state = state


class NumericalViolation(PhasetipError):
    """A state component left the physically meaningful region.

    Raised when a population coordinate drops below the negativity
    clamp floor, which indicates the tolerances are too loose for the
    requested trajectory rather than genuine dynamics.
    """

    def __init__(self, message: str, t: float, state: tuple[float, float]):
        super().__init__(f"{message} (t={t:.6g}, state={state})")
        self.t = t
        self.state = state


class CoexistenceUndefined(PhasetipError):
    """Requested coexistence equilibrium does not exist at these parameters."""


class NoCycleError(PhasetipError):
    """No attracting limit cycle was found at the given parameters."""


class UndefinedPhaseError(PhasetipError):
    """Phase requested at (or numerically at) the anchor point."""


class NotBistableError(PhasetipError):
    """The frozen system is not bistable, so no basin boundary exists."""


class ManifoldFailure(PhasetipError):
    """Stable-manifold tracing broke down before leaving the bounding box.

    ``partial`` holds the polyline accumulated up to the failure point.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class ResolutionError(PhasetipError):
    """Too many boundary-indeterminate samples; refine the polyline."""


class PathInvalidError(PhasetipError):
    """A parameter-path sweep hit a point where the cycle does not exist."""

    def __init__(self, message: str, parameter_value: float):
        super().__init__(message)
        self.parameter_value = parameter_value


class BracketError(PhasetipError):
    """A bisection bracket does not actually bracket the sought change."""


class NotAHopfError(PhasetipError):
    """Eigenvalue sign change exists but the pair is not complex."""


class ClassificationUndefined(PhasetipError):
    """Tipping-event classification requested without the needed threshold."""
