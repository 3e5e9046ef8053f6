"""
Error types shared by every depthrank module.

Services raise these; only the command layer turns them into exit codes
and machine-readable JSON.
"""

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class DepthRankError(Exception):
    """Base class for all depthrank errors."""

    exit_code: int = EXIT_NUMERIC
    hint: Optional[str] = None

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def __reduce__(self):
        # workers send errors back pickled; keep the attributes, skip __init__
        return _rebuild, (type(self), self.message, self.__dict__)

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "error": type(self).__name__,
            "message": self.message,
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }
        if self.hint:
            payload["hint"] = self.hint
        return payload


class DomainError(DepthRankError, ValueError):
    """An argument lies outside the operation's domain."""

    exit_code = EXIT_USAGE


class UnsupportedConfigurationError(DepthRankError):
    """The requested algorithm is not available for this configuration."""

    exit_code = EXIT_USAGE


class DataFileError(DepthRankError):
    """A dataset file could not be parsed, or dimensions disagree."""

    exit_code = EXIT_DATA


class InsufficientDataError(DepthRankError):
    """Too few observations for the requested computation."""

    exit_code = EXIT_DATA


class FactorizationError(DepthRankError):
    """Matrix is singular or not positive definite."""

    hint = "more data or lower d"


class DegenerateSampleError(FactorizationError):
    """A sample covariance (or pooled covariance) is singular."""


class DegenerateScaleError(DepthRankError):
    """Projected scale is zero along some direction."""

    def __init__(self, message: str, direction: Any = None, **details: Any):
        super().__init__(message, direction=direction, **details)
        self.direction = direction


class DegenerateVarianceError(DepthRankError):
    """Estimated variance of a statistic is zero."""


class DegenerateRankError(FactorizationError):
    """The Oja rank covariance B_N is singular."""


class NumericError(DepthRankError):
    """A numerical routine failed to reach its tolerance."""


class ReplicationError(DepthRankError):
    """Wraps a failure raised inside one Monte Carlo replication."""

    def __init__(self, replication: int, cause: DepthRankError):
        super().__init__(
            f"replication {replication} failed: {cause.message}",
            replication=replication,
            cause=type(cause).__name__,
        )
        self.replication = replication
        self.cause = cause
        self.exit_code = cause.exit_code
        self.hint = cause.hint


def _rebuild(cls, message: str, state: Dict[str, Any]) -> "DepthRankError":
    error = cls.__new__(cls)
    Exception.__init__(error, message)
    error.__dict__.update(state)
    return error


def _jsonable(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)
