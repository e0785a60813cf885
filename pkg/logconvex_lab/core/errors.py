"""Exception hierarchy for logconvex_lab.

Argument problems subclass ValueError so callers that only know the
standard library can still catch them.
"""

from typing import Optional


class LabError(Exception):
    """Base class for every error raised by the laboratory."""


class InvalidInputError(LabError, ValueError):
    """Arguments outside the documented preconditions."""


class SupercriticalError(InvalidInputError):
    """Inverse-square coefficient at or above the Hardy constant (n-2)^2/4."""


class InvalidGeometryError(InvalidInputError):
    """A region, cutoff or anchor does not fit inside the domain."""


class SingularPointError(LabError, ValueError):
    """A derivative was requested where the weight is singular."""


class UnsupportedError(LabError, NotImplementedError):
    """A valid request the laboratory deliberately does not implement."""


class UndefinedRatioError(LabError, ZeroDivisionError):
    """A quotient whose denominator vanishes (zero state or zero field)."""


class NumericalFailure(LabError):
    """A numerical routine did not converge or failed its residual check."""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class RegressionFailure(LabError, AssertionError):
    """A reference verdict was not reproduced."""

    def __init__(self, configuration: str, message: str):
        super().__init__(f"{configuration}: {message}")
        self.configuration = configuration


class InternalError(LabError, RuntimeError):
    """An internal consistency check failed (formula transcription bug)."""
