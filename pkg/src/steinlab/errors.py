"""Exception types shared across the package."""

from __future__ import annotations


class SteinLabError(Exception):
    """Base class for all package-specific errors."""


class InvalidSubsetError(SteinLabError, ValueError):
    """A coordinate subset contains out-of-range or conflicting indices."""


class InvalidCoordinateError(SteinLabError, ValueError):
    """A coordinate vector violates the model's support (e.g. non-sign values)."""


class EnumerationLimitError(SteinLabError, ValueError):
    """An exhaustive computation would exceed the hard enumeration cap."""


class DegenerateStatisticError(SteinLabError, ValueError):
    """The statistic has zero (or negative estimated) variance, so nothing can
    be standardized or bounded."""


class DegenerateSampleError(SteinLabError, ValueError):
    """An empirical sample is constant or too small for the requested mode."""


class SolverAccuracyError(SteinLabError, RuntimeError):
    """Quadrature failed to reach the requested tolerance.

    Carries the achieved absolute-error estimate in ``achieved``.
    """

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved abs error {achieved:.3e})")
        self.achieved = achieved


class MomentOrderError(SteinLabError, ValueError):
    """A moment order is outside the admissible range for a bound."""


class TieError(SteinLabError, ValueError):
    """Exact distance ties make nearest-neighbor ranks ill-defined."""


class InsufficientDataError(SteinLabError, ValueError):
    """Not enough usable records/observations for a fit."""


class ConfigError(SteinLabError, ValueError):
    """An experiment config file is malformed or fails validation."""
