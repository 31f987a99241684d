"""Exception hierarchy for RD estimation, ingestion and output.

Every error carries the process exit code the CLI maps it to.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .lasso.solver import LassoFit


class RdLassoError(Exception):
    """Base exception for all package errors."""

    exit_code: int = 1


class ConfigError(RdLassoError, ValueError):
    """Invalid option, parameter or request."""

    exit_code = 2


class DataError(RdLassoError):
    """Input data cannot support the requested computation."""

    exit_code = 3


class InputFileNotFoundError(DataError):
    """Input file does not exist."""

    exit_code = 5


class MissingColumnError(DataError):
    """A mapped column is absent from the input header."""

    def __init__(self, name: str) -> None:
        super().__init__(f"Column not found in input: {name!r}")
        self.name: str = name


class ParseError(DataError):
    """A cell could not be parsed as a number."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[str] = None) -> None:
        location: str = ""
        if line is not None:
            location = f" (line {line}"
            location += f", column {column!r})" if column is not None else ")"
        super().__init__(f"{message}{location}")
        self.line: Optional[int] = line
        self.column: Optional[str] = column


class InsufficientDataError(DataError):
    """Too few observations for the requested fit."""


class EmptySideError(DataError):
    """No observation with positive kernel weight on one side of the cutoff."""


class EstimationError(RdLassoError):
    """Numerical estimation failed."""

    exit_code = 4


class SingularDesignError(EstimationError):
    """Weighted Gram matrix is numerically singular."""


class NotConvergedError(EstimationError):
    """Coordinate descent exhausted its sweep budget."""

    def __init__(self, message: str, fit: Optional[LassoFit] = None) -> None:
        super().__init__(message)
        self.fit: Optional[LassoFit] = fit


class DegenerateResidualsError(EstimationError):
    """Pilot residuals have zero variance."""


class WeakDiscontinuityError(EstimationError):
    """Take-up jump too small to form a fuzzy ratio."""


class OutputError(RdLassoError):
    """Writing results failed."""

    exit_code = 5
