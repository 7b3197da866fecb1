"""Exception hierarchy for the forking-paths engine."""

from typing import Optional


class ForkingPathsError(Exception):
    """Base class for every error raised by the engine."""


class SpecValidationError(ForkingPathsError, ValueError):
    """A study spec or study config is invalid."""


class DomainError(ForkingPathsError, ValueError):
    """An argument lies outside the domain of a function."""


class IngestionError(ForkingPathsError):
    """A data file could not be read or misses required columns."""


class SchemaError(ForkingPathsError):
    """An outcome or report file misses required columns."""


class SingularDesignError(ForkingPathsError):
    """The regression design is rank deficient."""

    status = "singular_design"


class PairingError(ForkingPathsError):
    """A conditional split found a path without its twin."""


class ExecutionError(ForkingPathsError):
    """A strict run finished with paths that raised unexpected errors."""


class PathFailure(ForkingPathsError):
    """A single path could not produce an outcome.

    Executors catch it and record ``status`` instead of aborting the run.
    """

    status = "error"

    def __init__(self, message: str, status: Optional[str] = None):
        super().__init__(message)
        if status is not None:
            self.status = status


class InsufficientWindowError(PathFailure):
    status = "insufficient_window"


class EmptyLegError(PathFailure):
    status = "empty_leg"


class ThinCrossSectionError(PathFailure):
    status = "thin_cross_section"
