"""
Exception hierarchy for sparsewf. Every class carries the exit status the CLI
uses when the error reaches the top level.
"""

from __future__ import annotations

from typing import Any


class SparseWFError(Exception):
    """
    Base class for all expected failures.
    """

    exit_code = 1


class InvalidArgumentError(SparseWFError, ValueError):
    """
    An argument is outside its documented domain.
    """


class ConfigError(InvalidArgumentError):
    """
    A configuration file or flag is invalid.
    """

    exit_code = 2

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class DegenerateInstanceError(SparseWFError):
    """
    The norm estimate is not positive, i.e. the noise overwhelmed the signal.
    """

    exit_code = 3


class ConvergenceError(SparseWFError):
    """
    The eigensolver did not reach its residual tolerance; `best` holds the
    iterate with the smallest residual seen.
    """

    def __init__(self, message: str, best: Any):
        super().__init__(message)
        self.best = best


class DivergenceError(SparseWFError):
    """
    A thresholded Wirtinger flow iterate became non-finite or exploded.
    `iteration` is the index of the offending iterate and `trace` the partial
    trace up to the last good iterate.
    """

    exit_code = 4

    def __init__(self, message: str, iteration: int, trace: Any = None):
        super().__init__(message)
        self.iteration = iteration
        self.trace = trace
