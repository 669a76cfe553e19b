"""Exception types shared across crashskew.

The command-line surface maps these onto exit codes: a `ConvergenceError`
is a numerical failure (exit 1), a `DataValidationError` is an input
problem (exit 2).
"""
from __future__ import annotations

from typing import Optional


class DataValidationError(ValueError):
    """Input data violates a documented invariant.

    Attributes:
        line: 1-based line number in the source file when the problem can be
            attributed to a single CSV row, else None.
    """

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConvergenceError(RuntimeError):
    """An optimizer failed to converge."""

    def __init__(self, message: str, iterations: int = 0):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations
