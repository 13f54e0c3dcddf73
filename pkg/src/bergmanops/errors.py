"""Exception taxonomy shared by every module.

The split mirrors how failures are surfaced to callers: bad inputs raise
``ValueError`` subclasses, failures of the numerics themselves raise
``RuntimeError`` subclasses.  Code never silently degrades accuracy; when a
computation cannot reach its target it raises :class:`AccuracyError` carrying
the tolerance actually achieved.
"""

from __future__ import annotations

__all__ = [
    "WorkbenchError",
    "DomainError",
    "RangeError",
    "ArgumentError",
    "PreconditionError",
    "AccuracyError",
    "ResourceError",
    "ContractError",
    "EvaluationError",
    "TruncationError",
    "NumericalError",
]


class WorkbenchError(Exception):
    """Base class for every error raised by this package."""


class DomainError(WorkbenchError, ValueError):
    """A point lies outside the mathematical domain (e.g. |z| >= 1)."""


class RangeError(WorkbenchError, ValueError):
    """A query fell outside the tabulated range of a custom weight."""


class ArgumentError(WorkbenchError, ValueError):
    """Structurally invalid argument (empty grid, bad exponent, ...)."""


class PreconditionError(WorkbenchError, ValueError):
    """A documented precondition failed (e.g. symbol is not a self-map)."""


class AccuracyError(WorkbenchError, RuntimeError):
    """Target tolerance was not reached; carries the achieved tolerance."""

    def __init__(self, message: str, achieved: float | None = None,
                 target: float | None = None):
        if achieved is not None and target is not None:
            message = f"{message} (achieved {achieved:.3e}, target {target:.3e})"
        super().__init__(message)
        self.achieved = achieved
        self.target = target


class ResourceError(WorkbenchError, RuntimeError):
    """A hard resource budget (nodes, degree, matrix size) was exceeded."""


class ContractError(WorkbenchError, RuntimeError):
    """An internal contract was violated (e.g. negative integrand)."""


class EvaluationError(WorkbenchError, RuntimeError):
    """An integrand or series evaluation produced NaN."""


class TruncationError(WorkbenchError, RuntimeError):
    """A Taylor truncation could not meet the requested tail bound."""

    def __init__(self, message: str, tail_bound: float | None = None):
        if tail_bound is not None:
            message = f"{message} (tail bound {tail_bound:.3e})"
        super().__init__(message)
        self.tail_bound = tail_bound


class NumericalError(WorkbenchError, RuntimeError):
    """A linear-algebra kernel failed to converge."""
