"""Exception hierarchy shared by all modules.

Every error is raised with the module and operation that produced it so the
CLI can surface "where" along with "what".  Exit-code mapping lives in the
CLI layer: usage -> 1, accuracy -> 2, instability -> 3.
"""

from __future__ import annotations


class HardyRieszError(Exception):
    """Base class; carries the raising module and operation."""

    def __init__(self, module: str, operation: str, message: str):
        self.module = module
        self.operation = operation
        self.message = message
        super().__init__(f"[{module}.{operation}] {message}")


class UsageError(HardyRieszError):
    """Bad arguments, bad config, or a call outside a documented contract."""


class DomainError(UsageError):
    """Point or parameter outside the mathematical domain of an operation."""


class CapabilityError(UsageError):
    """Request outside the supported desk-scale envelope (e.g. >3 factors)."""


class AccuracyError(HardyRieszError):
    """Quadrature or extrapolation failed to reach the requested tolerance.

    Carries the best estimate and the error bound at the point of failure.
    """

    def __init__(self, module: str, operation: str, message: str,
                 estimate: float, error_bound: float):
        self.estimate = estimate
        self.error_bound = error_bound
        super().__init__(module, operation,
                         f"{message} (best estimate {estimate!r}, "
                         f"error bound {error_bound!r})")


class DivergenceError(AccuracyError):
    """Principal-value epsilon sequence failed to converge."""


class OverflowSignal(HardyRieszError):
    """A value left the representable range of the scaled evaluation."""
