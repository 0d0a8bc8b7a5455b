"""Exception types raised by the evaluators.

Every error carries a short machine-readable ``code`` (the class name) so
reports and the CLI can print it without string matching.
"""

from __future__ import annotations


class FLKError(Exception):
    """Base class for all library errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class NonFiniteTerm(FLKError, ValueError):
    pass


class ToleranceNotReached(FLKError):
    """Target tolerance not met within the term/level budget.

    ``best`` holds the best-effort ValueWithError.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class AccelerationBreakdown(FLKError, ArithmeticError):
    pass


class QuadratureStall(FLKError):
    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class GammaPole(FLKError, ValueError):
    pass


class HarmonicPole(FLKError, ValueError):
    pass


class OutsideDomain(FLKError, ValueError):
    pass


class Divergent(FLKError, ValueError):
    pass


class ParameterPole(FLKError, ValueError):
    pass


class ReconstructionFailed(FLKError):
    pass


class RouteDisagreement(FLKError):
    def __init__(self, message: str, routes=None):
        super().__init__(message)
        self.routes = routes or {}


class UnknownFunction(FLKError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""
