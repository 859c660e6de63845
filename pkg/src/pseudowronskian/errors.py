"""Exception hierarchy shared by all modules."""

from __future__ import annotations

__all__ = [
    "PseudoWronskianError",
    "InvalidArgument",
    "OutOfRange",
    "QuadratureFailure",
    "HorizonExhausted",
    "InvalidWeight",
    "DomainViolation",
    "PreconditionViolation",
    "NoConvergence",
    "ContractionViolation",
    "Infeasible",
    "IntegrationFailure",
]


class PseudoWronskianError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(PseudoWronskianError, ValueError):
    pass


class OutOfRange(InvalidArgument):
    """Evaluation point lies outside the abscissa range of a grid function."""


class QuadratureFailure(PseudoWronskianError):
    """Adaptive quadrature ran out of its evaluation budget.

    The best available estimate is attached so callers can decide whether it
    is usable anyway.
    """

    def __init__(self, message: str, value: float, error_estimate: float, evaluations: int):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.evaluations = evaluations


class HorizonExhausted(PseudoWronskianError):
    """The tail-bound envelope never fell below the requested level."""


class InvalidWeight(InvalidArgument):
    """A weight function is not dominated by a linear envelope kappa * s."""


class DomainViolation(PseudoWronskianError):
    """An iterate left the invariant set of a fixed-point operator."""


class PreconditionViolation(PseudoWronskianError):
    pass


class NoConvergence(PseudoWronskianError):
    """Fixed-point iteration hit its iteration cap.

    ``last`` and ``previous`` hold the two final iterates.
    """

    def __init__(self, message: str, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


class ContractionViolation(PseudoWronskianError):
    """Measured contraction ratio exceeded one."""


class Infeasible(PseudoWronskianError):
    """No (eta, t_start) pair satisfies the oscillation gates."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class IntegrationFailure(PseudoWronskianError):
    """The Runge-Kutta oracle could not advance (step underflow or similar)."""

    def __init__(self, message: str, t_last: float | None = None, state=None):
        super().__init__(message)
        self.t_last = t_last
        self.state = state
