"""Exception and warning classes raised across the engine."""

from __future__ import annotations


class CondanError(Exception):
    """Base class for every error raised by :mod:`condan`."""


class AlgebraMismatch(CondanError, ValueError):
    pass


class InvalidAssignment(CondanError, ValueError):
    pass


class ConditionNotBelow(CondanError, ValueError):
    pass


class ConditionMismatch(CondanError, ValueError):
    pass


class EmptyFamily(CondanError, ValueError):
    pass


class MissingUniverse(CondanError, ValueError):
    pass


class InsufficientSequence(CondanError, IndexError):
    pass


class UncertifiedTail(CondanError, ValueError):
    pass


class DimensionMismatch(CondanError, ValueError):
    pass


class GridMismatch(CondanError, ValueError):
    pass


class UnsupportedDimension(CondanError, ValueError):
    pass


class UnsupportedNormKind(CondanError, ValueError):
    pass


class NotInjective(CondanError, ValueError):
    pass


class NotBounded(CondanError, ValueError):
    pass


class ZeroFunctional(CondanError, ValueError):
    pass


class UncertifiedSet(CondanError, TypeError):
    """A membership oracle without a checkable closedness certificate."""


class Undecided(CondanError):
    """The examination budget ran out before a decision was reached.

    ``partial`` carries whatever per-atom classification was obtained.
    """

    def __init__(self, message: str, partial: dict | None = None):
        super().__init__(message)
        self.partial = partial


class UnboundedOnCondition(CondanError):
    def __init__(self, condition, witness: dict | None = None):
        super().__init__(f"sequence leaves the bounded region on {condition}")
        self.condition = condition
        self.witness = witness or {}


class NotACover(CondanError):
    def __init__(self, point, atom: int):
        super().__init__(f"point {list(point)} on atom {atom} is not covered")
        self.point = point
        self.atom = atom


class ResolutionExhausted(CondanError):
    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace or []


class HypothesisViolated(CondanError):
    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


class GenerationFailed(CondanError):
    pass


class UnknownSuite(CondanError, KeyError):
    pass


class NotTotalWarning(UserWarning):
    """The functional family does not separate points of the space."""
