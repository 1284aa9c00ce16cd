"""Exception hierarchy.

Two families matter to callers: :class:`HypothesisError` (the inputs do not
satisfy the assumptions an operation needs) and :class:`NumericalError` (the
inputs are fine but a computation failed). The CLI maps them to exit codes
2 and 3.
"""


class NehariError(Exception):
    """Base class for every error raised by this package."""


class HypothesisError(NehariError):
    """Input violates a structural or sign assumption."""


class NumericalError(NehariError):
    """A numerical procedure failed to deliver a trustworthy result."""


# decompositions
class NotStrictlyIncreasing(HypothesisError, ValueError):
    pass


class FirstNotZero(HypothesisError, ValueError):
    pass


class LastNotD(HypothesisError, ValueError):
    pass


class IndexOutOfRange(HypothesisError, IndexError):
    pass


class InvalidMatrix(HypothesisError, ValueError):
    pass


class CooperationViolated(HypothesisError):
    pass


class HypothesisViolated(HypothesisError):
    """Raised with the name of the first failing condition in the message."""


class LambdaOutOfRange(HypothesisError, ValueError):
    pass


class BadParameters(HypothesisError, ValueError):
    pass


class GridMismatch(HypothesisError, ValueError):
    pass


class GeometryViolated(HypothesisError, ValueError):
    pass


# numerics
class QuadratureNotConverged(NumericalError):
    pass


class IterationNotConverged(NumericalError):
    pass


class SingularGram(NumericalError):
    pass


class NonPositiveProjection(NumericalError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NoAdmissibleStart(NumericalError):
    pass


class NotConverged(NumericalError):
    pass


class NotConcave(NumericalError):
    pass


class SweepExhausted(NumericalError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
