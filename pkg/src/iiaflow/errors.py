"""Exception hierarchy shared by every module."""


class IIAError(Exception):
    """Base class for all package errors."""


class DomainError(IIAError, ValueError):
    """A smooth function was applied outside its domain."""


class SlotError(IIAError, ValueError):
    """Slot index out of range or variance mismatch."""


class RankError(IIAError, ValueError):
    """Form degree or tensor rank not admissible for the operation."""


class DegenerateForm(IIAError):
    """The 3-form is degenerate (Hitchin invariant too close to zero or positive)."""


class NotPositive(IIAError):
    """Neither sign of the Hitchin structure gives a positive-definite metric."""


class NotPrimitive(IIAError):
    """The 3-form is not annihilated by the symplectic contraction."""


class TruncationError(IIAError):
    """A derivative beyond the stored jet order was requested."""


class SingularMetric(IIAError):
    """The metric cannot be inverted."""


class InvalidStructure(IIAError):
    """A structural identity of the built Type IIA data failed validation."""


class SamplingExhausted(IIAError):
    """Rejection sampling ran out of attempts."""


class NoSolution(IIAError):
    """The linear system defining admissible data has no usable solution."""


class ApplicabilityError(IIAError):
    """A check was run on a sample kind it does not support."""


class InvalidState(IIAError):
    """A flow state does not satisfy the closed/primitive/positive invariants."""


class PositivityLost(IIAError):
    """The flow left the positive cone."""

    def __init__(self, message: str, t: float = float("nan"), step: int = -1, trace=None):
        super().__init__(message)
        self.t = t
        self.step = step
        self.trace = trace


class StepRejected(IIAError):
    """A conservation monitor exceeded its rejection threshold."""

    def __init__(self, message: str, t: float = float("nan"), step: int = -1, trace=None):
        super().__init__(message)
        self.t = t
        self.step = step
        self.trace = trace
