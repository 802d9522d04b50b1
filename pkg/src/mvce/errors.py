"""Exception and warning types shared across the package.

Every fatal condition raised by this package derives from MvceError so
callers can catch one base class at API boundaries.  ContainmentWarning is
deliberately a warning, not an error: an ellipsoid fitted on a sampled
subset may miss unsampled rows by a small margin and the pipeline should
report that, not die.
"""


class MvceError(Exception):
    """Base class for all errors raised by this package."""


class RankDeficient(MvceError):
    """A matrix that must have full column rank (or be positive definite)
    is singular to working precision."""


class FormatError(MvceError):
    """A file does not conform to the expected on-disk format."""


class DimensionError(MvceError):
    """Shapes are inconsistent or outside the supported range."""


class SketchTooSmall(MvceError):
    """The internal sketch cannot meet the requested accuracy target."""


class DegenerateScale(MvceError):
    """A row scale factor is zero or non-finite."""


class ThresholdUnreachable(MvceError):
    """No prefix of the score order reaches the sampling threshold."""


class MaxIterations(MvceError):
    """Iteration limit hit before the requested certificate was reached.

    The partially converged state is attached so callers can inspect or
    resume it.
    """

    def __init__(self, message, state=None, certificate=None):
        super().__init__(message)
        self.state = state
        self.certificate = certificate


class NotFeasible(MvceError):
    """A design vector fails the requested feasibility test."""


class BoundViolation(MvceError):
    """A measured quantity exceeds its proven bound.

    Attached records identify the offending benchmark cells.
    """

    def __init__(self, message, records=None):
        super().__init__(message)
        self.records = records or []


class ContainmentWarning(UserWarning):
    """Some original rows fall outside the recovered ellipsoid by more
    than the certified tolerance."""
