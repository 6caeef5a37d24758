"""Exception hierarchy."""


class CollectiveWalkError(ValueError):
    """Base class for all errors raised by this package."""


class DimensionMismatch(CollectiveWalkError):
    pass


class NotHermitian(CollectiveWalkError):
    pass


class NotPsd(CollectiveWalkError):
    pass


class NotNormalized(CollectiveWalkError):
    pass


class BlochOutOfBall(CollectiveWalkError):
    pass


class ShapeMismatch(CollectiveWalkError):
    pass


class ZeroTraceEffect(CollectiveWalkError):
    pass


class InvalidPovm(CollectiveWalkError):
    pass


class LatticeOverflow(CollectiveWalkError):
    pass


class IncompleteDetectorCover(CollectiveWalkError):
    pass


class NoConvergence(CollectiveWalkError):
    pass


class InvalidAngleSet(CollectiveWalkError):
    pass


class SingularInput(CollectiveWalkError):
    pass


class DomainError(CollectiveWalkError):
    pass


class NonPositiveMean(CollectiveWalkError):
    pass
