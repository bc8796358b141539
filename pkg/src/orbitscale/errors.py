"""Exception hierarchy shared by every module."""


class OrbitscaleError(Exception):
    """Base class for all errors raised by this package."""


class PrecisionCapExceeded(OrbitscaleError):
    pass


class DependentBasis(OrbitscaleError):
    pass


class NonPositiveInput(OrbitscaleError):
    pass


class NotNonIncreasing(OrbitscaleError):
    pass


class RankDropped(OrbitscaleError):
    pass


class InvalidShape(OrbitscaleError):
    pass


class DimensionMismatch(OrbitscaleError):
    pass


class NonPositiveMatrix(OrbitscaleError):
    pass


class LevelOutOfRange(OrbitscaleError):
    pass


class Undecidable(OrbitscaleError):
    pass


class NoStateVectors(OrbitscaleError):
    pass


class NotBasicPair(OrbitscaleError):
    pass


class NotDecreasing(OrbitscaleError):
    pass


class SearchExhausted(OrbitscaleError):
    pass


class PreconditionFailed(OrbitscaleError):
    pass


class QualificationTimeout(OrbitscaleError):
    pass


class InvalidInput(OrbitscaleError):
    pass


class MalformedSequence(OrbitscaleError):
    pass


class DepthExceeded(OrbitscaleError):
    pass


class CarryUnresolved(OrbitscaleError):
    pass


class InvalidMultiplier(OrbitscaleError):
    pass


class InvalidKneadingMap(OrbitscaleError):
    pass


class MultipleMinimal(OrbitscaleError):
    pass


class UndecidableMembership(OrbitscaleError):
    pass


class NoMatchingIndex(OrbitscaleError):
    pass


class VerificationFailed(OrbitscaleError):
    pass


class InconclusiveAtDepth(OrbitscaleError):
    pass
