"""Exception hierarchy.

Every error raised on bad input derives from :class:`MaxcommError`, which is
itself a :class:`ValueError`, so callers can catch either.
"""


class MaxcommError(ValueError):
    pass


class ValidationError(MaxcommError):
    """Invalid space, function or parameter."""


class NonSymmetricMetric(ValidationError):
    pass


class ZeroOffDiagonal(ValidationError):
    pass


class NonPositiveMass(ValidationError):
    pass


class NonPositiveRadius(ValidationError):
    pass


class UnknownPoint(ValidationError):
    pass


class MissingPoint(ValidationError):
    pass


class CMuTooSmall(ValidationError):
    pass


class BadExponent(ValidationError):
    pass


class BadDelta(ValidationError):
    pass


class BadCount(ValidationError):
    pass


class BadParameter(ValidationError):
    pass


class EmptyBall(ValidationError):
    pass


class EmptySubset(ValidationError):
    pass


class NonPositiveLambda(ValidationError):
    pass


class EmptyGrid(ValidationError):
    pass


class UnknownCheck(MaxcommError):
    pass


class UnknownSuite(MaxcommError):
    pass


class MissingFunction(MaxcommError):
    pass
