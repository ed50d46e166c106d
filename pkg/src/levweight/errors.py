"""Exception hierarchy.

Every error derives from :class:`LevWeightError` and from ``ValueError`` so
callers that only care about bad arguments can catch the builtin.
"""

__all__ = [
    "LevWeightError",
    "InvalidInputError",
    "InvalidRankError",
    "RankDeficientError",
    "DegenerateObservationError",
    "NeedsCrossError",
    "InvalidStepError",
    "InvalidLeverageError",
    "InvalidDimsError",
    "InvalidMarginalsError",
    "SingularWeightError",
    "UndefinedReferenceError",
]


class LevWeightError(ValueError):
    """Base class for all errors raised by this package."""


class InvalidInputError(LevWeightError):
    """Non-finite entries, malformed shapes or out-of-bounds indices."""


class InvalidRankError(LevWeightError):
    """Requested rank is outside ``[1, min(n1, n2)]`` or exceeds the factors."""


class RankDeficientError(LevWeightError):
    """The k-th singular value is zero."""


class DegenerateObservationError(LevWeightError):
    """The observation carries too little information (empty, rank deficient)."""


class NeedsCrossError(LevWeightError):
    """The operation needs cross leverage scores but the profile has none."""


class InvalidStepError(LevWeightError):
    """A weighting step ``gamma`` outside ``(0, 1)``."""


class InvalidLeverageError(LevWeightError):
    """Leverage arguments outside the domain of a step-size formula."""


class InvalidDimsError(LevWeightError):
    """Dimensions incompatible with a formula (e.g. ``n1 <= 2k``)."""


class InvalidMarginalsError(LevWeightError):
    """Sampling marginals that are negative or all zero."""


class SingularWeightError(LevWeightError):
    """A zero diagonal weight where an invertible weight is required."""


class UndefinedReferenceError(LevWeightError):
    """Relative error against an all-zero reference matrix."""
