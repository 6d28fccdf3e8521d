"""Exception and warning types shared across the package."""


class GlobalEnvelopeError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(GlobalEnvelopeError):
    """Curve length does not match the argument grid."""


class NonFiniteError(GlobalEnvelopeError):
    """Input contains NaN or infinite entries."""


class TooFewCurvesError(GlobalEnvelopeError):
    """Not enough curves for the requested operation."""


class InconsistentCurveCountError(GlobalEnvelopeError):
    """Curve sets in a joint collection disagree on the number of curves."""


class InconsistentObsCountError(GlobalEnvelopeError):
    """Curve sets in a joint collection disagree on the observed count."""


class NoObservedCurveError(GlobalEnvelopeError):
    """A test was requested on a curve set without an observed curve."""


class AlphaInfeasibleError(GlobalEnvelopeError):
    """The significance level cannot be resolved with the available curves."""


class DegenerateScaleError(GlobalEnvelopeError):
    """A scaling denominator is numerically zero."""


class BetaTooSmallError(GlobalEnvelopeError):
    """The directional quantile fraction is below the resolution of the sample."""


class DegenerateDataError(GlobalEnvelopeError):
    """Data are constant where variation is required."""


class InconsistentReplicatesError(GlobalEnvelopeError):
    """Replicated curve sets disagree on grid or curve count."""


class GroupTooSmallError(GlobalEnvelopeError):
    """A group has too few members for the requested statistic."""


class RankDeficientError(GlobalEnvelopeError):
    """A design matrix does not have full column rank."""


class UnknownTermError(GlobalEnvelopeError):
    """A model formula references an unknown factor or a malformed term."""


class EmptyGroupError(GlobalEnvelopeError):
    """A grouping variable has a level with no members."""


class ParseError(GlobalEnvelopeError):
    """An input file could not be parsed."""


class HeaderError(ParseError):
    """An input file header does not follow the expected layout."""


class AlphaTooExtremeWarning(UserWarning):
    """The requested level keeps every curve in the central region."""


class DegenerateColumnWarning(UserWarning):
    """A column needed a fallback rule because of degenerate spacing."""
