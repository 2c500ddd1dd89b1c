"""Exception hierarchy for the transform engine."""


class ShehuError(Exception):
    """Base class for all engine errors."""


class ParseError(ShehuError):
    """Syntax or semantic error in an input expression string."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class KindMismatchError(ShehuError):
    """Two expressions of different domains were compared or combined."""


class DomainError(ShehuError):
    """Numeric evaluation outside the supported domain (ML series, poles)."""


class MissingAlphaError(ShehuError):
    """A transform-domain expression uses the symbolic exponent but no value was bound."""


class GrowthBoundError(ShehuError):
    """No exponential-order certificate exists for the expression."""


class UntransformableError(ShehuError):
    """A term contains an atom combination with no closed-form image."""


class RegionError(ShehuError):
    """Evaluation point lies outside the convergence region."""


class NoClosedFormInverseError(ShehuError):
    """The factored form matches no inversion table pattern."""


class MissingConditionError(ShehuError):
    """A derivative rule demands a boundary trace that was not supplied."""


class InconsistentConditionError(ShehuError):
    """Two supplied conditions disagree on a shared lower-dimensional trace."""


class UnsupportedOperationError(ShehuError):
    """Operation not defined for this factor combination (e.g. scaling a symbolic power)."""


class VerificationFailedError(ShehuError):
    """A solution failed its residual verification; carries the report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
