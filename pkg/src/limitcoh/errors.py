"""Exception hierarchy.

Every error raised on purpose by the engine derives from ``LimitCohError``.
Errors that reject malformed input data derive from ``ValidationError`` so the
CLI can map them to exit status 2.
"""


class LimitCohError(Exception):
    pass


class DivisionByZero(LimitCohError, ZeroDivisionError):
    pass


class ValidationError(LimitCohError, ValueError):
    pass


class NotInvertible(ValidationError):
    pass


class RelationViolated(ValidationError):
    pass


class UnsupportedWeilNumber(LimitCohError):
    """Frobenius has an eigenvalue outside the set {+-p^(m/2)}."""


class SignViolation(LimitCohError):
    pass


class ImpureStratum(ValidationError):
    pass


class FrobeniusMismatch(ValidationError):
    pass


class CompositionMismatch(ValidationError):
    pass


class MissingDegree(ValidationError):
    pass


class MismatchError(LimitCohError):
    pass


class NotAComplex(LimitCohError):
    pass


class UnknownExample(LimitCohError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ParseError(LimitCohError, ValueError):
    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location
