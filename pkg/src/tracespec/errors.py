"""Exception hierarchy.

``ValidationError`` subclasses map to CLI exit code 2, ``NumericalError``
subclasses to exit code 3.
"""


class TraceSpecError(Exception):
    pass


class ValidationError(TraceSpecError, ValueError):
    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class NumericalError(TraceSpecError, ArithmeticError):
    pass


class ZeroPolynomial(ValidationError):
    pass


class DomainError(NumericalError):
    pass


class SingularForm(NumericalError):
    pass


class Divergent(NumericalError):
    pass


class DegreeCap(NumericalError):
    pass


class InsufficientMoments(ValidationError):
    pass


class BoundViolated(ValidationError):
    """The supplied 1-norm budget ``c`` is too small for the e_k sequence."""

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


class EmptySet(ValidationError):
    pass


class DisallowedW(ValidationError):
    pass


class NegativeRadicand(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class NonHermitianResidual(NumericalError):
    pass
