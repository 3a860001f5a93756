"""Exception hierarchy.

Input errors (bad parameters, malformed documents) derive from
:class:`InputError`; failures of a numerical procedure derive from
:class:`NumericalError`.  The command line maps the two families to
distinct exit codes.
"""


class SpecgapError(Exception):
    """Base class for every error raised by the package."""


class InputError(SpecgapError, ValueError):
    pass


class NumericalError(SpecgapError, ArithmeticError):
    pass


class InvalidCoefficients(InputError):
    pass


class ParameterDomain(InputError):
    pass


class NonpositiveArgument(InputError):
    pass


class OutOfWindow(InputError):
    pass


class ParseError(InputError):
    pass


class SchemaError(InputError):
    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class InconsistentTauZero(InputError):
    pass


class SingularSystem(NumericalError):
    pass


class NegativeDiagonal(NumericalError):
    pass


class NotPositiveRecurrent(NumericalError):
    pass


class NoRootInUnitInterval(NumericalError):
    pass


class DegenerateTailZero(NumericalError):
    pass


class DriftViolatedAtTail(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class PerronNotIsolated(NumericalError):
    pass


class NoSubdominant(NumericalError):
    pass
