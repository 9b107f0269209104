"""Exception hierarchy shared by every module."""


class AnomalyError(Exception):
    """Base class for all errors raised by this package."""


class InputError(AnomalyError, ValueError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class InvariantViolation(AnomalyError):
    """An internal guarantee failed (CLI exit code 3)."""


class PreconditionError(InputError):
    pass


class SquarefreeViolation(AnomalyError, ArithmeticError):
    """A product would contain some tau_i squared."""


class EmptyRelation(InputError):
    pass


class NotAnomalousConsistent(InputError):
    pass


class ParityViolation(InputError):
    """A potential series breaks evenness or the quadratic-part normalization."""

    def __init__(self, message, monomial=None):
        super().__init__(message)
        self.monomial = monomial


class DependentGenerators(InputError):
    pass


class UnstableFit(InvariantViolation):
    """Random tau substitutions disagreed on whether a fit exists."""


class MalformedStaircase(InputError):
    pass


class HypothesisFailed(InputError):
    """The all-selections-dependent hypothesis does not hold.

    ``witness`` is the first independent selection, as a tuple of 'v'/'w'.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InternalProofDeviation(InvariantViolation):
    pass


class NoCuspLocated(InvariantViolation):
    pass
