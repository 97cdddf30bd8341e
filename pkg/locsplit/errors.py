"""Exception hierarchy shared by every engine."""


class LocsplitError(Exception):
    """Base class for all errors raised by locsplit."""


class DomainError(LocsplitError, ValueError):
    """An input violates the documented precondition of an operation."""


class UnfactoredError(LocsplitError):
    """Integer factorization could not be completed with certified primes."""

    def __init__(self, n, residue):
        super().__init__(f"could not fully factor {n}: unfactored part {residue}")
        self.n = n
        self.residue = residue


class RamifiedPrime(LocsplitError):
    """A place computation was requested at a prime dividing the discriminant."""

    def __init__(self, prime, message=None):
        super().__init__(message or f"prime {prime} is ramified (or divides the index); put it into S")
        self.prime = prime


class NeedsSInclusion(LocsplitError):
    """A prime outside S would need to be in S for the check to be meaningful."""

    def __init__(self, prime, message=None):
        super().__init__(message or f"prime {prime} must be included in S")
        self.prime = prime


class RamifiedCaseError(LocsplitError):
    """A cyclic invariant was requested at a ramified prime."""


class InfeasibleAtPrecision(LocsplitError):
    """The congruence conditions forced by the targets are incompatible."""


class VacuousInstance(LocsplitError):
    """The instance has a NotNorm hypothesis, so the conjecture says nothing about it."""


class NoWitnessFound(LocsplitError):
    """A bounded search finished without a witness. This is not a disproof."""


class RetryExhausted(LocsplitError):
    """A randomized construction failed on every allowed attempt."""

    def __init__(self, what, attempts):
        super().__init__(f"{what}: gave up after {attempts} attempts")
        self.attempts = attempts


class NotFound(LocsplitError):
    """Nothing satisfying the request was found below the bound."""


class CyclicAlready(LocsplitError):
    """The cubic has square discriminant; use the abelian path."""


class HypothesisFailure(LocsplitError):
    """A hypothesis of the change of variables fails."""

    def __init__(self, clause, message):
        super().__init__(f"hypothesis ({clause}) fails: {message}")
        self.clause = clause


class InternalConsistencyError(LocsplitError):
    """A self-check failed. This signals a bug, not bad input."""


class InstanceParseError(LocsplitError):
    """Malformed instance or problem text."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column
