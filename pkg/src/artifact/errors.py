"""Exception hierarchy shared by every module.

Two families matter to callers: ``InputSyntaxError`` for text that does not
parse, and ``DomainError`` for well-formed input on which an operation is
undefined.  The command line maps them to exit codes 2 and 1.
"""

from __future__ import annotations


class ArtifactError(Exception):
    """Root of all errors raised by this package."""


class InputSyntaxError(ArtifactError):
    """Text could not be parsed; ``position`` is a 0-based offset when known."""

    def __init__(self, message: str, position: int | None = None, text: str | None = None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class DomainError(ArtifactError):
    """The input is well formed but the operation has no answer for it."""


# hyperreal core
class DivisionByZero(DomainError):
    pass


class TruncationExhausted(DomainError):
    pass


class Indeterminate(DomainError):
    """A sign or classification depends on terms hidden by truncation."""


class UnlimitedValue(DomainError):
    """A shadow was requested for an unlimited number."""


class DecodeError(DomainError):
    pass


# calculus
class UnboundVariable(DomainError):
    pass


class NotDifferentiable(DomainError):
    def __init__(self, message: str, witnesses=None):
        self.witnesses = witnesses or []
        super().__init__(message)


class NonPolynomial(DomainError):
    pass


class NonConvergence(DomainError):
    pass


class CertificateInsufficient(DomainError):
    pass


# formula engine
class UnsupportedShape(DomainError):
    def __init__(self, message: str, quantifier: str | None = None):
        self.quantifier = quantifier
        super().__init__(message)


class NotDeltaSt(DomainError):
    pass


class UninterpretedSymbol(DomainError):
    pass


class RuleNotApplicable(DomainError):
    """A rewrite rule was asked to fire where its pattern does not match."""


# forcing lab
class RankError(DomainError):
    pass


class Undecidable(DomainError):
    pass


class ContractViolation(DomainError):
    pass


class ClaimOneFailure(DomainError):
    pass


class ThicknessPrecondition(DomainError):
    pass


class IndexOutOfRange(DomainError):
    pass


class NotUnbounded(DomainError):
    pass


class Undecided(DomainError):
    pass
