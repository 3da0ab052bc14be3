"""Exception types shared across the package."""

from __future__ import annotations


class CtxprobError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CtxprobError):
    """Malformed proposition text; ``position`` is a 0-based offset into the input."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


class UnknownAtomError(CtxprobError):
    """An atom falls outside the entity an assignment or space is declared over."""


class UnknownIdError(CtxprobError):
    """A state, property, context, or procedure identifier is not declared."""


class InvalidModelError(CtxprobError):
    """A structural invariant of a model component is violated."""


class ConditionNullError(CtxprobError):
    """Conditioning on a proposition whose extension carries no mass.

    ``context`` names the micro-context whose substituted condition failed,
    when the failure arose inside a context average.
    """

    def __init__(self, message: str, context: str | None = None):
        super().__init__(message)
        self.context = context


class CaseMismatchError(CtxprobError):
    """A proposition pair fits none of the mean-conditional dispatch cases."""


class NonUniformContextError(CtxprobError):
    """Context substitution applied to a proposition mixing context indices."""


class NullOutcomeError(CtxprobError):
    """A quantum update or conditional with (numerically) zero outcome weight."""


class NoFirstKindError(CtxprobError):
    """No first-kind transform is registered for the conditioning property."""


class StateExcludedError(CtxprobError):
    """Sequential conditioning from a state that gives the property probability 0."""


class ModelFileError(CtxprobError):
    """Schema or referential-integrity failure in a model file.

    ``location`` is a JSON-path-like string pointing at the offending value.
    """

    def __init__(self, message: str, location: str = ""):
        suffix = f" [at {location}]" if location else ""
        super().__init__(f"{message}{suffix}")
        self.message = message
        self.location = location
