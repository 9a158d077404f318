"""Exception types shared by the whole package."""

from __future__ import annotations


class FairauditError(Exception):
    """Base class for every error raised by fairaudit on bad input."""


class DocumentError(FairauditError):
    """A model or graph document is structurally malformed."""


class ExprSyntaxError(DocumentError):
    """Syntax error inside an expression string, with position info."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ModelSemanticError(DocumentError):
    """Well-formed text that refers to unknown features, out-of-domain
    constants, or mismatched value kinds."""


class CapacityError(FairauditError):
    """An enumeration would exceed the configured cap."""


class FtuViolationError(FairauditError):
    """A completion was requested for a classifier that does not satisfy
    constrained FTU; carries the offending instance pair."""

    def __init__(self, message: str, counterexample):
        super().__init__(message)
        self.counterexample = counterexample
