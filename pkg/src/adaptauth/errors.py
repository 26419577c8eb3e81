"""Exception hierarchy shared by the parser, the engines and the CLI."""

from __future__ import annotations


class AdaptAuthError(Exception):
    """Base class for every error raised by this package."""


class DocumentSyntaxError(AdaptAuthError):
    """The input is not well-formed JSON (or not UTF-8)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class SchemaError(AdaptAuthError):
    """A field is missing, has the wrong type, or is out of range."""

    def __init__(self, message: str, field: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class SemanticError(AdaptAuthError):
    """The document is well-typed but references unknown ids or breaks a model invariant."""

    def __init__(self, message: str, diagnostics: list | None = None):
        self.diagnostics = list(diagnostics or [])
        super().__init__(message)


class ConfigSpaceEmpty(AdaptAuthError):
    """No feasible authentication configuration exists in the given context."""


class InfeasibleConfig(AdaptAuthError):
    """A configuration was assessed that violates the feature model or the context."""
