"""Error vocabulary shared across the workbench.

Every error kind named by an operation contract gets its own class so callers
(and the command runner, which maps them to exit codes) can route on type
rather than message text.
"""

from __future__ import annotations


class FolwerkError(Exception):
    """Base class; carries a short machine-readable kind."""

    kind = "error"


class InputError(FolwerkError):
    """Bad user input: syntax, unknown names, type mismatches."""

    kind = "input-error"


class SyntaxInputError(InputError):
    kind = "syntax-error"

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {col}" if col is not None else "") + ")"
        super().__init__(message + loc)


class UnknownNameError(InputError):
    kind = "unknown-name"


class TypeMismatchError(InputError):
    kind = "type-mismatch"


class UnsupportedInputError(InputError):
    kind = "unsupported-input"


class AmbiguousInputError(InputError):
    kind = "ambiguous-input"


class NotAMapError(InputError):
    """Generator assignment does not send relations to zero."""

    kind = "not-a-map"


class NotFiniteFreeError(InputError):
    kind = "not-finite-free"


class NotRegularError(InputError):
    """Relations fail the regular-sequence check for an lci presentation."""

    kind = "not-regular"


class IncompatibleOwnersError(TypeMismatchError):
    kind = "incompatible-owners"


class MissingBoundError(InputError):
    """An exact computation over an infinite-dimensional owner needs a bound."""

    kind = "missing-bound"


class BudgetExceededError(FolwerkError):
    """A completion or rewrite loop hit its step budget."""

    kind = "budget-exceeded"

    def __init__(self, message: str, budget: int):
        self.budget = budget
        super().__init__(f"{message} (budget {budget})")
