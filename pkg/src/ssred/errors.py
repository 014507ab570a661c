"""Exception types shared by every module.

Each error carries a short ``rule`` id (the same ids used in diagnostics)
and the ids of the offending elements, so callers and the CLI can report
them without parsing messages.
"""
from __future__ import annotations


class SemistableError(Exception):
    """Base class. ``exit_code`` is the CLI exit status for this failure."""

    exit_code = 2

    def __init__(self, rule: str, message: str = "", ids=(), **extra):
        self.rule = rule
        self.ids = tuple(ids)
        self.extra = extra
        text = f"[{rule}] {message}" if message else f"[{rule}]"
        if self.ids:
            text += " (" + ", ".join(str(i) for i in self.ids) + ")"
        super().__init__(text)


class ValidationError(SemistableError):
    """Input object is malformed; ``diagnostics`` holds the full report."""

    exit_code = 1

    def __init__(self, diagnostics, what: str = "object"):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0]
        super().__init__(
            first.rule,
            f"invalid {what}: {first.message}",
            first.ids,
        )


class PreconditionError(SemistableError):
    """Well-formed input that the requested operation does not accept."""

    exit_code = 2


class InvariantBreach(SemistableError):
    """An internal consistency check failed. Always a bug, never a result."""

    exit_code = 3
