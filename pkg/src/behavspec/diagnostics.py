"""Source spans, diagnostics and the exceptions that carry them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True, order=True)
class Span:
    """A 1-based region of an input file. ``end_col`` is exclusive."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


NO_SPAN = Span("<model>", 1, 1, 1, 1)

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str
    span: Span

    def sort_key(self):
        return (self.span, self.severity, self.code, self.message)

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}[{self.code}]: {self.message}"


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=Diagnostic.sort_key)


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity == ERROR for d in diags)


class DiagnosticError(Exception):
    """Raised when a stage fails; ``diagnostics`` holds every problem found."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = sort_diagnostics(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        extra = len(self.diagnostics) - 1
        msg = str(first) if first else "unknown failure"
        if extra > 0:
            msg += f" (+{extra} more)"
        super().__init__(msg)


class SyntaxFailure(DiagnosticError):
    pass


class ResolutionError(DiagnosticError):
    pass


class UnknownIdentifier(LookupError):
    pass


class TargetNotDerived(LookupError):
    pass


class NoEgo(ValueError):
    pass
