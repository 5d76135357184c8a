"""
Source spans, diagnostics and the exception hierarchy shared by every service
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional


@dataclass(frozen=True)
class Span:
    """A source location: one line, a column range"""
    file: str = "<input>"
    line: int = 0
    col: int = 0
    end_col: int = 0

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


NO_SPAN = Span()


def pick_span(preferred: Span, fallback: Span) -> Span:
    return preferred if preferred != NO_SPAN else fallback


class DiagnosticCode(str, Enum):
    METHOD_CLASH = "MethodClash"
    CLASS_CLASH = "ClassClash"
    IMPLEMENTS_CLASH = "ImplementsClash"
    UNKNOWN_TRAIT = "UnknownTrait"
    NOT_WELL_FORMED = "NotWellFormed"
    NOT_COHERENT = "NotCoherent"
    TYPE_ERROR = "TypeError"
    ORDER_ERROR = "OrderError"
    STUCK = "Stuck"
    FUEL_EXHAUSTED = "FuelExhausted"


@dataclass(frozen=True)
class Diagnostic:
    """A classified, source-located error"""
    code: DiagnosticCode
    message: str
    span: Span = NO_SPAN
    decl_index: Optional[int] = None

    def located(self, span: Span) -> "Diagnostic":
        """Attach a span unless one is already known"""
        if self.span != NO_SPAN:
            return self
        return Diagnostic(self.code, self.message, span, self.decl_index)

    def in_declaration(self, index: int) -> "Diagnostic":
        if self.decl_index is not None:
            return self
        return Diagnostic(self.code, self.message, self.span, index)

    def sort_key(self):
        decl = -1 if self.decl_index is None else self.decl_index
        return (decl, self.span.file, self.span.line, self.span.col, self.code.value, self.message)

    def render(self) -> str:
        """`<file>:<line>:<col>: <code>: <message>`"""
        return f"{self.span}: {self.code.value}: {self.message}"


def sorted_diagnostics(diagnostics: Iterable[Diagnostic]) -> List[Diagnostic]:
    return sorted(diagnostics, key=Diagnostic.sort_key)


class Reuse42Error(Exception):
    """Base error: carries exactly one diagnostic"""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic

    @classmethod
    def of(cls, code: DiagnosticCode, message: str, span: Span = NO_SPAN) -> "Reuse42Error":
        return cls(Diagnostic(code, message, span))

    @property
    def code(self) -> DiagnosticCode:
        return self.diagnostic.code


class SyntaxProblem(Reuse42Error):
    """Lexer, parser or qualifier rejected the source"""


class CompositionError(Reuse42Error):
    """A composition operator or the TOP driver failed"""


class TypingError(Reuse42Error):
    """Type checking or coherence failed"""


class EvaluationError(Reuse42Error):
    """The interpreter got stuck or ran out of fuel"""

