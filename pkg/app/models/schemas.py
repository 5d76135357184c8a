"""
Pydantic schemas for API request/response validation and harness configuration
"""
from pydantic import BaseModel, Field
from typing import Any, Dict, List, Optional

from app.core.config import settings
from app.models.diagnostics import Diagnostic


class ProgramRequest(BaseModel):
    """A program submitted as source text"""
    source: str = Field(..., min_length=1)
    file_name: str = "<request>"
    strict: bool = settings.STRICT_MODE
    prelude: bool = settings.PRELUDE_ENABLED
    dependency_mode: str = settings.DEFAULT_DEPENDENCY_MODE


class FlattenRequest(ProgramRequest):
    trace: bool = False


class RunRequest(ProgramRequest):
    """Run a closed expression against the flattened program"""
    expression: str = Field(..., min_length=1)
    scope: Optional[str] = None
    fuel: Optional[int] = Field(default=None, ge=1)
    steps: bool = False


class DiagnosticOut(BaseModel):
    code: str
    message: str
    file: str
    line: int
    col: int
    decl_index: Optional[int] = None
    rendered: str

    @classmethod
    def from_diagnostic(cls, diagnostic: Diagnostic) -> "DiagnosticOut":
        return cls(
            code=diagnostic.code.value,
            message=diagnostic.message,
            file=diagnostic.span.file,
            line=diagnostic.span.line,
            col=diagnostic.span.col,
            decl_index=diagnostic.decl_index,
            rendered=diagnostic.render(),
        )


class CheckResponse(BaseModel):
    ok: bool
    diagnostics: List[DiagnosticOut] = []
    declarations: List[str] = []


class FlattenResponse(CheckResponse):
    program: Optional[str] = None
    trace: List[str] = []


class RunResponse(CheckResponse):
    value: Optional[str] = None
    steps: int = 0
    trace: List[str] = []


class CorpusEntry(BaseModel):
    name: str
    file_name: str
    declarations: List[str]


class GenConfig(BaseModel):
    """Random program generation knobs; the seed fully determines the output"""
    seed: int = 0
    max_depth: int = Field(default=2, ge=0, le=6)
    max_members: int = Field(default=4, ge=0, le=12)
    max_arity: int = Field(default=2, ge=0, le=4)
    max_decls: int = Field(default=5, ge=1, le=12)
    p_abstract: float = Field(default=0.5, ge=0.0, le=1.0)
    p_interface: float = Field(default=0.15, ge=0.0, le=1.0)
    p_trait_ref: float = Field(default=0.5, ge=0.0, le=1.0)
    p_nested: float = Field(default=0.2, ge=0.0, le=1.0)
    p_wither: float = Field(default=0.7, ge=0.0, le=1.0)
    # typed generation only: allow Int fields backed by the prelude
    prelude: bool = False

    def reseeded(self, seed: int) -> "GenConfig":
        return self.model_copy(update={"seed": seed})


class FuzzRequest(BaseModel):
    check: str
    seed: int = 0
    count: int = Field(default=50, ge=1, le=10000)
    config: Optional[GenConfig] = None


class Verdict(BaseModel):
    """Outcome of one property check"""
    check: str
    passed: bool
    samples: int = 0
    failures: int = 0
    message: str = ""
    details: Dict[str, Any] = {}
    counterexamples: List[str] = []
