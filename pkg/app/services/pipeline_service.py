"""
Source-to-result pipeline shared by the CLI and the HTTP routers
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

from app.core.config import settings
from app.core.logging import get_logger
from app.models.ast import DeclarationTable, Expr, StaticCall, TypePath, sub_expressions
from app.models.diagnostics import Diagnostic, DiagnosticCode, SyntaxProblem, TypingError
from app.services.compose_service import ComposeResult, compile_program
from app.services.eval_service import RunResult, run
from app.services.parser_service import load_program, owners_of_nested, parse_expression, qualify_expression
from app.services.prelude_service import PRELUDE_NAMES, TYPE_ALIASES
from app.services.printer_service import canonical_print, print_expr
from app.services.table_service import lookup_type
from app.services.typecheck_service import TypeEnv, abstract_state, type_expr

logger = get_logger(__name__)

Source = Tuple[str, str]


@dataclass(frozen=True)
class PipelineOptions:
    strict: bool = settings.STRICT_MODE
    prelude: bool = settings.PRELUDE_ENABLED
    dependency_mode: str = settings.DEFAULT_DEPENDENCY_MODE
    fuel: Optional[int] = None


def read_sources(paths: Iterable[str]) -> List[Source]:
    """Read files in argument order; unreadable or non-UTF-8 files raise OSError"""
    sources: List[Source] = []
    for p in paths:
        try:
            sources.append((Path(p).read_text(encoding="utf-8"), str(p)))
        except UnicodeDecodeError as exc:
            raise OSError(f"{p}: not valid UTF-8 ({exc.reason} at byte {exc.start})") from exc
    return sources


def load(sources: List[Source], options: PipelineOptions) -> DeclarationTable:
    return load_program(sources, prelude=options.prelude)


def check(sources: List[Source], options: PipelineOptions = PipelineOptions()) -> ComposeResult:
    """Parse, qualify, flatten and type-check; raises Reuse42Error on the first error"""
    table = load(sources, options)
    result = compile_program(table, dependency_mode=options.dependency_mode, normalize=not options.strict)
    logger.info("compiled %d declarations in %d steps", len(result.table), len(result.steps))
    return result


def flatten_text(result: ComposeResult) -> str:
    return canonical_print(result.table)


def _bare_roots(expr: Expr) -> List[str]:
    roots = []
    for e in sub_expressions(expr):
        if isinstance(e, StaticCall) and e.type.root not in roots:
            roots.append(e.type.root)
    return roots


def detect_scope(table: DeclarationTable, expr: Expr) -> Optional[str]:
    """The unique class whose nested classes name every unknown root of `expr`"""
    unknown = [
        r for r in _bare_roots(expr)
        if table.get(r) is None and r not in PRELUDE_NAMES and r not in TYPE_ALIASES
    ]
    if not unknown:
        return None
    owners = owners_of_nested(table, unknown)
    return owners[0] if len(owners) == 1 else None


def prepare_expression(table: DeclarationTable, text: str, scope: Optional[str] = None) -> Tuple[Expr, Optional[str]]:
    """Parse, scope and type a closed run expression"""
    expr = parse_expression(text)
    if scope is not None and table.get(scope) is None:
        raise SyntaxProblem(Diagnostic(DiagnosticCode.NOT_WELL_FORMED, f"unknown scope class {scope}"))
    scope = scope or detect_scope(table, expr)
    expr = qualify_expression(table, expr, scope)
    type_expr(table, TypeEnv(), expr)
    return expr, scope


def run_expression(
    result: ComposeResult,
    text: str,
    options: PipelineOptions = PipelineOptions(),
    scope: Optional[str] = None,
    trace: bool = False,
) -> Tuple[RunResult, str]:
    """Evaluate `text`; returns the run and the value printed relative to the scope"""
    expr, scope = prepare_expression(result.table, text, scope)
    strip = (scope,) if scope else ()
    outcome = run(result.table, expr, options.fuel, trace=trace, strip=strip)
    return outcome, print_expr(outcome.value, strip)


def explain_coherence(table: DeclarationTable, type_text: str) -> str:
    """Render the abstract state report of a class in a compiled table"""
    path = TypePath.of(type_text)
    literal = lookup_type(table, path)
    if literal is None:
        raise TypingError(Diagnostic(DiagnosticCode.TYPE_ERROR, f"unknown type {type_text}"))
    return abstract_state(path, literal).render(path)


def corpus_files() -> List[Path]:
    directory = Path(settings.CORPUS_DIR)
    if not directory.is_dir():
        return []
    return sorted(directory.glob(f"*{settings.SOURCE_SUFFIX}"))


def find_corpus_file(name: str) -> Optional[Path]:
    """Look up a corpus program by file stem"""
    for path in corpus_files():
        if path.stem == name:
            return path
    return None
