"""
Flattening: literal sum, nested-class rename, `super ... as`, single-step
composition reduction and the top-down compilation driver.

Reduction is call-by-value, left to right: a sum reduces its left operand to
a literal first, then its right operand, then itself; rename and super fire
only once their argument is a literal. Declarations compile in source order
and a trait is type-checked the first time a later declaration needs it.
In maximal mode every earlier declaration that type-checks is verified
before each step; the rest are skipped until they become typable.
"""
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterator, List, Optional, Set, Tuple

from app.core.logging import get_logger
from app.models.ast import (
    THIS,
    CodeExpr,
    CodeLiteral,
    Declaration,
    DeclarationTable,
    Lit,
    MethodMember,
    NestedClass,
    Rename,
    Sum,
    SuperAs,
    TraitRef,
    TypePath,
    literals_of,
    trait_refs_of,
)
from app.models.diagnostics import (
    NO_SPAN,
    CompositionError,
    Diagnostic,
    DiagnosticCode,
    Span,
    SyntaxProblem,
    TypingError,
    pick_span,
    sorted_diagnostics,
)
from app.services.table_service import (
    consistent_subtype,
    map_literal_types,
    normalize_literal,
    referenced_roots,
    substitute_this,
    wf_literal,
    wf_program,
)
from app.services.typecheck_service import check_declaration, check_literal

logger = get_logger(__name__)

DEMAND = "demand"
MAXIMAL = "maximal"

TypecheckHook = Callable[[DeclarationTable, Declaration], List[Diagnostic]]


def _clash(code: DiagnosticCode, message: str, span: Span = NO_SPAN) -> CompositionError:
    return CompositionError(Diagnostic(code, message, span))


# ============== Sum ==============

def _sum_methods(a: MethodMember, b: MethodMember) -> MethodMember:
    sa, sb = a.sig, b.sig
    same_types = (
        sa.is_static == sb.is_static
        and sa.return_type == sb.return_type
        and sa.param_types == sb.param_types
    )
    if not same_types:
        raise _clash(DiagnosticCode.METHOD_CLASH,
                     f"method {sa.name}/{sa.arity} is composed with a header of different types",
                     pick_span(b.span, a.span))
    if a.body is not None and b.body is not None:
        raise _clash(DiagnosticCode.METHOD_CLASH,
                     f"method {sa.name}/{sa.arity} is implemented on both sides",
                     pick_span(b.span, a.span))
    if a.body is not None:
        return a
    if b.body is not None:
        return b
    # both abstract: keep the smaller parameter naming so the sum is symmetric
    return min(a, b, key=lambda m: m.sig.param_names)


def sum_literals(left: CodeLiteral, right: CodeLiteral) -> CodeLiteral:
    """
    L1 + L2: union of implements and members, same-key members composed
    recursively. Raises CompositionError (MethodClash or ClassClash).
    """
    if left.is_interface != right.is_interface:
        raise _clash(DiagnosticCode.CLASS_CLASH, "a class is composed with an interface",
                     pick_span(right.span, left.span))
    right_members = right.member_map()
    left_members = left.member_map()
    merged: Dict[Tuple, object] = {}
    for key in sorted(set(left_members) & set(right_members)):
        a, b = left_members[key], right_members[key]
        if isinstance(a, NestedClass):
            merged[key] = NestedClass(a.name, sum_literals(a.literal, b.literal), a.span)
        else:
            merged[key] = _sum_methods(a, b)
    members = [merged.get(m.key, m) for m in left.members]
    members += [m for m in right.members if m.key not in left_members]
    implements = list(left.implements) + [t for t in right.implements if t not in left.implements]
    return CodeLiteral(left.is_interface, tuple(implements), tuple(members), left.span)


# ============== Rename ==============

def rename_nested(literal: CodeLiteral, source: str, target: str) -> CodeLiteral:
    """Rename nested class `source` to `target` and every `This.source...` path"""
    if literal.nested(source) is None:
        raise _clash(DiagnosticCode.NOT_WELL_FORMED, f"cannot rename {source}: no such nested class", literal.span)
    if source == target:
        return literal
    if literal.nested(target) is not None:
        raise _clash(DiagnosticCode.NOT_WELL_FORMED, f"cannot rename {source} into {target}: {target} already exists", literal.span)

    prefix = (THIS, source)

    def fn(path: TypePath) -> TypePath:
        if path.startswith(prefix):
            return TypePath((THIS, target) + path.segments[2:], path.span)
        return path

    renamed = map_literal_types(literal, fn)
    members = [
        NestedClass(target, m.literal, m.span) if isinstance(m, NestedClass) and m.name == source else m
        for m in renamed.members
    ]
    return renamed.with_members(members)


# ============== Super ==============

def super_extract(literal: CodeLiteral, method: str, arity: Optional[int], alias: str) -> CodeLiteral:
    """Make `method` abstract and move its body to `alias` with the same header"""
    candidates = [m for m in literal.methods_named(method) if arity is None or m.sig.arity == arity]
    if not candidates:
        shown = method if arity is None else f"{method}/{arity}"
        raise _clash(DiagnosticCode.NOT_WELL_FORMED, f"super: no method {shown}", literal.span)
    if len(candidates) > 1:
        raise _clash(DiagnosticCode.NOT_WELL_FORMED,
                     f"super: method {method} is overloaded, give an arity as {method}/n", literal.span)
    target = candidates[0]
    if target.body is None:
        raise _clash(DiagnosticCode.NOT_WELL_FORMED, f"super: method {method} is abstract", pick_span(target.span, literal.span))
    if literal.method(alias, target.sig.arity) is not None:
        raise _clash(DiagnosticCode.NOT_WELL_FORMED,
                     f"super: {alias}/{target.sig.arity} already exists", pick_span(target.span, literal.span))
    moved = MethodMember(
        replace(target.sig, name=alias),
        target.body,
        target.span,
    )
    members = [m.abstract() if m is target else m for m in literal.members]
    return literal.with_members(members + [moved])


# ============== Single step ==============

@dataclass(frozen=True)
class ComposeStep:
    decl_index: int
    decl_name: str
    rule: str
    path: str
    before: CodeExpr
    after: CodeExpr
    # working table the step ran against; first decl_index entries are flattened
    scope: Optional[DeclarationTable] = field(default=None, compare=False, repr=False)

    def render(self) -> str:
        return f"{self.decl_name}: {self.rule} at {self.path}"


def _lookup_trait(ref: TraitRef, table: DeclarationTable, decl_index: Optional[int]) -> Lit:
    index = table.index_of(ref.name)
    if index is None:
        raise _clash(DiagnosticCode.UNKNOWN_TRAIT, f"unknown trait {ref.name}", ref.span)
    if decl_index is not None and index >= decl_index:
        raise _clash(DiagnosticCode.ORDER_ERROR,
                     f"trait {ref.name} is used before it is compiled", ref.span)
    body = table[index].body
    if not isinstance(body, Lit):
        raise _clash(DiagnosticCode.ORDER_ERROR, f"trait {ref.name} is not flattened yet", ref.span)
    return Lit(body.literal, ref.span)


def _checked_sum(expr: Sum, table: DeclarationTable) -> Lit:
    result = sum_literals(expr.left.literal, expr.right.literal)
    if expr.partial:
        return Lit(result, expr.span)
    problems = consistent_subtype(table, result)
    if problems:
        first = sorted_diagnostics(problems)[0]
        raise _clash(DiagnosticCode.IMPLEMENTS_CLASH, first.message, pick_span(first.span, expr.span))
    return Lit(result, expr.span)


def _locate(exc: CompositionError, span: Span) -> CompositionError:
    located = exc.diagnostic.located(span)
    return exc if located is exc.diagnostic else CompositionError(located)


def _step(expr: CodeExpr, table: DeclarationTable, decl_index: Optional[int], path: str):
    if isinstance(expr, Lit):
        return None
    if isinstance(expr, TraitRef):
        return _lookup_trait(expr, table, decl_index), "LOOK-UP", path
    if isinstance(expr, Sum):
        if not isinstance(expr.left, Lit):
            inner, rule, at = _step(expr.left, table, decl_index, f"{path}.left")
            return Sum(inner, expr.right, expr.span, expr.partial), rule, at
        if not isinstance(expr.right, Lit):
            inner, rule, at = _step(expr.right, table, decl_index, f"{path}.right")
            return Sum(expr.left, inner, expr.span, expr.partial), rule, at
        try:
            return _checked_sum(expr, table), "SUM", path
        except CompositionError as exc:
            raise _locate(exc, expr.span)
    if isinstance(expr, (Rename, SuperAs)):
        if not isinstance(expr.arg, Lit):
            inner, rule, at = _step(expr.arg, table, decl_index, f"{path}.arg")
            if isinstance(expr, Rename):
                return Rename(inner, expr.source, expr.target, expr.span), rule, at
            return SuperAs(inner, expr.method, expr.arity, expr.alias, expr.span), rule, at
        try:
            if isinstance(expr, Rename):
                return Lit(rename_nested(expr.arg.literal, expr.source, expr.target), expr.span), "RENAME", path
            return Lit(super_extract(expr.arg.literal, expr.method, expr.arity, expr.alias), expr.span), "SUPER", path
        except CompositionError as exc:
            raise _locate(exc, expr.span)
    raise TypeError(f"cannot compose {expr!r}; desugar Use first")


def step_compose(expr: CodeExpr, table: DeclarationTable, decl_index: Optional[int] = None):
    """
    Reduce the leftmost-innermost redex of `expr`.

    `table` resolves trait names; when `decl_index` is given only the
    declarations before it count as compiled. Returns (expr', rule, path),
    or None when `expr` is already a literal.
    """
    return _step(expr, table, decl_index, "root")


# ============== Top-down driver ==============

@dataclass
class ComposeResult:
    table: DeclarationTable
    steps: List[ComposeStep] = field(default_factory=list)
    # declarations in the order they were type-checked
    checked: List[str] = field(default_factory=list)

    def trace_lines(self) -> List[str]:
        return [s.render() for s in self.steps]


def _first_error(diagnostics: List[Diagnostic], index: int, error=TypingError):
    first = sorted_diagnostics(diagnostics)[0]
    return error(Diagnostic(first.code, first.message, first.span, index))


def _prepare_literals(table: DeclarationTable, expr: CodeExpr, normalize: bool) -> CodeExpr:
    """Normalize source literals, then require well-formedness and consistent subtyping"""
    def visit(e: CodeExpr) -> CodeExpr:
        if isinstance(e, Lit):
            literal = normalize_literal(table, e.literal) if normalize else e.literal
            problems = wf_literal(literal) + consistent_subtype(table, literal)
            if problems:
                raise SyntaxProblem(sorted_diagnostics(problems)[0].located(e.span))
            return Lit(literal, e.span)
        if isinstance(e, Sum):
            return Sum(visit(e.left), visit(e.right), e.span, e.partial)
        if isinstance(e, Rename):
            return Rename(visit(e.arg), e.source, e.target, e.span)
        if isinstance(e, SuperAs):
            return SuperAs(visit(e.arg), e.method, e.arity, e.alias, e.span)
        return e
    return visit(expr)


def demanded_declarations(table: DeclarationTable, expr: CodeExpr, index: int) -> List[str]:
    """
    Already-compiled declarations needed before `expr` can be flattened:
    the traits it names plus every top-level type reachable from their
    bodies. Raises OrderError when that closure reaches the declaration
    being compiled.
    """
    current = table[index].name
    pending = [ref.name for ref in trait_refs_of(expr)]
    demanded: Set[str] = set()
    while pending:
        name = pending.pop()
        if name in demanded:
            continue
        if name == current:
            raise CompositionError(Diagnostic(
                DiagnosticCode.ORDER_ERROR,
                f"{current} is needed to check the traits it reuses; no declaration order works",
                table[index].span, index,
            ))
        position = table.index_of(name)
        if position is None or position >= index:
            continue
        demanded.add(name)
        literal = table[position].literal
        if literal is not None:
            pending.extend(sorted(referenced_roots(literal)))
    return sorted(demanded, key=table.index_of)


def typable_declarations(
    table: DeclarationTable,
    index: int,
    hook: TypecheckHook,
    verified: Set[str],
) -> Tuple[List[str], Dict[str, List[Diagnostic]]]:
    """
    Earlier declarations that type-check against the flattened prefix, in
    source order, plus the diagnostics of the ones left out. Names already
    in `verified` are not checked again.
    """
    scope = table.prefix(index)
    typable: List[str] = []
    skipped: Dict[str, List[Diagnostic]] = {}
    for name in table.names[:index]:
        if name not in verified:
            diagnostics = hook(scope, scope.get(name))
            if diagnostics:
                logger.debug("skipping %s before compiling %s", name, table[index].name)
                skipped[name] = diagnostics
                continue
        typable.append(name)
    return typable, skipped


def iter_compile(
    table: DeclarationTable,
    hook: Optional[TypecheckHook] = None,
    dependency_mode: str = DEMAND,
    normalize: bool = True,
) -> Iterator[ComposeStep]:
    """
    Compile declarations one at a time, yielding every composition step.
    The generator's return value is the ComposeResult; the first error
    raises and carries the index of the declaration being compiled.
    A trait skipped by maximal mode stops compilation only when reused.
    """
    hook = hook or check_declaration
    if dependency_mode not in (DEMAND, MAXIMAL):
        raise ValueError(f"unknown dependency mode {dependency_mode!r}")
    problems = wf_program(table)
    if problems:
        first = sorted_diagnostics(problems)[0]
        raise SyntaxProblem(first)

    result = ComposeResult(table)
    verified: Set[str] = set()
    working = table

    def verify(names: List[str], index: int) -> None:
        scope = working.prefix(index)
        for name in names:
            if name in verified:
                continue
            logger.debug("checking %s before compiling %s", name, working[index].name)
            diagnostics = hook(scope, scope.get(name))
            if diagnostics:
                raise _first_error(diagnostics, index)
            verified.add(name)
            result.checked.append(name)

    for index, decl in enumerate(table):
        expr = _prepare_literals(working.with_this(None), decl.body, normalize)
        if dependency_mode == MAXIMAL:
            typable, skipped = typable_declarations(working, index, hook, verified)
            for name in typable:
                if name not in verified:
                    verified.add(name)
                    result.checked.append(name)
            logger.debug("compiling %s, typable %s", decl.name, typable)
            for ref in trait_refs_of(expr):
                if ref.name in skipped:
                    raise _first_error(skipped[ref.name], index)
        else:
            demanded = demanded_declarations(working, expr, index)
            logger.debug("compiling %s, demanded %s", decl.name, demanded)
            verify(demanded, index)

        while not isinstance(expr, Lit):
            try:
                reduced = step_compose(expr, working, index)
            except CompositionError as exc:
                raise CompositionError(exc.diagnostic.in_declaration(index))
            after, rule, path = reduced
            step = ComposeStep(index, decl.name, rule, path, expr, after, working)
            logger.debug("%s", step.render())
            result.steps.append(step)
            yield step
            expr = after

        literal = expr.literal
        if decl.is_class:
            literal = substitute_this(literal, decl.name)
        working = working.replace_at(index, Declaration(decl.name, Lit(literal, expr.span), decl.span))

    result.table = working
    for index, decl in enumerate(working):
        if decl.name in verified:
            continue
        diagnostics = hook(working, decl)
        if diagnostics:
            raise _first_error(diagnostics, index)
        verified.add(decl.name)
        result.checked.append(decl.name)
    return result


def compile_program(
    table: DeclarationTable,
    hook: Optional[TypecheckHook] = None,
    dependency_mode: str = DEMAND,
    normalize: bool = True,
) -> ComposeResult:
    """Flatten and fully type-check `table`; raises on the first error"""
    steps = iter_compile(table, hook, dependency_mode, normalize)
    while True:
        try:
            next(steps)
        except StopIteration as done:
            return done.value


def wrong_count(table: DeclarationTable, expr: CodeExpr) -> int:
    """Number of literal sub-expressions of `expr` that do not type-check"""
    count = 0
    for literal in literals_of(expr):
        if check_literal(TypePath((THIS,)), table.with_this(literal), literal):
            count += 1
    return count
