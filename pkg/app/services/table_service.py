"""
Class-table services: lookup, well-formedness, consistentSubtype and the
interface-member import normalization
"""
from collections import Counter
from typing import Callable, Iterable, List, Optional, Set

from app.models.ast import (
    THIS,
    THIS_VAR,
    Call,
    CodeLiteral,
    DeclarationTable,
    Expr,
    Lit,
    MethodMember,
    MethodSig,
    NestedClass,
    Param,
    StaticCall,
    TypePath,
    Var,
    literals_of,
    sub_expressions,
)
from app.models.diagnostics import Diagnostic, DiagnosticCode, pick_span
from app.services.prelude_service import PRELUDE_NAMES, prelude_literal

NOT_WF = DiagnosticCode.NOT_WELL_FORMED


# ============== Lookup ==============

def lookup_type(table: DeclarationTable, path: TypePath) -> Optional[CodeLiteral]:
    """
    Navigate a type path through top-level declarations and nested classes.
    `This` resolves to the table's current binding; prelude names resolve
    when the prelude is on. Absence is a result, not an error.
    """
    root = path.segments[0]
    if root == THIS:
        literal = table.this_literal
    else:
        decl = table.get(root)
        if decl is not None:
            literal = decl.body.literal if isinstance(decl.body, Lit) else None
        elif table.prelude:
            literal = prelude_literal(root)
        else:
            literal = None
    for segment in path.segments[1:]:
        if literal is None:
            return None
        nested = literal.nested(segment)
        literal = nested.literal if nested else None
    return literal


def lookup_member(table: DeclarationTable, path: TypePath, name: str, arity: int) -> Optional[MethodMember]:
    """Find method name/arity in the literal that `path` resolves to"""
    literal = lookup_type(table, path)
    if literal is None:
        return None
    return literal.method(name, arity)


# ============== Type rewriting ==============

def map_expr_types(e: Expr, fn: Callable[[TypePath], TypePath]) -> Expr:
    if isinstance(e, Call):
        return Call(map_expr_types(e.receiver, fn), e.name,
                    tuple(map_expr_types(a, fn) for a in e.args), e.span)
    if isinstance(e, StaticCall):
        return StaticCall(fn(e.type), e.name, tuple(map_expr_types(a, fn) for a in e.args), e.span)
    return e


def map_literal_types(literal: CodeLiteral, fn: Callable[[TypePath], TypePath]) -> CodeLiteral:
    """Rewrite every type position of a literal, nested classes included"""
    members = []
    for m in literal.members:
        if isinstance(m, NestedClass):
            members.append(NestedClass(m.name, map_literal_types(m.literal, fn), m.span))
            continue
        sig = m.sig
        params = tuple(Param(fn(p.type), p.name) for p in sig.params)
        new_sig = MethodSig(sig.is_static, sig.name, params, fn(sig.return_type))
        body = map_expr_types(m.body, fn) if m.body is not None else None
        members.append(MethodMember(new_sig, body, m.span))
    return CodeLiteral(
        is_interface=literal.is_interface,
        implements=tuple(fn(t) for t in literal.implements),
        members=tuple(members),
        span=literal.span,
    )


def substitute_this(literal: CodeLiteral, class_name: str) -> CodeLiteral:
    """L[This = C]"""
    def fn(path: TypePath) -> TypePath:
        return path.with_root((class_name,)) if path.is_this_rooted else path
    return map_literal_types(literal, fn)


def literal_type_paths(literal: CodeLiteral) -> Iterable[TypePath]:
    """Every type path written anywhere in `literal`, nested classes included"""
    yield from literal.implements
    for m in literal.members:
        if isinstance(m, NestedClass):
            yield from literal_type_paths(m.literal)
            continue
        yield m.sig.return_type
        yield from m.sig.param_types
        if m.body is not None:
            for e in sub_expressions(m.body):
                if isinstance(e, StaticCall):
                    yield e.type


def referenced_roots(literal: CodeLiteral) -> Set[str]:
    """Top-level names a literal refers to in type positions"""
    return {
        p.root for p in literal_type_paths(literal)
        if p.root != THIS and p.root not in PRELUDE_NAMES
    }


# ============== Well-formedness ==============

def _free_vars(e: Expr) -> Iterable[Var]:
    for sub in sub_expressions(e):
        if isinstance(sub, Var):
            yield sub


def wf_literal(literal: CodeLiteral) -> List[Diagnostic]:
    """One NotWellFormed diagnostic per violated condition, nested classes included"""
    out: List[Diagnostic] = []
    keys = Counter(m.key for m in literal.members)
    for m in literal.members:
        if keys[m.key] > 1:
            what = f"nested class {m.name}" if isinstance(m, NestedClass) else f"method {m.name}/{m.sig.arity}"
            out.append(Diagnostic(NOT_WF, f"duplicate {what}", m.span))
            keys[m.key] = 0
    for m in literal.members:
        if isinstance(m, NestedClass):
            if m.name == THIS:
                out.append(Diagnostic(NOT_WF, "no nested class may be called This", m.span))
            out.extend(wf_literal(m.literal))
            continue
        sig = m.sig
        names = sig.param_names
        if len(set(names)) != len(names):
            out.append(Diagnostic(NOT_WF, f"method {sig.name} has duplicate parameter names", m.span))
        if THIS_VAR in names:
            out.append(Diagnostic(NOT_WF, f"method {sig.name} has a parameter named this", m.span))
        if m.body is not None:
            in_scope = set(names) if sig.is_static else set(names) | {THIS_VAR}
            for var in _free_vars(m.body):
                if var.name not in in_scope:
                    out.append(Diagnostic(NOT_WF, f"variable {var.name} is not in scope in {sig.name}", pick_span(var.span, m.span)))
        if literal.is_interface:
            if m.body is not None:
                out.append(Diagnostic(NOT_WF, f"interface method {sig.name} must be abstract", m.span))
            if sig.is_static:
                out.append(Diagnostic(NOT_WF, f"interface may not declare static method {sig.name}", m.span))
    return out


def wf_program(table: DeclarationTable) -> List[Diagnostic]:
    """Unique top-level names, reserved names untouched, every literal well formed"""
    out: List[Diagnostic] = []
    seen: Set[str] = set()
    for index, decl in enumerate(table):
        if decl.name == THIS:
            out.append(Diagnostic(NOT_WF, "This cannot be declared at top level", decl.span, index))
        elif table.prelude and decl.name in PRELUDE_NAMES:
            out.append(Diagnostic(NOT_WF, f"{decl.name} is a prelude class", decl.span, index))
        elif decl.name in seen:
            out.append(Diagnostic(NOT_WF, f"duplicate top-level name {decl.name}", decl.span, index))
        seen.add(decl.name)
        for literal in literals_of(decl.body):
            out.extend(d.in_declaration(index) for d in wf_literal(literal))
    return out


# ============== consistentSubtype ==============

def _same_types(a: MethodMember, b: MethodMember) -> bool:
    return (
        a.sig.is_static == b.sig.is_static
        and a.sig.return_type == b.sig.return_type
        and a.sig.param_types == b.sig.param_types
    )


def _has_cycle(table: DeclarationTable, start: TypePath) -> bool:
    stack = [(start, (start,))]
    while stack:
        path, trail = stack.pop()
        literal = lookup_type(table, path)
        if literal is None:
            continue
        for parent in literal.implements:
            if parent in trail:
                return True
            stack.append((parent, trail + (parent,)))
    return False


def consistent_subtype(table: DeclarationTable, literal: CodeLiteral, bind_this: bool = True) -> List[Diagnostic]:
    """
    Every implemented type is an interface, nested literals are consistent,
    and every method of an implemented interface is declared with the same
    types. `This` is bound to `literal` unless the caller already bound it.
    """
    scope = table.with_this(literal) if bind_this else table
    return _consistent(scope, literal)


def _consistent(table: DeclarationTable, literal: CodeLiteral) -> List[Diagnostic]:
    out: List[Diagnostic] = []
    span = literal.span
    for parent in literal.implements:
        target = lookup_type(table, parent)
        if target is None:
            out.append(Diagnostic(NOT_WF, f"cannot resolve implemented type {parent}", pick_span(parent.span, span)))
            continue
        if not target.is_interface:
            out.append(Diagnostic(NOT_WF, f"{parent} is not an interface", pick_span(parent.span, span)))
            continue
        if _has_cycle(table, parent):
            out.append(Diagnostic(NOT_WF, f"circular implements through {parent}", pick_span(parent.span, span)))
            continue
        for required in target.methods():
            own = literal.method(required.sig.name, required.sig.arity)
            if own is None:
                out.append(Diagnostic(NOT_WF, f"missing method {required.sig.name}/{required.sig.arity} of {parent}", span))
            elif not _same_types(own, required):
                out.append(Diagnostic(NOT_WF, f"method {required.sig.name} does not match the signature in {parent}", pick_span(own.span, span)))
    for nested in literal.nested_classes():
        out.extend(_consistent(table, nested.literal))
    return out


# ============== Interface-member import ==============

def _interface_methods(table: DeclarationTable, parents, seen: Set[TypePath]) -> List[MethodMember]:
    found: List[MethodMember] = []
    for parent in parents:
        if parent in seen:
            continue
        seen.add(parent)
        target = lookup_type(table, parent)
        if target is None or not target.is_interface:
            continue
        found.extend(m.abstract() for m in target.methods())
        found.extend(_interface_methods(table, target.implements, seen))
    return found


def normalize_literal(table: DeclarationTable, literal: CodeLiteral) -> CodeLiteral:
    """
    Add abstract copies of interface methods a source literal does not
    declare. Unresolvable parents are left for consistent_subtype to report.
    """
    return _normalize(table.with_this(literal), literal)


def _normalize(table: DeclarationTable, literal: CodeLiteral) -> CodeLiteral:
    members = []
    for m in literal.members:
        if isinstance(m, NestedClass):
            members.append(NestedClass(m.name, _normalize(table, m.literal), m.span))
        else:
            members.append(m)
    present = {m.key for m in members}
    for imported in _interface_methods(table, literal.implements, set()):
        if imported.key not in present:
            members.append(imported)
            present.add(imported.key)
    return literal.with_members(members)
