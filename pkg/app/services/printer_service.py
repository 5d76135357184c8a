"""
Canonical rendering of tables, literals, composition expressions and terms.

Nested classes come first (sorted by name), then methods (sorted by name,
then arity); implemented interfaces are sorted. Output re-parses to a
structurally equal program.
"""
from typing import List, Optional, Tuple, Union

from app.models.ast import (
    Call,
    CodeExpr,
    CodeLiteral,
    Declaration,
    DeclarationTable,
    Expr,
    IntrinsicConst,
    Lit,
    Member,
    MethodMember,
    NestedClass,
    Rename,
    StaticCall,
    Sum,
    SuperAs,
    TraitRef,
    TypePath,
    Use,
    Var,
    member_sort_key,
)

INDENT = "  "


def print_type(path: TypePath, strip: Tuple[str, ...] = ()) -> str:
    if strip and len(path.segments) > len(strip) and path.startswith(strip):
        return ".".join(path.segments[len(strip):])
    return str(path)


def print_expr(e: Expr, strip: Tuple[str, ...] = ()) -> str:
    """Render a term; `strip` drops a leading type prefix (used for run output)"""
    if isinstance(e, Var):
        return e.name
    if isinstance(e, IntrinsicConst):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        return str(e.value)
    if isinstance(e, Call):
        args = ", ".join(print_expr(a, strip) for a in e.args)
        return f"{print_expr(e.receiver, strip)}.{e.name}({args})"
    if isinstance(e, StaticCall):
        args = ", ".join(print_expr(a, strip) for a in e.args)
        return f"{print_type(e.type, strip)}.{e.name}({args})"
    raise TypeError(f"not an expression: {e!r}")


def print_member(member: Member, indent: int = 0) -> str:
    """One method or nested class, indented by `indent` levels"""
    pad = INDENT * indent
    if isinstance(member, NestedClass):
        return f"{pad}{member.name} = {print_literal(member.literal, indent)}"
    sig = member.sig
    params = ", ".join(f"{p.type} {p.name}" for p in sig.params)
    head = f"{pad}{'static ' if sig.is_static else ''}method {sig.return_type} {sig.name}({params})"
    if member.body is None:
        return head
    return f"{head} {{return {print_expr(member.body)};}}"


def print_literal(literal: CodeLiteral, indent: int = 0) -> str:
    """Members print in canonical order"""
    parts = []
    if literal.is_interface:
        parts.append("interface")
    if literal.implements:
        parts.append("implements " + ", ".join(sorted(str(t) for t in set(literal.implements))))
    head = "{" + " ".join(parts)
    if not literal.members:
        return head + "}"
    body = "\n".join(
        print_member(m, indent + 1)
        for m in sorted(literal.members, key=member_sort_key)
    )
    return f"{head}\n{body}\n{INDENT * indent}}}"


def _atom(expr: CodeExpr, indent: int) -> str:
    text = print_code_expr(expr, indent)
    return f"({text})" if isinstance(expr, (Sum, Use)) else text


def _use_items(expr: Sum) -> List[CodeExpr]:
    items = [expr.right]
    left = expr.left
    while isinstance(left, Sum) and left.partial:
        items.append(left.right)
        left = left.left
    items.append(left)
    return items[::-1]


def print_code_expr(expr: CodeExpr, indent: int = 0) -> str:
    if isinstance(expr, Lit):
        return print_literal(expr.literal, indent)
    if isinstance(expr, TraitRef):
        return expr.name
    if isinstance(expr, Sum):
        if not expr.partial and isinstance(expr.left, Sum) and expr.left.partial:
            return "Use " + ", ".join(_atom(item, indent) for item in _use_items(expr))
        right = _atom(expr.right, indent)
        return f"{print_code_expr(expr.left, indent)} + {right}"
    if isinstance(expr, Rename):
        return f"{_atom(expr.arg, indent)}[rename {expr.source} into {expr.target}]"
    if isinstance(expr, SuperAs):
        target = expr.method if expr.arity is None else f"{expr.method}/{expr.arity}"
        return f"{_atom(expr.arg, indent)}[super {target} as {expr.alias}]"
    if isinstance(expr, Use):
        return "Use " + ", ".join(_atom(item, indent) for item in expr.items)
    raise TypeError(f"not a code expression: {expr!r}")


def print_declaration(decl: Declaration) -> str:
    return f"{decl.name} = {print_code_expr(decl.body)}"


def canonical_print(obj: Union[DeclarationTable, Declaration, CodeLiteral, CodeExpr, MethodMember, Optional[Expr]]) -> str:
    """Deterministic text for any program fragment; tables end with a newline"""
    if isinstance(obj, DeclarationTable):
        return "".join(print_declaration(d) + "\n" for d in obj)
    if isinstance(obj, Declaration):
        return print_declaration(obj)
    if isinstance(obj, CodeLiteral):
        return print_literal(obj)
    if isinstance(obj, (MethodMember, NestedClass)):
        return print_member(obj)
    if isinstance(obj, (Lit, TraitRef, Sum, Rename, SuperAs, Use)):
        return print_code_expr(obj)
    return print_expr(obj)
