"""
Declaration, literal, method and expression typing plus the coherence checks
(factory / getter / wither classification).
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from app.models.ast import (
    THIS,
    THIS_VAR,
    Call,
    CodeLiteral,
    Declaration,
    DeclarationTable,
    Expr,
    IntrinsicConst,
    Lit,
    MethodMember,
    MethodSig,
    StaticCall,
    TypePath,
    Var,
)
from app.models.diagnostics import NO_SPAN, Diagnostic, DiagnosticCode, Span, TypingError, pick_span
from app.services.prelude_service import VOID
from app.services.table_service import lookup_type, substitute_this

TYPE_ERROR = DiagnosticCode.TYPE_ERROR


def _type_error(message: str, span: Span = NO_SPAN) -> TypingError:
    return TypingError(Diagnostic(TYPE_ERROR, message, span))


@dataclass(frozen=True)
class TypeEnv:
    """Ordered variable bindings; `this` is bound only inside instance methods"""
    bindings: Tuple[Tuple[str, TypePath], ...] = ()

    def lookup(self, name: str) -> Optional[TypePath]:
        for bound, type_ in reversed(self.bindings):
            if bound == name:
                return type_
        return None

    def bind(self, name: str, type_: TypePath) -> "TypeEnv":
        return TypeEnv(self.bindings + ((name, type_),))


# ============== Subtyping ==============

def subtype(table: DeclarationTable, t1: TypePath, t2: TypePath) -> bool:
    """Reflexive-transitive closure of declared implements edges"""
    if t1 == t2:
        return True
    seen = {t1}
    frontier = [t1]
    while frontier:
        current = frontier.pop()
        literal = lookup_type(table, current)
        if literal is None:
            continue
        for parent in literal.implements:
            if parent == t2:
                return True
            if parent not in seen:
                seen.add(parent)
                frontier.append(parent)
    return False


def _resolve(table: DeclarationTable, path: TypePath, span: Span = NO_SPAN) -> CodeLiteral:
    literal = lookup_type(table, path)
    if literal is None:
        raise _type_error(f"unknown type {path}", pick_span(path.span, span))
    return literal


# ============== Expressions ==============

def type_expr(table: DeclarationTable, env: TypeEnv, e: Expr) -> TypePath:
    """Synthesize the type of `e`; argument positions are checked by subtyping"""
    if isinstance(e, Var):
        bound = env.lookup(e.name)
        if bound is None:
            raise _type_error(f"unbound variable {e.name}", e.span)
        return bound
    if isinstance(e, IntrinsicConst):
        path = TypePath((e.type_name,))
        if lookup_type(table, path) is None:
            raise _type_error(f"{e.type_name} constants need the prelude", e.span)
        return path
    if isinstance(e, Call):
        receiver = type_expr(table, env, e.receiver)
        member = _resolve(table, receiver, e.span).method(e.name, len(e.args))
        if member is None or member.sig.is_static:
            raise _type_error(f"{receiver} has no method {e.name}/{len(e.args)}", e.span)
        _check_args(table, env, member.sig, e.args, e)
        return member.sig.return_type
    if isinstance(e, StaticCall):
        member = _resolve(table, e.type, e.span).method(e.name, len(e.args))
        if member is None or not member.sig.is_static:
            raise _type_error(f"{e.type} has no static method {e.name}/{len(e.args)}", e.span)
        _check_args(table, env, member.sig, e.args, e)
        return member.sig.return_type
    raise TypeError(f"not an expression: {e!r}")


def _check_args(table: DeclarationTable, env: TypeEnv, sig: MethodSig, args, call: Expr) -> None:
    for param, arg in zip(sig.params, args):
        actual = type_expr(table, env, arg)
        if not subtype(table, actual, param.type):
            raise _type_error(
                f"argument {param.name} of {sig.name} has type {actual}, expected {param.type}",
                pick_span(arg.span, call.span),
            )


# ============== Members and literals ==============

def check_method(self_type: TypePath, table: DeclarationTable, member: MethodMember) -> List[Diagnostic]:
    """Signature types resolve and the body, if any, has the declared return type"""
    sig = member.sig
    try:
        _resolve(table, sig.return_type, member.span)
        for p in sig.params:
            _resolve(table, p.type, member.span)
        if member.body is None:
            return []
        env = TypeEnv() if sig.is_static else TypeEnv(((THIS_VAR, self_type),))
        for p in sig.params:
            env = env.bind(p.name, p.type)
        actual = type_expr(table, env, member.body)
        if not subtype(table, actual, sig.return_type):
            raise _type_error(f"body of {sig.name} has type {actual}, expected {sig.return_type}", member.span)
    except TypingError as exc:
        return [exc.diagnostic.located(member.span)]
    return []


def check_literal(self_type: TypePath, table: DeclarationTable, literal: CodeLiteral) -> List[Diagnostic]:
    """Check every method of `literal` and of its nested classes"""
    out: List[Diagnostic] = []
    for m in literal.methods():
        out.extend(check_method(self_type, table, m))
    for nested in literal.nested_classes():
        out.extend(check_literal(self_type.child(nested.name), table, nested.literal))
    return out


def check_declaration(table: DeclarationTable, decl: Declaration) -> List[Diagnostic]:
    """
    A class is checked with `This` replaced by its own name and must be
    coherent; a trait is checked with `This` bound to its own literal.
    """
    literal = decl.literal
    if literal is None:
        raise ValueError(f"{decl.name} is not flattened")
    if decl.is_trait:
        return check_literal(TypePath((THIS,)), table.with_this(literal), literal)
    nominal = TypePath((decl.name,))
    resolved = substitute_this(literal, decl.name)
    scope = table.put(Declaration(decl.name, Lit(resolved, decl.body.span), decl.span)).with_this(None)
    out = check_literal(nominal, scope, resolved)
    for problem in coherence_problems(nominal, resolved):
        out.append(Diagnostic(DiagnosticCode.NOT_COHERENT, problem, decl.span))
    return out


# ============== Coherence ==============

def wither_name(field_name: str) -> str:
    return "with" + field_name[:1].upper() + field_name[1:]


@dataclass
class AbstractStateReport:
    factory: Optional[MethodSig] = None
    getters: Dict[str, MethodSig] = field(default_factory=dict)
    withers: Dict[str, MethodSig] = field(default_factory=dict)
    unclassified: List[MethodSig] = field(default_factory=list)
    hints: List[str] = field(default_factory=list)

    @property
    def is_coherent(self) -> bool:
        return not self.unclassified

    def render(self, nominal: TypePath) -> str:
        lines = [f"abstract state of {nominal}:"]
        if self.factory is None:
            lines.append("  factory: none")
        else:
            params = ", ".join(f"{p.type} {p.name}" for p in self.factory.params)
            lines.append(f"  factory: {self.factory.name}({params})")
        lines.append("  getters: " + (", ".join(sorted(self.getters)) or "none"))
        lines.append("  withers: " + (", ".join(sorted(s.name for s in self.withers.values())) or "none"))
        lines.append("  unclassified: " + (", ".join(f"{s.name}/{s.arity}" for s in self.unclassified) or "none"))
        lines.extend(f"  hint: {h}" for h in self.hints)
        lines.append(f"  coherent: {'yes' if self.is_coherent else 'no'}")
        return "\n".join(lines)


def abstract_state(nominal: TypePath, literal: CodeLiteral) -> AbstractStateReport:
    """Classify the abstract methods of a (flattened, This-free) class literal"""
    report = AbstractStateReport()
    statics = [m.sig for m in literal.methods() if m.is_abstract and m.sig.is_static]
    if len(statics) == 1 and statics[0].return_type == nominal:
        report.factory = statics[0]
    else:
        report.unclassified.extend(statics)
    fields = {p.name: p.type for p in report.factory.params} if report.factory else {}
    withers = {wither_name(name): name for name in fields}
    for m in literal.methods():
        sig = m.sig
        if not m.is_abstract or sig.is_static:
            continue
        if sig.arity == 0 and sig.name in fields and sig.return_type == fields[sig.name]:
            report.getters[sig.name] = sig
            continue
        field_name = withers.get(sig.name)
        if (field_name is not None and sig.arity == 1
                and sig.param_types[0] == fields[field_name] and sig.return_type == nominal):
            report.withers[field_name] = sig
            continue
        report.unclassified.append(sig)
        if sig.arity == 1 and sig.name in fields and sig.return_type == TypePath((VOID,)):
            report.hints.append(f"{sig.name} looks like a setter; only getters and withers are supported")
        elif report.factory is not None:
            report.hints.append(f"{sig.name} is not a getter or wither for any factory parameter")
    report.unclassified.sort(key=lambda s: (s.name, s.arity))
    return report


def coherence_problems(nominal: TypePath, literal: CodeLiteral) -> List[str]:
    """One message per incoherent class, nested classes first"""
    out: List[str] = []
    for nested in literal.nested_classes():
        out.extend(coherence_problems(nominal.child(nested.name), nested.literal))
    if literal.is_interface:
        return out
    report = abstract_state(nominal, literal)
    if not report.is_coherent:
        names = ", ".join(f"{s.name}/{s.arity}" for s in report.unclassified)
        out.append(f"class {nominal} is not coherent: abstract methods {names} are not part of the abstract state")
    return out


def coherent(nominal: TypePath, literal: CodeLiteral) -> bool:
    """A class literal whose abstract methods all belong to its abstract state"""
    return not coherence_problems(nominal, literal)
