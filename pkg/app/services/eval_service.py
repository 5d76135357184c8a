"""
Small-step interpreter over a flattened, type-checked table.

Values are calls to abstract static methods (factories) whose arguments are
values, plus prelude constants. Instance calls dispatch on the receiver's
factory type: an implemented method runs its body, an abstract getter
projects a factory argument and an abstract wither rebuilds the factory call.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from app.core.config import settings
from app.core.logging import get_logger
from app.models.ast import (
    THIS_VAR,
    Call,
    DeclarationTable,
    Expr,
    IntrinsicConst,
    StaticCall,
    Var,
)
from app.models.diagnostics import Diagnostic, DiagnosticCode, EvaluationError, Span
from app.services.prelude_service import intrinsic_step
from app.services.printer_service import print_expr
from app.services.table_service import lookup_member
from app.services.typecheck_service import wither_name

logger = get_logger(__name__)


def _stuck(message: str, span: Span) -> EvaluationError:
    return EvaluationError(Diagnostic(DiagnosticCode.STUCK, message, span))


def is_value(table: DeclarationTable, e: Expr) -> bool:
    """Constants, and factory calls on values whose class has that factory"""
    if isinstance(e, IntrinsicConst):
        return True
    if not isinstance(e, StaticCall):
        return False
    member = lookup_member(table, e.type, e.name, len(e.args))
    if member is None or not member.sig.is_static or not member.is_abstract:
        return False
    return all(is_value(table, a) for a in e.args)


def substitute(e: Expr, mapping: Dict[str, Expr]) -> Expr:
    """Simultaneous substitution; values are closed so capture cannot happen"""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Call):
        return Call(substitute(e.receiver, mapping), e.name,
                    tuple(substitute(a, mapping) for a in e.args), e.span)
    if isinstance(e, StaticCall):
        return StaticCall(e.type, e.name, tuple(substitute(a, mapping) for a in e.args), e.span)
    return e


def _first_non_value(table: DeclarationTable, args: Tuple[Expr, ...]) -> Optional[int]:
    for i, a in enumerate(args):
        if not is_value(table, a):
            return i
    return None


def _replace_arg(args: Tuple[Expr, ...], index: int, new: Expr) -> Tuple[Expr, ...]:
    return args[:index] + (new,) + args[index + 1:]


def _dispatch(table: DeclarationTable, e: Call) -> Tuple[str, Expr]:
    receiver = e.receiver
    if isinstance(receiver, IntrinsicConst):
        try:
            reduced = intrinsic_step(e)
        except EvaluationError as exc:
            raise EvaluationError(exc.diagnostic.located(e.span))
        if reduced is None:
            raise _stuck(f"{receiver.type_name} has no method {e.name}/{len(e.args)}", e.span)
        return "INTRINSIC", reduced
    member = lookup_member(table, receiver.type, e.name, len(e.args))
    if member is None or member.sig.is_static:
        raise _stuck(f"{receiver.type} has no method {e.name}/{len(e.args)}", e.span)
    if member.body is not None:
        mapping = {THIS_VAR: receiver}
        mapping.update(zip(member.sig.param_names, e.args))
        return "M", substitute(member.body, mapping)
    factory = lookup_member(table, receiver.type, receiver.name, len(receiver.args))
    fields = factory.sig.param_names
    if not e.args and e.name in fields:
        return "M-GET", receiver.args[fields.index(e.name)]
    for i, name in enumerate(fields):
        if len(e.args) == 1 and e.name == wither_name(name):
            return "M-WITH", StaticCall(receiver.type, receiver.name,
                                        _replace_arg(receiver.args, i, e.args[0]), receiver.span)
    raise _stuck(f"abstract method {e.name} of {receiver.type} is neither a getter nor a wither", e.span)


def reduce(table: DeclarationTable, e: Expr) -> Tuple[str, Expr]:
    """One step on the leftmost redex; `e` must not be a value"""
    if isinstance(e, StaticCall):
        index = _first_non_value(table, e.args)
        if index is not None:
            rule, new = reduce(table, e.args[index])
            return rule, StaticCall(e.type, e.name, _replace_arg(e.args, index, new), e.span)
        member = lookup_member(table, e.type, e.name, len(e.args))
        if member is None or not member.sig.is_static or member.body is None:
            raise _stuck(f"{e.type} has no implemented static method {e.name}/{len(e.args)}", e.span)
        return "S-M", substitute(member.body, dict(zip(member.sig.param_names, e.args)))
    if isinstance(e, Call):
        if not is_value(table, e.receiver):
            rule, new = reduce(table, e.receiver)
            return rule, Call(new, e.name, e.args, e.span)
        index = _first_non_value(table, e.args)
        if index is not None:
            rule, new = reduce(table, e.args[index])
            return rule, Call(e.receiver, e.name, _replace_arg(e.args, index, new), e.span)
        return _dispatch(table, e)
    if isinstance(e, Var):
        raise _stuck(f"free variable {e.name}", e.span)
    raise _stuck(f"{print_expr(e)} is already a value", e.span)


@dataclass
class Machine:
    """Single-owner evaluation state; each step costs one unit of fuel"""
    table: DeclarationTable
    expr: Expr
    fuel: int = field(default_factory=lambda: settings.DEFAULT_FUEL)
    steps: int = 0
    trace: Optional[List[str]] = None
    strip: Tuple[str, ...] = ()

    @property
    def done(self) -> bool:
        return is_value(self.table, self.expr)

    def step(self) -> str:
        """Apply one reduction rule and return its name"""
        if self.fuel <= 0:
            raise EvaluationError(Diagnostic(
                DiagnosticCode.FUEL_EXHAUSTED,
                f"no value after {self.steps} steps",
                self.expr.span,
            ))
        rule, self.expr = reduce(self.table, self.expr)
        self.fuel -= 1
        self.steps += 1
        if self.trace is not None:
            self.trace.append(f"{self.steps}: {rule} {print_expr(self.expr, self.strip)}")
        return rule


def step_expr(machine: Machine) -> Machine:
    """Advance `machine` by one reduction and hand it back"""
    machine.step()
    return machine


@dataclass
class RunResult:
    value: Expr
    steps: int
    trace: List[str] = field(default_factory=list)


def run(
    table: DeclarationTable,
    expr: Expr,
    fuel: Optional[int] = None,
    trace: bool = False,
    strip: Tuple[str, ...] = (),
) -> RunResult:
    """Reduce to a value; raises EvaluationError (Stuck or FuelExhausted)"""
    machine = Machine(table, expr, settings.DEFAULT_FUEL if fuel is None else fuel,
                      trace=[] if trace else None, strip=strip)
    while not machine.done:
        machine.step()
    logger.debug("reached a value in %d steps", machine.steps)
    return RunResult(machine.expr, machine.steps, machine.trace or [])
