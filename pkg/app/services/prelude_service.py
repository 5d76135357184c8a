"""
Intrinsic prelude: Int, Bool and Void

The calculus has no literals; runnable programs get three built-in classes
whose method signatures live in ordinary code literals (so typing and lookup
treat them like any other class) and whose behaviour is native.
"""
from typing import Callable, Dict, Optional, Tuple

from app.models.ast import (
    Call,
    CodeLiteral,
    Expr,
    IntrinsicConst,
    MethodMember,
    MethodSig,
    Param,
    TypePath,
)
from app.models.diagnostics import DiagnosticCode, EvaluationError

INT = "Int"
BOOL = "Bool"
VOID = "Void"
PRELUDE_NAMES = (INT, BOOL, VOID)

# lowercase spellings accepted as type names
TYPE_ALIASES: Dict[str, str] = {"int": INT}

# surface operator -> method name
BINARY_OPERATORS: Dict[str, str] = {
    "+": "plus",
    "-": "minus",
    "*": "times",
    "/": "divide",
    "==": "equals",
    "<": "lessThan",
    "&&": "and",
    "||": "or",
}
UNARY_NOT = "not"


def _sig(name: str, ret: str, *params: Tuple[str, str], static: bool = False) -> MethodMember:
    return MethodMember(MethodSig(
        is_static=static,
        name=name,
        params=tuple(Param(TypePath((t,)), n) for t, n in params),
        return_type=TypePath((ret,)),
    ))


PRELUDE_LITERALS: Dict[str, CodeLiteral] = {
    INT: CodeLiteral(members=(
        _sig("plus", INT, (INT, "that")),
        _sig("minus", INT, (INT, "that")),
        _sig("times", INT, (INT, "that")),
        _sig("divide", INT, (INT, "that")),
        _sig("equals", BOOL, (INT, "that")),
        _sig("lessThan", BOOL, (INT, "that")),
    )),
    BOOL: CodeLiteral(members=(
        _sig("and", BOOL, (BOOL, "that")),
        _sig("or", BOOL, (BOOL, "that")),
        _sig("equals", BOOL, (BOOL, "that")),
        _sig("not", BOOL),
    )),
    VOID: CodeLiteral(members=(
        _sig("unit", VOID, static=True),
    )),
}


def prelude_literal(name: str) -> Optional[CodeLiteral]:
    """The literal of Int, Bool or Void; None for any other name"""
    return PRELUDE_LITERALS.get(name)


def int_const(value: int) -> IntrinsicConst:
    return IntrinsicConst(INT, int(value))


def bool_const(value: bool) -> IntrinsicConst:
    return IntrinsicConst(BOOL, bool(value))


def _divide(a: int, b: int) -> int:
    if b == 0:
        raise EvaluationError.of(DiagnosticCode.STUCK, "division by zero")
    quotient = abs(a) // abs(b)
    return quotient if (a >= 0) == (b >= 0) else -quotient


_INT_OPS: Dict[str, Callable[[int, int], Expr]] = {
    "plus": lambda a, b: int_const(a + b),
    "minus": lambda a, b: int_const(a - b),
    "times": lambda a, b: int_const(a * b),
    "divide": lambda a, b: int_const(_divide(a, b)),
    "equals": lambda a, b: bool_const(a == b),
    "lessThan": lambda a, b: bool_const(a < b),
}

_BOOL_OPS: Dict[str, Callable[[bool, bool], Expr]] = {
    "and": lambda a, b: bool_const(a and b),
    "or": lambda a, b: bool_const(a or b),
    "equals": lambda a, b: bool_const(a == b),
}


def intrinsic_step(e: Expr) -> Optional[Expr]:
    """
    Reduce a call on prelude constants.

    Returns None when the call is not intrinsic; raises EvaluationError
    (Stuck) for partial operations such as division by zero.
    """
    if not isinstance(e, Call) or not isinstance(e.receiver, IntrinsicConst):
        return None
    if not all(isinstance(a, IntrinsicConst) for a in e.args):
        return None
    receiver = e.receiver
    args = [a.value for a in e.args]
    if receiver.type_name == INT and len(args) == 1 and e.args[0].type_name == INT:
        op = _INT_OPS.get(e.name)
        return op(receiver.value, args[0]) if op else None
    if receiver.type_name == BOOL:
        if e.name == UNARY_NOT and not args:
            return bool_const(not receiver.value)
        if len(args) == 1 and e.args[0].type_name == BOOL:
            op = _BOOL_OPS.get(e.name)
            return op(receiver.value, args[0]) if op else None
    return None
