import pytest

from app.models.ast import (
    CodeLiteral,
    IntrinsicConst,
    MethodMember,
    MethodSig,
    NestedClass,
    Param,
    StaticCall,
    TypePath,
)
from app.services.parser_service import parse_source
from app.services.printer_service import canonical_print, print_expr
from tests.support import CORPUS

CORPUS_NAMES = sorted(p.stem for p in CORPUS.glob("*.l42mu"))


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_print_then_parse_is_stable(name):
    table = parse_source((CORPUS / f"{name}.l42mu").read_text(encoding="utf-8"), name)
    printed = canonical_print(table)
    reparsed = parse_source(printed, name)
    assert reparsed == table
    assert canonical_print(reparsed) == printed


def test_members_are_printed_in_canonical_order():
    int_ = TypePath(("Int",))
    literal = CodeLiteral(members=(
        MethodMember(MethodSig(False, "b", (), int_)),
        MethodMember(MethodSig(True, "a", (Param(int_, "x"),), int_)),
        NestedClass("N", CodeLiteral(is_interface=True)),
        MethodMember(MethodSig(False, "a", (), int_)),
    ))
    assert canonical_print(literal) == (
        "{\n"
        "  N = {interface}\n"
        "  method Int a()\n"
        "  static method Int a(Int x)\n"
        "  method Int b()\n"
        "}"
    )


def test_use_chains_print_back_as_use():
    table = parse_source("a = {}\nb = {}\nc = {}\nK = Use a, b, c\nL = a + b + c")
    assert canonical_print(table.get("K")) == "K = Use a, b, c"
    assert canonical_print(table.get("L")) == "L = a + b + c"


def test_strip_drops_the_scope_prefix():
    value = StaticCall(TypePath(("Example", "Plus")), "of", (
        StaticCall(TypePath(("Example", "Num")), "of", (IntrinsicConst("Int", 2),)),
        StaticCall(TypePath(("Example", "Num")), "of", (IntrinsicConst("Int", 4),)),
    ))
    assert print_expr(value, ("Example",)) == "Plus.of(Num.of(2), Num.of(4))"
    assert print_expr(value) == "Example.Plus.of(Example.Num.of(2), Example.Num.of(4))"


def test_constants():
    assert print_expr(IntrinsicConst("Bool", False)) == "false"
    assert print_expr(IntrinsicConst("Int", -7)) == "-7"
