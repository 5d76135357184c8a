"""Golden results for the bundled programs"""
import pytest

from app.models.diagnostics import Reuse42Error
from app.services import pipeline_service
from app.services.printer_service import canonical_print
from tests.support import compile_corpus, corpus_text


def run_corpus(name: str, expression: str, scope=None) -> str:
    result = pipeline_service.check([(corpus_text(name), f"{name}.l42mu")])
    _, value = pipeline_service.run_expression(result, expression, scope=scope)
    return value


def test_flattened_section2_matches_the_inlined_program():
    reused = compile_corpus("section2").table
    inlined = compile_corpus("section2_inlined").table
    assert canonical_print(reused) == canonical_print(inlined)
    for name in ("A", "B"):
        assert "ta" not in canonical_print(reused.get(name))


def test_rename_matches_its_expansion():
    assert canonical_print(compile_corpus("rename").table) == canonical_print(compile_corpus("rename_expanded").table)


def test_bag_is_the_same_in_both_versions():
    v1 = compile_corpus("setbag_v1").table
    v2 = compile_corpus("setbag_v2").table
    assert canonical_print(v1.get("Bag")) == canonical_print(v2.get("Bag"))
    assert canonical_print(v1.get("Set")) == canonical_print(v2.get("Set"))


@pytest.mark.parametrize("name, expression, expected", [
    ("points", "Point.of(1, 2).withX(5)", "Point.of(5, 2)"),
    ("points", "PointAlgebra.of(1, 2).sum(PointAlgebra.of(3, 4)).mul(PointAlgebra.of(2, 2)).y()", "12"),
    ("cpoint", "CPoint.of(1, 2).sum(CPoint.of(3, 4)).x()", "4"),
    ("cpoint_super", "CPoint.of(1, 2).sum(CPoint.of(3, 4)).x()", "4"),
    ("fcpoint", "FCPoint.of(1, 2).sum(FCPoint.of(3, 4)).x()", "4"),
    ("fcpoint", "FCPoint.of(1, 2).sum(FCPoint.of(3, 4)).color().shade()", "0"),
    ("setbag_v1", "Bag.empty().insert(3).insertAll(3, 2).size()", "3"),
    ("setbag_v2", "Bag.empty().insert(3).insertAll(3, 2).multiplicity()", "3"),
    ("expression_problem", "Plus.of(Num.of(1), Num.of(2)).eval()", "3"),
    ("expression_problem", "Plus.of(Num.of(1), Num.of(2)).double()", "Plus.of(Num.of(2), Num.of(4))"),
])
def test_run_results(name, expression, expected):
    assert run_corpus(name, expression) == expected


def test_explicit_scope():
    assert run_corpus("expression_problem", "Num.of(7).eval()", scope="Example") == "7"


def test_full_paths_print_in_full():
    assert run_corpus("expression_problem", "Example.Num.of(7).double()") == "Example.Num.of(14)"


@pytest.mark.parametrize("name, code, index", [
    ("cpoint_fail", "NotCoherent", 4),
    ("ordering_swapped", "TypeError", 3),
    ("ordering_mutual", "OrderError", 1),
])
def test_negative_programs(name, code, index):
    with pytest.raises(Reuse42Error) as info:
        compile_corpus(name)
    assert info.value.code.value == code
    assert info.value.diagnostic.decl_index == index


def test_maximal_mode_on_the_positive_corpus():
    for name in ("section2", "points", "setbag_v1", "rename", "expression_problem"):
        compile_corpus(name, dependency_mode="maximal")
