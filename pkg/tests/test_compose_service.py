import pytest

from app.models.ast import (
    EMPTY_LITERAL,
    CodeLiteral,
    Lit,
    MethodMember,
    MethodSig,
    NestedClass,
    Param,
    Sum,
    TraitRef,
    TypePath,
    Var,
)
from app.models.diagnostics import CompositionError, DiagnosticCode, TypingError
from app.services.compose_service import (
    DEMAND,
    MAXIMAL,
    compile_program,
    demanded_declarations,
    iter_compile,
    rename_nested,
    step_compose,
    sum_literals,
    super_extract,
    wrong_count,
)
from app.services.parser_service import parse_source
from app.services.printer_service import canonical_print
from tests.support import compile_corpus, compile_source, load_corpus

INT = TypePath(("Int",))
THIS = TypePath(("This",))


def method(name, *params, ret=INT, static=False, body=None):
    return MethodMember(MethodSig(static, name, tuple(Param(t, n) for t, n in params), ret), body)


def literal(*members, interface=False, implements=()):
    return CodeLiteral(interface, tuple(implements), tuple(members))


# ============== sum ==============

def test_sum_unions_disjoint_members():
    result = sum_literals(literal(method("a")), literal(method("b")))
    assert result == literal(method("a"), method("b"))


def test_empty_literal_is_the_identity():
    l1 = literal(method("a", body=Var("this")), NestedClass("N", literal(method("b"))))
    assert sum_literals(l1, EMPTY_LITERAL) == l1
    assert sum_literals(EMPTY_LITERAL, l1) == l1


def test_implemented_method_wins_over_abstract():
    implemented = method("a", body=Var("this"), ret=THIS)
    result = sum_literals(literal(method("a", ret=THIS)), literal(implemented))
    assert result.method("a", 0).body == Var("this")


def test_two_bodies_clash():
    with pytest.raises(CompositionError) as info:
        sum_literals(literal(method("m", body=Var("this"), ret=THIS)),
                     literal(method("m", body=Var("this"), ret=THIS)))
    assert info.value.code is DiagnosticCode.METHOD_CLASH


def test_different_headers_clash():
    with pytest.raises(CompositionError) as info:
        sum_literals(literal(method("m")), literal(method("m", ret=THIS)))
    assert info.value.code is DiagnosticCode.METHOD_CLASH


def test_overloads_by_arity_coexist():
    result = sum_literals(literal(method("of", static=True, ret=THIS)),
                          literal(method("of", (INT, "x"), static=True, ret=THIS)))
    assert result.method("of", 0) is not None and result.method("of", 1) is not None


def test_class_composed_with_interface_clashes_at_any_depth():
    with pytest.raises(CompositionError) as info:
        sum_literals(literal(NestedClass("N", literal())), literal(NestedClass("N", literal(interface=True))))
    assert info.value.code is DiagnosticCode.CLASS_CLASH


def test_nested_classes_compose_recursively():
    result = sum_literals(literal(NestedClass("N", literal(method("a")))),
                          literal(NestedClass("N", literal(method("b")))))
    assert result.nested("N").literal == literal(method("a"), method("b"))


def test_abstract_sum_is_symmetric_in_parameter_names():
    left = literal(method("m", (INT, "b")))
    right = literal(method("m", (INT, "a")))
    assert canonical_print(sum_literals(left, right)) == canonical_print(sum_literals(right, left))


# ============== rename and super ==============

def test_rename_rewrites_every_this_path():
    b = TypePath(("This", "B"))
    source = literal(method("m", ret=b), NestedClass("B", literal(method("mb", ret=b))))
    c = TypePath(("This", "C"))
    assert rename_nested(source, "B", "C") == literal(method("m", ret=c), NestedClass("C", literal(method("mb", ret=c))))


def test_rename_errors_and_identity():
    source = literal(NestedClass("B", literal()), NestedClass("C", literal()))
    assert rename_nested(source, "B", "B") == source
    with pytest.raises(CompositionError):
        rename_nested(source, "Missing", "D")
    with pytest.raises(CompositionError):
        rename_nested(source, "B", "C")


def test_super_moves_the_body():
    body = Var("that")
    source = literal(method("merge", (THIS, "that"), ret=THIS, body=body))
    result = super_extract(source, "merge", None, "_1merge")
    assert result.method("merge", 1).is_abstract
    assert result.method("_1merge", 1).body == body
    assert result.method("_1merge", 1).sig.params == source.method("merge", 1).sig.params


def test_super_errors():
    source = literal(method("a"), method("b", body=Var("this"), ret=THIS),
                     method("o", body=Var("this"), ret=THIS),
                     method("o", (INT, "x"), body=Var("this"), ret=THIS))
    with pytest.raises(CompositionError):
        super_extract(source, "a", None, "_a")
    with pytest.raises(CompositionError):
        super_extract(source, "missing", None, "_m")
    with pytest.raises(CompositionError):
        super_extract(source, "b", None, "a")
    with pytest.raises(CompositionError):
        super_extract(source, "o", None, "_o")
    assert super_extract(source, "o", 1, "_o").method("_o", 1) is not None


# ============== single steps ==============

def test_lookup_step_replaces_trait_by_literal():
    table = compile_source("ta = {method int ma(){return 2;}}").table
    after, rule, path = step_compose(TraitRef("ta"), table)
    assert rule == "LOOK-UP" and path == "root"
    assert after == Lit(table.get("ta").literal)


def test_right_operand_reduces_once_left_is_a_literal():
    l1, l2, l3 = literal(method("a")), literal(method("b")), literal(method("c"))
    after, rule, path = step_compose(Sum(Lit(l1), Sum(Lit(l2), Lit(l3))), parse_source(""))
    assert (rule, path) == ("SUM", "root.right")
    assert after == Sum(Lit(l1), Lit(literal(method("b"), method("c"))))


def test_leftmost_clash_is_reported():
    clash = literal(method("m", body=Var("this"), ret=THIS))
    other = literal(method("k", body=Var("this"), ret=THIS))
    expr = Sum(Sum(Lit(clash), Lit(clash)), Sum(Lit(other), Lit(other)))
    with pytest.raises(CompositionError) as info:
        step_compose(expr, parse_source(""))
    assert "m/0" in info.value.diagnostic.message


def test_unknown_trait():
    with pytest.raises(CompositionError) as info:
        step_compose(TraitRef("nope"), parse_source(""))
    assert info.value.code is DiagnosticCode.UNKNOWN_TRAIT


def test_implements_clash_on_nested_interfaces_in_binary_sums():
    source = """
    t1 = {I = {interface method int a()} K = {implements I method int a(){return 1;}}}
    t2 = {I = {interface method int b()}}
    t3 = {K = {method int b(){return 2;}}}
    A = t1 + t2 + t3
    B = Use t1, t2, t3
    """
    with pytest.raises(CompositionError) as info:
        compile_source(source)
    assert info.value.code is DiagnosticCode.IMPLEMENTS_CLASH
    assert info.value.diagnostic.decl_index == 3
    fixed = compile_source(source.replace("A = t1 + t2 + t3", "A = t1 + (t2 + t3)"))
    assert fixed.table.get("B").literal.nested("K").literal.method("b", 0) is not None


# ============== compilation ==============

def test_flattening_erases_reuse():
    result = compile_corpus("section2")
    assert result.table.is_flattened
    assert all(step.decl_name in ("A", "B") for step in result.steps)


def test_demanded_set_skips_unneeded_traits():
    table = load_corpus("ordering_ok")
    assert demanded_declarations(table, table.get("A").body, 2) == ["ta"]


def test_ordering_walkthrough():
    result = compile_corpus("ordering_ok")
    assert result.checked == ["ta", "tc", "A", "B", "C"]


def test_swapped_ordering_is_a_type_error_at_the_moved_declaration():
    with pytest.raises(TypingError) as info:
        compile_corpus("ordering_swapped")
    assert info.value.code is DiagnosticCode.TYPE_ERROR
    assert info.value.diagnostic.decl_index == 3


def test_mutual_dependency_is_an_order_error():
    with pytest.raises(CompositionError) as info:
        compile_corpus("ordering_mutual")
    assert info.value.code is DiagnosticCode.ORDER_ERROR
    assert info.value.diagnostic.decl_index == 1


def test_maximal_mode_skips_declarations_that_cannot_be_typed_yet():
    table = load_corpus("ordering_ok")
    result = compile_program(table, dependency_mode=MAXIMAL)
    # tc needs A and B, so it is only typable once both are flattened
    assert result.checked == ["ta", "A", "tc", "B", "C"]
    assert canonical_print(result.table) == canonical_print(compile_program(table).table)


FORWARD_TYPE = """
Y = {method Y f(Z z){return this;}}
X = {method X h(Y y){return this;}}
t = {method X k(X x){return x;}}
K = Use t
Z = {}
"""


def test_maximal_mode_accepts_what_demand_rejects():
    with pytest.raises(TypingError) as info:
        compile_source(FORWARD_TYPE, dependency_mode=DEMAND)
    assert info.value.diagnostic.decl_index == 3
    assert "unknown type Z" in info.value.diagnostic.message
    result = compile_source(FORWARD_TYPE, dependency_mode=MAXIMAL)
    assert result.checked == ["X", "t", "Y", "K", "Z"]


def test_maximal_mode_rejects_reuse_of_an_untypable_trait():
    source = "t = {method int k(Z z){return 1;}}\nK = Use t\nZ = {}"
    with pytest.raises(TypingError) as info:
        compile_source(source, dependency_mode=MAXIMAL)
    assert info.value.diagnostic.decl_index == 1
    assert "unknown type Z" in info.value.diagnostic.message


def test_trait_used_before_its_declaration():
    with pytest.raises(CompositionError) as info:
        compile_source("A = Use t\nt = {}")
    assert info.value.code is DiagnosticCode.ORDER_ERROR
    assert info.value.diagnostic.decl_index == 0


def test_compilation_is_deterministic():
    first = compile_corpus("fcpoint")
    second = compile_corpus("fcpoint")
    assert first.trace_lines() == second.trace_lines()
    assert canonical_print(first.table) == canonical_print(second.table)


def test_trace_lines_name_rule_and_path():
    lines = compile_corpus("rename").trace_lines()
    assert lines == ["D: LOOK-UP at root.arg", "D: RENAME at root"]


def test_wrong_count_drops_after_flattening():
    table = parse_source("t = {method int n(){return 1;} method int m(){return 2;}}\n"
                         "C = Use t, {method int k(){return this.n() + this.m();}}")
    steps = list(iter_compile(table))
    first, last = steps[0], steps[-1]
    scope = first.scope.prefix(first.decl_index)
    assert wrong_count(scope, first.before) == 1
    assert wrong_count(scope, last.after) == 0


def test_iter_compile_returns_the_result():
    steps = iter_compile(load_corpus("points"))
    count = 0
    while True:
        try:
            next(steps)
            count += 1
        except StopIteration as done:
            result = done.value
            break
    assert len(result.steps) == count
    assert result.table.get("PointAlgebra").literal.method("mul", 1) is not None
