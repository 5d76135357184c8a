import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from app.models.ast import (
    EMPTY_LITERAL,
    CodeLiteral,
    DeclarationTable,
    MethodMember,
    MethodSig,
    Param,
    TraitRef,
    TypePath,
    Var,
)
from app.models.diagnostics import DiagnosticCode, EvaluationError, Reuse42Error
from app.models.schemas import GenConfig, Verdict
from app.services import harness_service
from app.services.compose_service import compile_program, sum_literals
from app.services.harness_service import (
    TypedClass,
    TypedInterface,
    TypedProgram,
    check_progress,
    check_wrong_count_monotone,
    gen_table,
    gen_typed_table,
    run_fuzz,
    shrink_table,
    write_counterexample,
)
from app.services.parser_service import parse_source
from app.services.printer_service import canonical_print

THIS = TypePath(("This",))


@st.composite
def literals(draw, interface=None):
    is_interface = draw(st.booleans()) if interface is None else interface
    members = {}
    for _ in range(draw(st.integers(0, 4))):
        name = draw(st.sampled_from(["a", "b", "c"]))
        arity = draw(st.integers(0, 1))
        is_static = not is_interface and draw(st.booleans())
        sig = MethodSig(is_static, name, tuple(Param(THIS, f"x{k}") for k in range(arity)), THIS)
        body = None if is_interface or draw(st.booleans()) else Var("x0" if arity else "this")
        member = MethodMember(sig, body)
        members.setdefault(member.key, member)
    return CodeLiteral(is_interface, (), tuple(members.values()))


def outcome(left, right):
    try:
        return canonical_print(sum_literals(left, right)), None
    except Reuse42Error as exc:
        return None, exc.code


@given(literals(), literals())
def test_sum_is_commutative(l1, l2):
    assert outcome(l1, l2) == outcome(l2, l1)


@given(literals(interface=False), literals(interface=False), literals(interface=False))
def test_sum_is_associative_when_defined(l1, l2, l3):
    left, _ = outcome(l1, l2)
    right, _ = outcome(l2, l3)
    if left is None or right is None:
        return
    a, _ = outcome(sum_literals(l1, l2), l3)
    b, _ = outcome(l1, sum_literals(l2, l3))
    if a is not None and b is not None:
        assert a == b


@given(literals(interface=False))
def test_empty_literal_is_neutral(l1):
    assert outcome(l1, EMPTY_LITERAL) == (canonical_print(l1), None)


@hypothesis_settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_generation_is_a_function_of_the_seed(seed):
    config = GenConfig(seed=seed)
    assert canonical_print(gen_table(config)) == canonical_print(gen_table(config))


@pytest.mark.parametrize("seed", range(8))
def test_typed_programs_compile(seed):
    program = gen_typed_table(GenConfig(seed=seed, prelude=True))
    result = compile_program(program.table)
    assert result.table.is_flattened
    assert set(program.classes) <= set(result.table.names)


@pytest.mark.parametrize("seed", range(4))
def test_progress_on_typed_programs(seed):
    program = gen_typed_table(GenConfig(seed=seed, prelude=True))
    verdict = check_progress(program, expr_budget=10, fuel=100_000, seed=seed)
    assert verdict.passed, verdict.message
    assert verdict.samples == 10


def test_wrong_count_on_a_known_program():
    table = parse_source("t = {method int n(){return 1;} method int m(){return 2;}}\n"
                         "C = Use t, {method int k(){return this.n() + this.m();}}")
    verdict = check_wrong_count_monotone(table)
    assert verdict.passed
    assert verdict.samples == 2


def test_failing_compilation_still_passes_the_monotonicity_check():
    verdict = check_wrong_count_monotone(parse_source("A = Use t\nt = {}"))
    assert verdict.passed
    assert verdict.message == "compilation stopped: OrderError"


@pytest.mark.parametrize("check, count", [("a2", 25), ("algebra", 200), ("state", 8), ("a1", 3)])
def test_checks_pass_on_small_runs(check, count):
    verdict = run_fuzz(check, seed=0, count=count)
    assert verdict.check == check
    assert verdict.passed, verdict.counterexamples or verdict.message


def test_divergence_is_a_deterministic_measurement():
    first = run_fuzz("divergence", seed=3, count=20)
    second = run_fuzz("divergence", seed=3, count=20)
    assert first == second
    assert first.passed
    tallies = first.details
    assert tallies["both_ok"] + tallies["demand_only"] + tallies["maximal_only"] + tallies["both_fail"] == 20
    assert 0.0 <= tallies["rate"] <= 1.0


def test_unknown_check():
    with pytest.raises(ValueError):
        run_fuzz("nope")


def test_shrinking_keeps_the_predicate():
    table = parse_source("t0 = {method int a()}\n"
                         "K1 = Use t0, {method int b(){return 1;}}\n"
                         "K2 = {}")
    small = shrink_table(table, lambda t: t.get("K1") is not None)
    assert small.names == ["K1"]
    assert small.get("K1").body == TraitRef("t0")


def test_shrinking_ignores_predicate_errors():
    table = parse_source("K1 = {}")
    assert shrink_table(table, lambda t: t[0].name == "K1") == table


def test_counterexamples_are_written_as_source(tmp_path):
    table = parse_source("t = {method int a()}\nK = Use t")
    path = write_counterexample(table, "a2_seed7", tmp_path)
    assert path == tmp_path / "a2_seed7.l42mu"
    assert path.read_text(encoding="utf-8") == canonical_print(table)
    assert parse_source(path.read_text(encoding="utf-8")) == table


@pytest.mark.parametrize("seed", range(6))
def test_typed_programs_with_interfaces_and_nested_classes(seed):
    config = GenConfig(seed=seed, prelude=True, p_interface=1.0, p_nested=1.0)
    program = gen_typed_table(config)
    table = program.table
    for index, cls in enumerate(sorted(program.classes.values(), key=lambda c: c.index)):
        assert cls.implements == [f"I{index}"]
        assert table.index_of(f"I{index}") < table.index_of(cls.name)
        assert cls.nested is not None and cls.helpers
    for interface in program.interfaces.values():
        literal = table.get(interface.name).literal
        assert literal.is_interface
        assert [str(p) for p in literal.implements] == interface.parents
    flattened = compile_program(table).table
    for cls in program.classes.values():
        assert flattened.get(cls.name).literal.nested(cls.nested) is not None
    verdict = check_progress(program, expr_budget=20, fuel=100_000, seed=seed)
    assert verdict.passed, verdict.message


def test_interface_types_are_never_generated_without_the_knob():
    program = gen_typed_table(GenConfig(seed=1, prelude=True, p_interface=0.0, p_nested=0.0))
    assert program.interfaces == {}
    assert all(cls.nested is None for cls in program.classes.values())


def test_typed_subtyping_follows_implements_chains():
    program = TypedProgram(
        DeclarationTable(),
        {"K0": TypedClass("K0", 0, [], [], ["I1"])},
        {"I0": TypedInterface("I0", []), "I1": TypedInterface("I1", ["I0"])},
    )
    assert program.supertypes("K0") == ["K0", "I1", "I0"]
    assert program.is_subtype("K0", "I0")
    assert not program.is_subtype("I0", "I1")
    assert [c.name for c in program.implementors("I0")] == ["K0"]
    assert program.implementors("I0", below=-1) == []


def reject_nonempty(table, dependency_mode="demand"):
    if len(table):
        return Verdict(check="a2", passed=False, samples=1, failures=1, message="rejected")
    return Verdict(check="a2", passed=True)


def test_failures_come_back_shrunk(monkeypatch):
    monkeypatch.setattr(harness_service, "check_wrong_count_monotone", reject_nonempty)
    verdict = run_fuzz("a2", seed=0, count=2)
    assert not verdict.passed
    assert verdict.failures == 2
    message, program = verdict.counterexamples[0].split("\n", 1)
    assert message == "rejected"
    shrunk = parse_source(program, "<shrunk>", prelude=False)
    assert len(shrunk) == 1
    assert shrunk[0].literal is not None and shrunk[0].literal.members == ()


def test_progress_failures_are_shrunk(monkeypatch, tmp_path):
    def stuck(*args, **kwargs):
        raise EvaluationError.of(DiagnosticCode.STUCK, "stuck on purpose")

    monkeypatch.setattr(harness_service, "run", stuck)
    verdict = run_fuzz("a1", seed=0, count=1, out_dir=tmp_path)
    assert verdict.failures == 1
    message, program = verdict.counterexamples[0].split("\n", 1)
    assert message.endswith(": stuck on purpose")
    original = gen_typed_table(GenConfig(seed=0)).table
    assert len(parse_source(program, "<shrunk>", prelude=False)) <= len(original)
    assert (tmp_path / "a1_seed0.l42mu").read_text(encoding="utf-8") == program
