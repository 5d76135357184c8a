"""
Random program generation and the property checks run by `fuzz`.

Every check is a pure function of its GenConfig seed. Generated tables are
prelude-free unless the config asks for Int fields, so they exercise the
calculus exactly: classes are named K0, K1, ..., traits t0, t1, ...,
interfaces I0, I1, ... and nested classes N or M.
"""
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.logging import get_logger
from app.models.ast import (
    THIS,
    THIS_VAR,
    Call,
    CodeExpr,
    CodeLiteral,
    Declaration,
    DeclarationTable,
    EMPTY_LITERAL,
    Expr,
    Lit,
    MethodMember,
    MethodSig,
    NestedClass,
    Param,
    Rename,
    StaticCall,
    Sum,
    SuperAs,
    TraitRef,
    TypePath,
    Var,
    is_class_name,
)
from app.models.diagnostics import DiagnosticCode, EvaluationError, Reuse42Error
from app.models.schemas import GenConfig, Verdict
from app.services.compose_service import DEMAND, MAXIMAL, compile_program, iter_compile, sum_literals, wrong_count
from app.services.eval_service import run
from app.services.prelude_service import INT, int_const
from app.services.printer_service import canonical_print
from app.services.typecheck_service import TypeEnv, type_expr, wither_name

logger = get_logger(__name__)

METHOD_NAMES = ("a", "b", "c", "d")
NESTED_NAMES = ("N", "M")
FIELD_NAMES = ("x", "y", "z", "w")
FACTORY = "of"
BUILDER = "build"


class SeededRandom:
    """Thin seeded wrapper over numpy's generator"""

    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)

    def chance(self, p: float) -> bool:
        return bool(self.rng.random() < p)

    def between(self, low: int, high: int) -> int:
        return int(self.rng.integers(low, high + 1))

    def pick(self, items: Sequence):
        return items[int(self.rng.integers(len(items)))]


# ============== Untyped generation ==============

def _gen_body(rnd: SeededRandom, variables: List[str], depth: int) -> Expr:
    if variables and (depth == 0 or rnd.chance(0.4)):
        return Var(rnd.pick(variables))
    args = tuple(_gen_body(rnd, variables, max(depth - 1, 0)) for _ in range(rnd.between(0, 1))) if depth else ()
    if variables and rnd.chance(0.7):
        return Call(Var(rnd.pick(variables)), rnd.pick(METHOD_NAMES), args)
    return StaticCall(TypePath((THIS,)), rnd.pick(METHOD_NAMES), args)


def gen_literal(rnd: SeededRandom, config: GenConfig, classes: Sequence[str] = (),
                interfaces: Sequence[str] = (), depth: int = 0) -> CodeLiteral:
    """A well-formed literal over a tiny vocabulary, so sums often overlap"""
    is_interface = rnd.chance(config.p_interface)
    pool = [TypePath((THIS,))] + [TypePath((c,)) for c in classes]
    members: Dict[Tuple, object] = {}
    for _ in range(rnd.between(0, config.max_members)):
        if depth < config.max_depth and rnd.chance(config.p_nested):
            name = rnd.pick(NESTED_NAMES)
            members.setdefault(("c", name), NestedClass(name, gen_literal(rnd, config, classes, interfaces, depth + 1)))
            continue
        arity = rnd.between(0, config.max_arity)
        is_static = not is_interface and rnd.chance(0.15)
        params = tuple(Param(rnd.pick(pool), f"x{k}") for k in range(arity))
        sig = MethodSig(is_static, rnd.pick(METHOD_NAMES), params, rnd.pick(pool))
        body = None
        if not is_interface and not rnd.chance(config.p_abstract):
            variables = list(sig.param_names) + ([] if is_static else [THIS_VAR])
            body = _gen_body(rnd, variables, 2)
        member = MethodMember(sig, body)
        members.setdefault(member.key, member)
    implements = ()
    if interfaces and rnd.chance(0.3):
        implements = (TypePath((rnd.pick(interfaces),)),)
    return CodeLiteral(is_interface, implements, tuple(members.values()))


def _gen_code_expr(rnd: SeededRandom, config: GenConfig, traits: List[str], classes, interfaces, depth: int) -> CodeExpr:
    if depth > 0 and rnd.chance(0.4):
        return Sum(_gen_code_expr(rnd, config, traits, classes, interfaces, depth - 1),
                   _gen_code_expr(rnd, config, traits, classes, interfaces, depth - 1))
    if traits and rnd.chance(config.p_trait_ref):
        return TraitRef(rnd.pick(traits))
    if depth > 0 and rnd.chance(0.1):
        inner = _gen_code_expr(rnd, config, traits, classes, interfaces, depth - 1)
        return Rename(inner, rnd.pick(NESTED_NAMES), rnd.pick(NESTED_NAMES + ("O",)))
    if depth > 0 and rnd.chance(0.1):
        name = rnd.pick(METHOD_NAMES)
        return SuperAs(_gen_code_expr(rnd, config, traits, classes, interfaces, depth - 1), name, None, f"_{name}")
    return Lit(gen_literal(rnd, config, classes, interfaces))


def gen_table(config: GenConfig) -> DeclarationTable:
    """A well-formed, prelude-free table; typeability is not guaranteed"""
    rnd = SeededRandom(config.seed)
    count = rnd.between(1, config.max_decls)
    names = [f"t{i}" if rnd.chance(0.5) else f"K{i}" for i in range(count)]
    classes = [n for n in names if is_class_name(n)]
    interfaces: List[str] = []
    decls = []
    for i, name in enumerate(names):
        traits = [n for n in names[:i] if not is_class_name(n)]
        body = _gen_code_expr(rnd, config, traits, classes, list(interfaces), config.max_depth)
        decls.append(Declaration(name, body))
        if is_class_name(name) and isinstance(body, Lit) and body.literal.is_interface:
            interfaces.append(name)
    return DeclarationTable(tuple(decls), prelude=False)


# ============== Typed generation ==============

Signature = Tuple[Tuple[str, ...], str]


@dataclass
class TypedClass:
    name: str
    index: int
    fields: List[Tuple[str, str]]
    withers: List[str]
    implements: List[str] = field(default_factory=list)
    # implemented instance methods: name -> (param types, return type)
    methods: Dict[str, Signature] = field(default_factory=dict)
    builder: Optional[Tuple[str, ...]] = None
    # static helpers of the nested class, if any
    nested: Optional[str] = None
    helpers: Dict[str, Signature] = field(default_factory=dict)


@dataclass
class TypedInterface:
    name: str
    parents: List[str]
    # own and inherited methods: name -> (param types, return type)
    methods: Dict[str, Signature] = field(default_factory=dict)


@dataclass
class TypedProgram:
    """A table that compiles, plus what is needed to build terms over it"""
    table: DeclarationTable
    classes: Dict[str, TypedClass]
    interfaces: Dict[str, TypedInterface] = field(default_factory=dict)

    def supertypes(self, type_name: str) -> List[str]:
        """`type_name` and every interface it reaches through implements"""
        if type_name in self.classes:
            pending = list(self.classes[type_name].implements)
        elif type_name in self.interfaces:
            pending = list(self.interfaces[type_name].parents)
        else:
            pending = []
        found = [type_name]
        while pending:
            parent = pending.pop()
            if parent not in found:
                found.append(parent)
                pending.extend(self.interfaces[parent].parents)
        return found

    def is_subtype(self, t1: str, t2: str) -> bool:
        return t2 in self.supertypes(t1)

    def implementors(self, interface: str, below: Optional[int] = None) -> List[TypedClass]:
        return [c for c in self.classes.values()
                if self.is_subtype(c.name, interface) and (below is None or c.index <= below)]

    def value(self, rnd: SeededRandom, type_name: str) -> Expr:
        if type_name == INT:
            return int_const(rnd.between(-9, 9))
        if type_name in self.interfaces:
            return self.value(rnd, self.implementors(type_name)[0].name)
        cls = self.classes[type_name]
        return StaticCall(TypePath((type_name,)), FACTORY, tuple(self.value(rnd, t) for _, t in cls.fields))

    def _args(self, rnd: SeededRandom, params: Sequence[str], depth: int, variables, below) -> Tuple[Expr, ...]:
        return tuple(self.term(rnd, p, depth, variables, below) for p in params)

    def term(self, rnd: SeededRandom, type_name: str, depth: int,
             variables: Sequence[Tuple[str, str]] = (), below: Optional[int] = None) -> Expr:
        """
        A term whose type is `type_name` or a subtype of it. Method, builder
        and helper calls are limited to classes with index < `below` (None
        allows all), keeping bodies acyclic; interface dispatch only happens
        at the top level.
        """
        options: List[Callable[[], Expr]] = []
        same = [n for n, t in variables if self.is_subtype(t, type_name)]
        if same:
            options.append(lambda: Var(rnd.pick(same)))
        if type_name == INT:
            options.append(lambda: int_const(rnd.between(-9, 9)))
            if depth > 0:
                options.append(lambda: Call(self.term(rnd, INT, depth - 1, variables, below), "plus",
                                            (self.term(rnd, INT, depth - 1, variables, below),)))
            return rnd.pick(options)()

        if depth > 0:
            helpers = [(c, h) for c in self.classes.values() for h, (_, ret) in c.helpers.items()
                       if ret == type_name and (below is None or c.index < below)]
            if helpers:
                def helper_call():
                    owner, name = rnd.pick(helpers)
                    params, _ = owner.helpers[name]
                    return StaticCall(TypePath((owner.name, owner.nested)), name,
                                      self._args(rnd, params, depth - 1, variables, below))
                options.append(helper_call)
            dispatched = [(i, m) for i in self.interfaces.values() for m, (_, ret) in i.methods.items()
                          if ret == type_name]
            if below is None and dispatched:
                def interface_call():
                    interface, name = rnd.pick(dispatched)
                    params, _ = interface.methods[name]
                    return Call(self.term(rnd, interface.name, depth - 1, variables, below), name,
                                self._args(rnd, params, depth - 1, variables, below))
                options.append(interface_call)

        if type_name in self.interfaces:
            implementors = self.implementors(type_name, below)
            # the first implementor only has fields of earlier types, so depth 0 bottoms out
            options.append(lambda: self.term(rnd, (rnd.pick(implementors) if depth > 0 else implementors[0]).name,
                                             depth, variables, below))
            return rnd.pick(options)()

        callable_classes = [c for c in self.classes.values() if below is None or c.index < below]
        if depth > 0:
            holders = [(c, f) for c in self.classes.values() for f, t in c.fields if t == type_name
                       and (below is None or c.index <= below)]
            if holders:
                def getter():
                    holder, name = rnd.pick(holders)
                    return Call(self.term(rnd, holder.name, depth - 1, variables, below), name, ())
                options.append(getter)
            target = self.classes[type_name]
            if target.withers:
                def wither():
                    name = rnd.pick(target.withers)
                    field_type = dict(target.fields)[name]
                    return Call(self.term(rnd, type_name, depth - 1, variables, below), wither_name(name),
                                (self.term(rnd, field_type, depth - 1, variables, below),))
                options.append(wither)
            calls = [(c, m) for c in callable_classes for m, (_, ret) in c.methods.items() if ret == type_name]
            if calls:
                def method_call():
                    owner, name = rnd.pick(calls)
                    params, _ = owner.methods[name]
                    return Call(self.term(rnd, owner.name, depth - 1, variables, below), name,
                                self._args(rnd, params, depth - 1, variables, below))
                options.append(method_call)
            if target.builder is not None and (below is None or target.index < below):
                options.append(lambda: StaticCall(
                    TypePath((type_name,)), BUILDER, self._args(rnd, target.builder, depth - 1, variables, below)))

        def factory():
            fields = self.classes[type_name].fields
            return StaticCall(TypePath((type_name,)), FACTORY,
                              self._args(rnd, [t for _, t in fields], max(depth - 1, 0), variables, below))
        options.append(factory)
        return rnd.pick(options)()


def _params(types: Sequence[str]) -> Tuple[Param, ...]:
    return tuple(Param(TypePath((t,)), f"p{n}") for n, t in enumerate(types))


def _state_trait(cls: TypedClass) -> CodeLiteral:
    this = TypePath((THIS,))
    members = [MethodMember(MethodSig(True, FACTORY, tuple(Param(TypePath((t,)), f) for f, t in cls.fields), this))]
    for f, t in cls.fields:
        members.append(MethodMember(MethodSig(False, f, (), TypePath((t,)))))
    for f in cls.withers:
        members.append(MethodMember(MethodSig(False, wither_name(f), (Param(TypePath((dict(cls.fields)[f],)), "that"),), this)))
    return CodeLiteral(members=tuple(members))


def _gen_interface(rnd: SeededRandom, config: GenConfig, program: TypedProgram, name: str,
                   index: int, types: List[str]) -> TypedInterface:
    """An interface over `types`, extending one earlier interface half of the time"""
    visible = list(program.interfaces)
    parents = [rnd.pick(visible)] if visible and rnd.chance(0.5) else []
    interface = TypedInterface(name, parents)
    for parent in parents:
        interface.methods.update(program.interfaces[parent].methods)
    own = types + [name]
    for k in range(rnd.between(1, max(config.max_members, 1))):
        params = tuple(rnd.pick(own) for _ in range(rnd.between(0, config.max_arity)))
        interface.methods[f"n{index}_{k}"] = (params, rnd.pick(own))
    return interface


def _interface_literal(interface: TypedInterface) -> CodeLiteral:
    members = tuple(
        MethodMember(MethodSig(False, method, _params(params), TypePath((ret,))))
        for method, (params, ret) in interface.methods.items()
    )
    return CodeLiteral(True, tuple(TypePath((p,)) for p in interface.parents), members)


def gen_typed_table(config: GenConfig) -> TypedProgram:
    """
    Coherent classes K0..Kn, each `Use ti, {...}`: the trait ti declares the
    factory, getters and withers; the class literal adds implemented methods
    whose bodies use variables, `this`, getters, withers, factory calls and
    methods of earlier classes. With probability `p_interface` a class first
    gets an interface Ii (possibly extending an earlier one) that it
    implements; with probability `p_nested` it carries a nested class of
    static helpers. Interface types appear in fields, parameters and return
    types.
    """
    rnd = SeededRandom(config.seed)
    count = rnd.between(1, config.max_decls)
    program = TypedProgram(DeclarationTable(prelude=config.prelude), {})
    decls: List[Declaration] = []
    for i in range(count):
        name = f"K{i}"
        earlier = [f"K{j}" for j in range(i)] + list(program.interfaces)
        implements = []
        if rnd.chance(config.p_interface):
            interface = _gen_interface(rnd, config, program, f"I{i}", i, earlier)
            program.interfaces[interface.name] = interface
            decls.append(Declaration(interface.name, Lit(_interface_literal(interface))))
            implements.append(interface.name)
        field_types = earlier + ([INT] if config.prelude else [])
        fields = []
        if field_types:
            fields = [(FIELD_NAMES[k], rnd.pick(field_types)) for k in range(rnd.between(0, config.max_arity))]
        withers = [f for f, _ in fields if rnd.chance(config.p_wither)]
        cls = TypedClass(name, i, fields, withers, implements)
        program.classes[name] = cls
        decls.append(Declaration(f"t{i}", Lit(_state_trait(cls))))

        def implemented(method: str, params: Tuple[str, ...], ret: str, is_static: bool = False) -> MethodMember:
            variables = [(f"p{n}", t) for n, t in enumerate(params)]
            if not is_static:
                variables.append((THIS_VAR, name))
            body = program.term(rnd, ret, config.max_depth, variables, below=i)
            return MethodMember(MethodSig(is_static, method, _params(params), TypePath((ret,))), body)

        own = earlier + [name] + implements
        members = []
        for interface_name in implements:
            for method, (params, ret) in program.interfaces[interface_name].methods.items():
                members.append(implemented(method, params, ret))
                cls.methods[method] = (params, ret)
        for k in range(rnd.between(0, config.max_members)):
            params = tuple(rnd.pick(own) for _ in range(rnd.between(0, config.max_arity)))
            ret = rnd.pick(own)
            method = f"m{i}_{k}"
            members.append(implemented(method, params, ret))
            cls.methods[method] = (params, ret)
        builder = tuple(t for _, t in fields)
        variables = [(f, t) for f, t in fields]
        body = program.term(rnd, name, config.max_depth, variables, below=i)
        sig = MethodSig(True, BUILDER, tuple(Param(TypePath((t,)), f) for f, t in fields), TypePath((name,)))
        members.append(MethodMember(sig, body))
        cls.builder = builder
        if rnd.chance(config.p_nested):
            helpers = []
            for k in range(rnd.between(1, max(config.max_members, 1))):
                params = tuple(rnd.pick(own) for _ in range(rnd.between(0, config.max_arity)))
                ret = rnd.pick(own)
                helper = f"h{i}_{k}"
                helpers.append(implemented(helper, params, ret, is_static=True))
                cls.helpers[helper] = (params, ret)
            cls.nested = rnd.pick(NESTED_NAMES)
            members.append(NestedClass(cls.nested, CodeLiteral(members=tuple(helpers))))
        literal = CodeLiteral(implements=tuple(TypePath((n,)) for n in implements), members=tuple(members))
        decls.append(Declaration(name, Sum(TraitRef(f"t{i}"), Lit(literal))))
    program.table = DeclarationTable(tuple(decls), prelude=config.prelude)
    return program


# ============== Checks ==============

def check_wrong_count_monotone(table: DeclarationTable, dependency_mode: str = DEMAND) -> Verdict:
    """Along the compilation trace, no step may increase the wrong-literal count"""
    steps = 0
    try:
        for step in iter_compile(table, dependency_mode=dependency_mode):
            steps += 1
            scope = step.scope.prefix(step.decl_index)
            before, after = wrong_count(scope, step.before), wrong_count(scope, step.after)
            if after > before:
                return Verdict(check="a2", passed=False, samples=steps, failures=1,
                               message=f"{step.render()}: wrong count rose from {before} to {after}")
    except Reuse42Error as exc:
        return Verdict(check="a2", passed=True, samples=steps,
                       message=f"compilation stopped: {exc.diagnostic.code.value}")
    return Verdict(check="a2", passed=True, samples=steps)


def check_progress(program: TypedProgram, expr_budget: int, fuel: int, seed: int = 0) -> Verdict:
    """
    Closed well-typed terms over a compiled table never get stuck. A failing
    verdict names its reason in `details`: compile, ill-typed or stuck.
    """
    try:
        flattened = compile_program(program.table).table
    except Reuse42Error as exc:
        return Verdict(check="a1", passed=False, failures=1, details={"reason": "compile"},
                       message=f"generated table does not compile: {exc.diagnostic.render()}")
    rnd = SeededRandom(seed)
    names = sorted(program.classes) + sorted(program.interfaces)
    for n in range(expr_budget):
        term = program.term(rnd, rnd.pick(names), 3)
        try:
            type_expr(flattened, TypeEnv(), term)
        except Reuse42Error as exc:
            return Verdict(check="a1", passed=False, samples=n + 1, failures=1, details={"reason": "ill-typed"},
                           message=f"generated term is ill-typed: {exc.diagnostic.message}")
        try:
            run(flattened, term, fuel)
        except EvaluationError as exc:
            if exc.code is DiagnosticCode.STUCK:
                return Verdict(check="a1", passed=False, samples=n + 1, failures=1, details={"reason": "stuck"},
                               message=f"{canonical_print(term)}: {exc.diagnostic.message}")
    return Verdict(check="a1", passed=True, samples=expr_budget)


def _outcome(fn: Callable[[], CodeLiteral]):
    try:
        return fn(), None
    except Reuse42Error as exc:
        return None, exc.code


def check_algebra(config: GenConfig, count: int) -> Verdict:
    """Commutativity, associativity and identity of literal sum on sampled literals"""
    rnd = SeededRandom(config.seed)
    failures: List[str] = []
    for _ in range(count):
        l1, l2, l3 = (gen_literal(rnd, config) for _ in range(3))
        s12, e12 = _outcome(lambda: sum_literals(l1, l2))
        s21, e21 = _outcome(lambda: sum_literals(l2, l1))
        if e12 != e21 or (s12 is not None and canonical_print(s12) != canonical_print(s21)):
            failures.append(f"commutativity:\n{canonical_print(l1)}\n{canonical_print(l2)}")
        if s12 is not None:
            left, _ = _outcome(lambda: sum_literals(s12, l3))
            s23, _ = _outcome(lambda: sum_literals(l2, l3))
            right = _outcome(lambda: sum_literals(l1, s23))[0] if s23 is not None else None
            if left is not None and right is not None and canonical_print(left) != canonical_print(right):
                failures.append(f"associativity:\n{canonical_print(l1)}\n{canonical_print(l2)}\n{canonical_print(l3)}")
        if not l1.is_interface:
            if canonical_print(sum_literals(l1, EMPTY_LITERAL)) != canonical_print(l1) \
                    or canonical_print(sum_literals(EMPTY_LITERAL, l1)) != canonical_print(l1):
                failures.append(f"identity:\n{canonical_print(l1)}")
    return Verdict(check="algebra", passed=not failures, samples=count, failures=len(failures),
                   counterexamples=failures[:5])


def check_state_laws(config: GenConfig, count: int) -> Verdict:
    """F(v).xi() = vi, F(v).withXi(w).xi() = w and F(v).withXi(w).xj() = vj"""
    failures: List[str] = []
    samples = 0
    config = config.model_copy(update={"prelude": True})
    for k in range(count):
        program = gen_typed_table(config.reseeded(config.seed + k))
        flattened = compile_program(program.table).table
        rnd = SeededRandom(config.seed + k)
        for cls in program.classes.values():
            if not cls.fields:
                continue
            samples += 1
            value = program.value(rnd, cls.name)
            for i, (name, _) in enumerate(cls.fields):
                if run(flattened, Call(value, name, ())).value != value.args[i]:
                    failures.append(f"{canonical_print(value)}.{name}()")
            for name in cls.withers:
                replacement = program.value(rnd, dict(cls.fields)[name])
                updated = Call(value, wither_name(name), (replacement,))
                for j, (other, _) in enumerate(cls.fields):
                    expected = replacement if other == name else value.args[j]
                    if run(flattened, Call(updated, other, ())).value != expected:
                        failures.append(f"{canonical_print(updated)}.{other}()")
    return Verdict(check="state", passed=not failures, samples=samples, failures=len(failures),
                   counterexamples=failures[:5])


def _compile_outcome(table: DeclarationTable, mode: str) -> Optional[str]:
    try:
        compile_program(table, dependency_mode=mode)
    except Reuse42Error as exc:
        return exc.code.value
    return None


def measure_demand_divergence(config: GenConfig, count: int) -> Verdict:
    """
    Compare demand-driven and maximal dependency sets on generated tables.
    A measurement, so it always passes; the rate is in `details` and the
    first diverging tables are returned as counterexamples.
    """
    tallies = {"both_ok": 0, "demand_only": 0, "maximal_only": 0, "both_fail": 0}
    examples: List[str] = []
    for k in range(count):
        table = gen_table(config.reseeded(config.seed + k))
        demand, maximal = _compile_outcome(table, DEMAND), _compile_outcome(table, MAXIMAL)
        if demand is None and maximal is None:
            tallies["both_ok"] += 1
            continue
        if demand is not None and maximal is not None:
            tallies["both_fail"] += 1
            continue
        accepted_by = "demand" if demand is None else "maximal"
        tallies[f"{accepted_by}_only"] += 1
        if len(examples) < 3:
            examples.append(f"// accepted by {accepted_by} only\n{canonical_print(table)}")
    diverging = np.array([tallies["demand_only"], tallies["maximal_only"]])
    rate = float(diverging.sum() / count) if count else 0.0
    return Verdict(check="divergence", passed=True, samples=count,
                   message=f"divergence rate {rate:.4f}", details={**tallies, "rate": rate},
                   counterexamples=examples)


# ============== Shrinking ==============

def _smaller_exprs(expr: CodeExpr) -> Iterator[CodeExpr]:
    if isinstance(expr, Lit):
        members = expr.literal.members
        for i in range(len(members)):
            yield Lit(expr.literal.with_members(members[:i] + members[i + 1:]), expr.span)
        if expr.literal.implements:
            yield Lit(CodeLiteral(expr.literal.is_interface, (), members, expr.literal.span), expr.span)
    elif isinstance(expr, Sum):
        yield expr.left
        yield expr.right
        for left in _smaller_exprs(expr.left):
            yield Sum(left, expr.right, expr.span, expr.partial)
        for right in _smaller_exprs(expr.right):
            yield Sum(expr.left, right, expr.span, expr.partial)
    elif isinstance(expr, (Rename, SuperAs)):
        yield expr.arg


def _candidates(table: DeclarationTable) -> Iterator[DeclarationTable]:
    for i in reversed(range(len(table))):
        yield table.without(i)
    for i, decl in enumerate(table):
        for body in _smaller_exprs(decl.body):
            yield table.replace_at(i, Declaration(decl.name, body, decl.span))


def shrink_table(table: DeclarationTable, predicate: Callable[[DeclarationTable], bool]) -> DeclarationTable:
    """Greedy reduction: keep the first smaller table that still satisfies `predicate`"""
    def holds(candidate: DeclarationTable) -> bool:
        try:
            return predicate(candidate)
        except Exception:
            return False

    current = table
    improved = True
    while improved:
        improved = False
        for candidate in _candidates(current):
            if holds(candidate):
                current, improved = candidate, True
                break
    return current


def write_counterexample(table: DeclarationTable, name: str, directory: Optional[Path] = None) -> Path:
    """Save the canonical print of `table` as <name>.l42mu"""
    directory = Path(directory or settings.COUNTEREXAMPLE_DIR)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}{settings.SOURCE_SUFFIX}"
    path.write_text(canonical_print(table), encoding="utf-8")
    return path


# ============== Driver ==============

def run_fuzz(check: str, seed: int = 0, count: Optional[int] = None,
             out_dir: Optional[Path] = None, config: Optional[GenConfig] = None) -> Verdict:
    """Run one named check over `count` seeds starting at `seed`"""
    if check not in settings.FUZZ_CHECKS:
        raise ValueError(f"unknown check {check!r}; choose from {sorted(settings.FUZZ_CHECKS)}")
    count = count or settings.FUZZ_CHECKS[check]["count"]
    config = (config or GenConfig()).reseeded(seed)
    logger.info("fuzz %s: seed %d, %d samples", check, seed, count)

    if check == "algebra":
        return check_algebra(config, count)
    if check == "state":
        return check_state_laws(config, count)
    if check == "divergence":
        return measure_demand_divergence(config, count)

    failures: List[str] = []
    counterexamples: List[str] = []
    for k in range(count):
        sample = config.reseeded(seed + k)
        if check == "a2":
            table = gen_table(sample)
            verdict = check_wrong_count_monotone(table)

            def still_fails(candidate: DeclarationTable) -> bool:
                return not check_wrong_count_monotone(candidate).passed
        else:
            program = gen_typed_table(sample)
            table = program.table
            verdict = check_progress(program, settings.A1_EXPRESSIONS_PER_TABLE, settings.DEFAULT_FUEL, seed + k)
            reason = verdict.details.get("reason")

            def still_fails(candidate: DeclarationTable) -> bool:
                shrunk = replace(program, table=candidate)
                again = check_progress(shrunk, settings.A1_EXPRESSIONS_PER_TABLE, settings.DEFAULT_FUEL, seed + k)
                return again.details.get("reason") == reason
        if verdict.passed:
            continue
        small = shrink_table(table, still_fails)
        failures.append(verdict.message)
        if out_dir is not None:
            write_counterexample(small, f"{check}_seed{seed + k}", out_dir)
        if len(counterexamples) < 5:
            counterexamples.append(f"{verdict.message}\n{canonical_print(small)}")
    result = Verdict(check=check, passed=not failures, samples=count, failures=len(failures),
                     counterexamples=counterexamples)
    logger.info("fuzz %s: %s", check, "pass" if result.passed else f"{len(failures)} failures")
    return result
