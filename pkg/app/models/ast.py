"""
Abstract syntax of the calculus: type paths, members, code literals,
composition expressions, runtime expressions and the declaration table.

Every node is an immutable dataclass. Spans never take part in equality, so
two structurally equal programs compare equal whatever their source layout.
Members of a literal are kept in source order but compared as sets.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple, Union

from app.models.diagnostics import NO_SPAN, Span

THIS = "This"
THIS_VAR = "this"


class IdentKind(str, Enum):
    CLASS_NAME = "ClassName"
    TRAIT_NAME = "TraitName"
    METHOD_NAME = "MethodName"
    VAR_NAME = "VarName"


def is_class_name(text: str) -> bool:
    return bool(text) and text[0].isupper()


def is_trait_name(text: str) -> bool:
    return bool(text) and text[0].islower()


@dataclass(frozen=True)
class Ident:
    """A name checked against the letter case its kind requires"""
    text: str
    kind: IdentKind

    def __post_init__(self):
        if not self.text:
            raise ValueError("identifier text must be nonempty")
        if self.kind is IdentKind.CLASS_NAME and not is_class_name(self.text):
            raise ValueError(f"class name '{self.text}' must start with an uppercase letter")
        if self.kind is IdentKind.TRAIT_NAME and not is_trait_name(self.text):
            raise ValueError(f"trait name '{self.text}' must start with a lowercase letter")
        if self.kind in (IdentKind.METHOD_NAME, IdentKind.VAR_NAME) and is_class_name(self.text):
            what = "method" if self.kind is IdentKind.METHOD_NAME else "variable"
            raise ValueError(f"{what} name '{self.text}' cannot start with an uppercase letter")


# ============== Types ==============

@dataclass(frozen=True)
class TypePath:
    segments: Tuple[str, ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    @classmethod
    def of(cls, dotted: str, span: Span = NO_SPAN) -> "TypePath":
        return cls(tuple(dotted.split(".")), span)

    @property
    def root(self) -> str:
        return self.segments[0]

    @property
    def is_this_rooted(self) -> bool:
        return self.segments[0] == THIS

    def child(self, name: str) -> "TypePath":
        return TypePath(self.segments + (name,), self.span)

    def with_root(self, root: Tuple[str, ...]) -> "TypePath":
        """Replace the first segment by a whole prefix"""
        return TypePath(root + self.segments[1:], self.span)

    def startswith(self, prefix: Tuple[str, ...]) -> bool:
        return self.segments[:len(prefix)] == prefix

    def __str__(self) -> str:
        return ".".join(self.segments)


@dataclass(frozen=True)
class Param:
    type: TypePath
    name: str


@dataclass(frozen=True)
class MethodSig:
    is_static: bool
    name: str
    params: Tuple[Param, ...]
    return_type: TypePath

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def param_types(self) -> Tuple[TypePath, ...]:
        return tuple(p.type for p in self.params)

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.params)


# ============== Runtime expressions ==============

@dataclass(frozen=True)
class Var:
    name: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    receiver: "Expr"
    name: str
    args: Tuple["Expr", ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class StaticCall:
    type: TypePath
    name: str
    args: Tuple["Expr", ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class IntrinsicConst:
    """Prelude constant: an Int or a Bool"""
    type_name: str
    value: Union[int, bool]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


Expr = Union[Var, Call, StaticCall, IntrinsicConst]


def sub_expressions(e: Expr) -> Iterator[Expr]:
    """Pre-order walk"""
    yield e
    if isinstance(e, Call):
        yield from sub_expressions(e.receiver)
        for a in e.args:
            yield from sub_expressions(a)
    elif isinstance(e, StaticCall):
        for a in e.args:
            yield from sub_expressions(a)


# ============== Members and literals ==============

MemberKey = Tuple


@dataclass(frozen=True)
class MethodMember:
    sig: MethodSig
    body: Optional[Expr] = None
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def name(self) -> str:
        return self.sig.name

    @property
    def key(self) -> MemberKey:
        return ("m", self.sig.name, self.sig.arity)

    @property
    def is_abstract(self) -> bool:
        return self.body is None

    def abstract(self) -> "MethodMember":
        return replace(self, body=None)


@dataclass(frozen=True)
class NestedClass:
    name: str
    literal: "CodeLiteral"
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def key(self) -> MemberKey:
        return ("c", self.name)


Member = Union[MethodMember, NestedClass]


def member_sort_key(member: Member) -> MemberKey:
    # nested classes ("c") sort before methods ("m")
    return member.key


@dataclass(frozen=True, eq=False)
class CodeLiteral:
    is_interface: bool = False
    implements: Tuple[TypePath, ...] = ()
    members: Tuple[Member, ...] = ()
    span: Span = field(default=NO_SPAN, repr=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CodeLiteral):
            return NotImplemented
        return (
            self.is_interface == other.is_interface
            and frozenset(self.implements) == frozenset(other.implements)
            and frozenset(self.members) == frozenset(other.members)
        )

    def __hash__(self) -> int:
        return hash((self.is_interface, frozenset(self.implements), frozenset(self.members)))

    def methods(self) -> List[MethodMember]:
        return [m for m in self.members if isinstance(m, MethodMember)]

    def nested_classes(self) -> List[NestedClass]:
        return [m for m in self.members if isinstance(m, NestedClass)]

    def member_map(self) -> Dict[MemberKey, Member]:
        return {m.key: m for m in self.members}

    def nested(self, name: str) -> Optional[NestedClass]:
        for m in self.members:
            if isinstance(m, NestedClass) and m.name == name:
                return m
        return None

    def method(self, name: str, arity: int) -> Optional[MethodMember]:
        for m in self.members:
            if isinstance(m, MethodMember) and m.sig.name == name and m.sig.arity == arity:
                return m
        return None

    def methods_named(self, name: str) -> List[MethodMember]:
        return [m for m in self.methods() if m.sig.name == name]

    def with_members(self, members) -> "CodeLiteral":
        return replace(self, members=tuple(members))


EMPTY_LITERAL = CodeLiteral()


# ============== Composition expressions ==============

@dataclass(frozen=True)
class Lit:
    literal: CodeLiteral
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class TraitRef:
    name: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Sum:
    left: "CodeExpr"
    right: "CodeExpr"
    span: Span = field(default=NO_SPAN, compare=False, repr=False)
    # inner link of a desugared `Use`: implements-consistency is checked on the whole Use only
    partial: bool = False


@dataclass(frozen=True)
class Rename:
    arg: "CodeExpr"
    source: str
    target: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class SuperAs:
    arg: "CodeExpr"
    method: str
    arity: Optional[int]
    alias: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Use:
    """Surface-only n-ary composition; removed by desugar_use"""
    items: Tuple["CodeExpr", ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


CodeExpr = Union[Lit, TraitRef, Sum, Rename, SuperAs, Use]


def literals_of(expr: CodeExpr) -> Iterator[CodeLiteral]:
    """Literal sub-expressions, left to right"""
    if isinstance(expr, Lit):
        yield expr.literal
    elif isinstance(expr, Sum):
        yield from literals_of(expr.left)
        yield from literals_of(expr.right)
    elif isinstance(expr, (Rename, SuperAs)):
        yield from literals_of(expr.arg)
    elif isinstance(expr, Use):
        for item in expr.items:
            yield from literals_of(item)


def trait_refs_of(expr: CodeExpr) -> Iterator[TraitRef]:
    """Trait references in `expr`, left to right"""
    if isinstance(expr, TraitRef):
        yield expr
    elif isinstance(expr, Sum):
        yield from trait_refs_of(expr.left)
        yield from trait_refs_of(expr.right)
    elif isinstance(expr, (Rename, SuperAs)):
        yield from trait_refs_of(expr.arg)
    elif isinstance(expr, Use):
        for item in expr.items:
            yield from trait_refs_of(item)


# ============== Declarations ==============

@dataclass(frozen=True)
class Declaration:
    name: str
    body: CodeExpr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def is_trait(self) -> bool:
        return is_trait_name(self.name)

    @property
    def is_class(self) -> bool:
        return is_class_name(self.name)

    @property
    def literal(self) -> Optional[CodeLiteral]:
        return self.body.literal if isinstance(self.body, Lit) else None


@dataclass(frozen=True)
class DeclarationTable:
    """
    The program: an ordered list of top-level declarations.

    `this_literal` binds the reserved name `This` while a trait or a
    composition result is being checked; `prelude` makes Int, Bool and Void
    resolvable.
    """
    decls: Tuple[Declaration, ...] = ()
    this_literal: Optional[CodeLiteral] = field(default=None, compare=False)
    prelude: bool = field(default=True, compare=False)

    def __iter__(self) -> Iterator[Declaration]:
        return iter(self.decls)

    def __len__(self) -> int:
        return len(self.decls)

    def __getitem__(self, index: int) -> Declaration:
        return self.decls[index]

    @property
    def names(self) -> List[str]:
        return [d.name for d in self.decls]

    @property
    def is_flattened(self) -> bool:
        return all(isinstance(d.body, Lit) for d in self.decls)

    def get(self, name: str) -> Optional[Declaration]:
        for d in self.decls:
            if d.name == name:
                return d
        return None

    def index_of(self, name: str) -> Optional[int]:
        for i, d in enumerate(self.decls):
            if d.name == name:
                return i
        return None

    def with_this(self, literal: Optional[CodeLiteral]) -> "DeclarationTable":
        return replace(self, this_literal=literal)

    def prefix(self, count: int) -> "DeclarationTable":
        return replace(self, decls=self.decls[:count], this_literal=None)

    def append(self, decl: Declaration) -> "DeclarationTable":
        return replace(self, decls=self.decls + (decl,))

    def put(self, decl: Declaration) -> "DeclarationTable":
        """Replace the declaration with the same name, or append it"""
        index = self.index_of(decl.name)
        if index is None:
            return self.append(decl)
        return self.replace_at(index, decl)

    def replace_at(self, index: int, decl: Declaration) -> "DeclarationTable":
        decls = list(self.decls)
        decls[index] = decl
        return replace(self, decls=tuple(decls))

    def without(self, index: int) -> "DeclarationTable":
        return replace(self, decls=self.decls[:index] + self.decls[index + 1:])
