"""
Concrete syntax: tokenizer, recursive-descent parser, `Use` desugaring and the
name-qualification pre-pass.

Grammar (whitespace insignificant, `//` and `/* */` comments skipped):

    program  := decl*
    decl     := IDENT '=' cexpr
    cexpr    := primary ('+' primary)*
    primary  := 'Use' item (',' item)* | item
    item     := (literal | TRAITNAME | '(' cexpr ')') suffix*
    suffix   := '[' 'rename' CLASS 'into' CLASS ']'
              | '[' 'super' METHOD ('/' INT)? 'as' METHOD ']'
    literal  := '{' 'interface'? ('implements' type (',' type)*)? member* '}'
    member   := 'static'? 'method' type METHOD '(' params? ')' body? | CLASS '=' literal
    body     := '{' 'return' expr ';'? '}'

Expressions add prelude operator sugar on top of `x | e.m(e*) | T.m(e*)`.
"""
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Set, Tuple

from app.models.ast import (
    THIS,
    Call,
    CodeExpr,
    CodeLiteral,
    Declaration,
    DeclarationTable,
    Expr,
    Ident,
    IdentKind,
    IntrinsicConst,
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
    Use,
    Var,
    is_class_name,
    is_trait_name,
)
from app.models.diagnostics import DiagnosticCode, Span, SyntaxProblem
from app.services.prelude_service import (
    BINARY_OPERATORS,
    BOOL,
    INT,
    PRELUDE_NAMES,
    TYPE_ALIASES,
    UNARY_NOT,
)
from app.services.table_service import lookup_type, map_expr_types

KEYWORDS = {
    "interface", "implements", "method", "static", "Use",
    "rename", "into", "super", "as", "return", "true", "false",
}

_TOKEN_SPEC = [
    ("LINE_COMMENT", r"//[^\n]*"),
    ("BLOCK_COMMENT", r"/\*.*?\*/"),
    ("NEWLINE", r"\n"),
    ("SPACE", r"[ \t\r\f]+"),
    ("INT", r"\d+"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("PUNCT", r"==|&&|\|\||[{}()\[\]+,=.;/*<!\-]"),
    ("ILLEGAL", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{rx})" for name, rx in _TOKEN_SPEC), re.DOTALL)

# binding strength of the binary operator sugar, loosest first
_PRECEDENCE: List[Tuple[str, ...]] = [("||",), ("&&",), ("==",), ("<",), ("+", "-"), ("*", "/")]


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | punct | int | end
    text: str
    span: Span

    def is_(self, kind: str, text: Optional[str] = None) -> bool:
        return self.kind == kind and (text is None or self.text == text)


def _syntax(message: str, span: Span) -> SyntaxProblem:
    return SyntaxProblem.of(DiagnosticCode.NOT_WELL_FORMED, message, span)


# ============== Lexer ==============

def tokenize(source: str, file: str = "<input>") -> List[Token]:
    """Maximal-munch token stream ending with an `end` token"""
    tokens: List[Token] = []
    line, line_start = 1, 0
    for match in _TOKEN_RE.finditer(source):
        kind, text = match.lastgroup, match.group()
        col = match.start() - line_start + 1
        span = Span(file, line, col, col + len(text))
        if kind == "NEWLINE":
            line, line_start = line + 1, match.end()
        elif kind == "BLOCK_COMMENT":
            if "\n" in text:
                line += text.count("\n")
                line_start = match.start() + text.rindex("\n") + 1
        elif kind in ("SPACE", "LINE_COMMENT"):
            continue
        elif kind == "ILLEGAL":
            raise _syntax(f"illegal character {text!r}", span)
        elif kind == "IDENT":
            tokens.append(Token("keyword" if text in KEYWORDS else "ident", text, span))
        elif kind == "INT":
            tokens.append(Token("int", text, span))
        else:
            tokens.append(Token("punct", text, span))
    end_col = len(source) - line_start + 1
    tokens.append(Token("end", "", Span(file, line, end_col, end_col)))
    return tokens


# ============== Parser ==============

class Parser:
    def __init__(self, tokens: Sequence[Token]):
        self.tokens = list(tokens) or [Token("end", "", Span())]
        self.pos = 0

    # ---- token plumbing ----

    def peek(self, offset: int = 0) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self) -> Token:
        token = self.peek()
        if token.kind != "end":
            self.pos += 1
        return token

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        return self.peek().is_(kind, text)

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, text):
            return self.advance()
        return None

    def expect(self, kind: str, text: Optional[str] = None, what: Optional[str] = None) -> Token:
        if self.at(kind, text):
            return self.advance()
        token = self.peek()
        wanted = what or (repr(text) if text else kind)
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise _syntax(f"expected {wanted}, found {found}", token.span)

    def expect_ident(self, kind: IdentKind, what: str) -> Ident:
        token = self.expect("ident", what=what)
        try:
            return Ident(token.text, kind)
        except ValueError as exc:
            raise _syntax(str(exc), token.span)

    # ---- declarations and code expressions ----

    def parse_program(self) -> List[Declaration]:
        decls = []
        while not self.at("end"):
            decls.append(self.parse_declaration())
        return decls

    def parse_declaration(self) -> Declaration:
        name = self.expect("ident", what="a class or trait name")
        if name.text.startswith("_"):
            raise _syntax(f"'{name.text}' is not a class or trait name", name.span)
        self.expect("punct", "=")
        if self.at("end"):
            raise _syntax(f"missing body for {name.text}", self.peek().span)
        return Declaration(name.text, self.parse_code_expr(), name.span)

    def parse_code_expr(self) -> CodeExpr:
        left = self.parse_primary()
        while self.at("punct", "+"):
            plus = self.advance()
            left = Sum(left, self.parse_primary(), plus.span)
        return left

    def parse_primary(self) -> CodeExpr:
        use = self.accept("keyword", "Use")
        if use is None:
            return self.parse_item()
        items = [self.parse_item()]
        while self.accept("punct", ","):
            items.append(self.parse_item())
        return Use(tuple(items), use.span)

    def parse_item(self) -> CodeExpr:
        token = self.peek()
        if token.is_("punct", "{"):
            expr: CodeExpr = Lit(self.parse_literal(), token.span)
        elif token.is_("punct", "("):
            self.advance()
            expr = self.parse_code_expr()
            self.expect("punct", ")")
        elif token.kind == "ident":
            self.advance()
            if not is_trait_name(token.text):
                raise _syntax(f"only trait names can be reused; '{token.text}' is a class name", token.span)
            expr = TraitRef(token.text, token.span)
        else:
            found = "end of input" if token.kind == "end" else repr(token.text)
            raise _syntax(f"expected a code literal or trait name, found {found}", token.span)
        while self.at("punct", "["):
            expr = self.parse_suffix(expr)
        return expr

    def parse_suffix(self, arg: CodeExpr) -> CodeExpr:
        open_ = self.expect("punct", "[")
        if self.accept("keyword", "rename"):
            source = self.expect_ident(IdentKind.CLASS_NAME, "a class name")
            self.expect("keyword", "into")
            target = self.expect_ident(IdentKind.CLASS_NAME, "a class name")
            self.expect("punct", "]")
            return Rename(arg, source.text, target.text, open_.span)
        if self.accept("keyword", "super"):
            method = self.expect_ident(IdentKind.METHOD_NAME, "a method name")
            arity = None
            if self.accept("punct", "/"):
                arity = int(self.expect("int", what="an arity").text)
            self.expect("keyword", "as")
            alias = self.expect_ident(IdentKind.METHOD_NAME, "a method name")
            self.expect("punct", "]")
            return SuperAs(arg, method.text, arity, alias.text, open_.span)
        raise _syntax("expected 'rename' or 'super'", self.peek().span)

    # ---- literals ----

    def parse_literal(self) -> CodeLiteral:
        open_ = self.expect("punct", "{")
        is_interface = self.accept("keyword", "interface") is not None
        implements: List[TypePath] = []
        if self.accept("keyword", "implements"):
            implements.append(self.parse_type())
            while self.accept("punct", ","):
                implements.append(self.parse_type())
        members = []
        while not self.at("punct", "}"):
            members.append(self.parse_member())
        self.expect("punct", "}")
        return CodeLiteral(is_interface, tuple(implements), tuple(members), open_.span)

    def parse_member(self):
        token = self.peek()
        if token.kind == "ident" and is_class_name(token.text) and self.peek(1).is_("punct", "="):
            self.advance()
            self.advance()
            return NestedClass(token.text, self.parse_literal(), token.span)
        is_static = self.accept("keyword", "static") is not None
        if not self.at("keyword", "method"):
            found = "end of input" if self.at("end") else repr(self.peek().text)
            raise _syntax(f"expected a method or nested class, found {found}", self.peek().span)
        self.advance()
        return_type = self.parse_type()
        name = self.expect_ident(IdentKind.METHOD_NAME, "a method name")
        self.expect("punct", "(")
        params: List[Param] = []
        if not self.at("punct", ")"):
            params.append(self.parse_param())
            while self.accept("punct", ","):
                params.append(self.parse_param())
        self.expect("punct", ")")
        body = None
        if self.accept("punct", "{"):
            self.expect("keyword", "return")
            body = self.parse_expr()
            self.accept("punct", ";")
            self.expect("punct", "}")
        sig = MethodSig(is_static, name.text, tuple(params), return_type)
        return MethodMember(sig, body, token.span)

    def parse_param(self) -> Param:
        type_ = self.parse_type()
        name = self.expect_ident(IdentKind.VAR_NAME, "a parameter name")
        return Param(type_, name.text)

    def parse_type(self) -> TypePath:
        first = self.expect("ident", what="a type")
        if first.text in TYPE_ALIASES:
            return TypePath((TYPE_ALIASES[first.text],), first.span)
        if not is_class_name(first.text):
            raise _syntax(f"'{first.text}' is a trait name and cannot be used as a type", first.span)
        segments = [first.text]
        while self.at("punct", ".") and self.peek(1).kind == "ident" and is_class_name(self.peek(1).text):
            self.advance()
            segments.append(self.advance().text)
        return TypePath(tuple(segments), first.span)

    # ---- expressions ----

    def parse_expr(self, level: int = 0) -> Expr:
        if level == len(_PRECEDENCE):
            return self.parse_unary()
        left = self.parse_expr(level + 1)
        while self.peek().kind == "punct" and self.peek().text in _PRECEDENCE[level]:
            op = self.advance()
            right = self.parse_expr(level + 1)
            left = Call(left, BINARY_OPERATORS[op.text], (right,), op.span)
        return left

    def parse_unary(self) -> Expr:
        token = self.peek()
        if token.is_("punct", "!"):
            self.advance()
            return Call(self.parse_unary(), UNARY_NOT, (), token.span)
        if token.is_("punct", "-") and self.peek(1).kind == "int":
            self.advance()
            number = self.advance()
            return self.parse_postfix(IntrinsicConst(INT, -int(number.text), token.span))
        return self.parse_postfix(self.parse_atom())

    def parse_atom(self) -> Expr:
        token = self.peek()
        if token.kind == "int":
            self.advance()
            return IntrinsicConst(INT, int(token.text), token.span)
        if token.is_("keyword", "true") or token.is_("keyword", "false"):
            self.advance()
            return IntrinsicConst(BOOL, token.text == "true", token.span)
        if token.is_("punct", "("):
            self.advance()
            inner = self.parse_expr()
            self.expect("punct", ")")
            return inner
        if token.kind == "ident" and is_class_name(token.text):
            type_ = self.parse_type()
            self.expect("punct", ".")
            name, args = self.parse_call_tail()
            return StaticCall(type_, name, args, token.span)
        if token.kind == "ident":
            self.advance()
            return Var(token.text, token.span)
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise _syntax(f"expected an expression, found {found}", token.span)

    def parse_postfix(self, receiver: Expr) -> Expr:
        while self.at("punct", "."):
            dot = self.advance()
            name, args = self.parse_call_tail()
            receiver = Call(receiver, name, args, dot.span)
        return receiver

    def parse_call_tail(self) -> Tuple[str, Tuple[Expr, ...]]:
        name = self.expect_ident(IdentKind.METHOD_NAME, "a method name")
        self.expect("punct", "(")
        args: List[Expr] = []
        if not self.at("punct", ")"):
            args.append(self.parse_expr())
            while self.accept("punct", ","):
                args.append(self.parse_expr())
        self.expect("punct", ")")
        return name.text, tuple(args)


def parse_program(tokens: Sequence[Token], prelude: bool = True) -> DeclarationTable:
    """Parse a token stream into a (not yet desugared) declaration table"""
    return DeclarationTable(tuple(Parser(tokens).parse_program()), prelude=prelude)


def parse_expression(source: str, file: str = "<expr>") -> Expr:
    """Parse a single closed expression; trailing input is a syntax error"""
    parser = Parser(tokenize(source, file))
    expr = parser.parse_expr()
    parser.expect("end", what="end of expression")
    return expr


# ============== Use desugaring ==============

def desugar_use(expr: CodeExpr) -> CodeExpr:
    """
    `Use i1, ..., in` becomes the left-associated sum of its items; every
    sum but the outermost is marked partial.
    """
    if isinstance(expr, Use):
        items = [desugar_use(i) for i in expr.items]
        result = items[0]
        for position, item in enumerate(items[1:], start=2):
            result = Sum(result, item, expr.span, partial=position < len(items))
        return result
    if isinstance(expr, Sum):
        return Sum(desugar_use(expr.left), desugar_use(expr.right), expr.span, expr.partial)
    if isinstance(expr, Rename):
        return Rename(desugar_use(expr.arg), expr.source, expr.target, expr.span)
    if isinstance(expr, SuperAs):
        return SuperAs(desugar_use(expr.arg), expr.method, expr.arity, expr.alias, expr.span)
    return expr


def desugar_table(table: DeclarationTable) -> DeclarationTable:
    """Rewrite every Use into nested sums"""
    return DeclarationTable(
        tuple(Declaration(d.name, desugar_use(d.body), d.span) for d in table),
        prelude=table.prelude,
    )


# ============== Name qualification ==============

def _nested_names(literal: CodeLiteral) -> Set[str]:
    return {n.name for n in literal.nested_classes()}


def declaration_scope(expr: CodeExpr, table: DeclarationTable, visiting: Optional[Set[str]] = None) -> Set[str]:
    """Nested class names the flattened result of `expr` will expose"""
    visiting = set() if visiting is None else visiting
    if isinstance(expr, Lit):
        return _nested_names(expr.literal)
    if isinstance(expr, TraitRef):
        decl = table.get(expr.name)
        if decl is None or expr.name in visiting:
            return set()
        return declaration_scope(decl.body, table, visiting | {expr.name})
    if isinstance(expr, Sum):
        return declaration_scope(expr.left, table, visiting) | declaration_scope(expr.right, table, visiting)
    if isinstance(expr, Use):
        out: Set[str] = set()
        for item in expr.items:
            out |= declaration_scope(item, table, visiting)
        return out
    if isinstance(expr, Rename):
        inner = declaration_scope(expr.arg, table, visiting)
        if expr.source in inner:
            return (inner - {expr.source}) | {expr.target}
        return inner
    if isinstance(expr, SuperAs):
        return declaration_scope(expr.arg, table, visiting)
    return set()


class _Qualifier:
    def __init__(self, top_names: Set[str], decl_scope: Set[str], prelude: bool):
        self.top_names = top_names
        self.decl_scope = decl_scope
        self.prelude = prelude

    def resolve(self, path: TypePath, scopes: List[Tuple[Tuple[str, ...], Set[str]]]) -> TypePath:
        root = path.root
        if root == THIS:
            return path
        if root in TYPE_ALIASES:
            return path.with_root((TYPE_ALIASES[root],))
        for prefix, names in reversed(scopes):
            if root in names:
                return TypePath((THIS,) + prefix + path.segments, path.span)
        if root in self.decl_scope:
            return TypePath((THIS,) + path.segments, path.span)
        if root in self.top_names:
            return path
        if self.prelude and root in PRELUDE_NAMES:
            return path
        raise _syntax(f"unknown type {path}", path.span)

    def literal(self, literal: CodeLiteral, scopes) -> CodeLiteral:
        def resolve(path: TypePath) -> TypePath:
            return self.resolve(path, scopes)

        members = []
        for m in literal.members:
            if isinstance(m, NestedClass):
                inner = scopes + [(scopes[-1][0] + (m.name,), _nested_names(m.literal))]
                members.append(NestedClass(m.name, self.literal(m.literal, inner), m.span))
                continue
            sig = m.sig
            params = tuple(Param(resolve(p.type), p.name) for p in sig.params)
            body = map_expr_types(m.body, resolve) if m.body is not None else None
            members.append(MethodMember(MethodSig(sig.is_static, sig.name, params, resolve(sig.return_type)), body, m.span))
        return CodeLiteral(literal.is_interface, tuple(resolve(t) for t in literal.implements),
                           tuple(members), literal.span)


def qualify_names(table: DeclarationTable) -> DeclarationTable:
    """
    Rewrite bare type names to `This`-rooted paths when they name a nested
    class of an enclosing literal (innermost wins) or of the declaration's
    flattened result; top-level and prelude names stay absolute.
    """
    top_names = set(table.names)
    decls = []
    for decl in table:
        qualifier = _Qualifier(top_names, declaration_scope(decl.body, table), table.prelude)
        decls.append(Declaration(decl.name, _qualify_expr(decl.body, qualifier), decl.span))
    return DeclarationTable(tuple(decls), prelude=table.prelude)


def _qualify_expr(expr: CodeExpr, qualifier: _Qualifier) -> CodeExpr:
    if isinstance(expr, Lit):
        scopes = [((), _nested_names(expr.literal))]
        return Lit(qualifier.literal(expr.literal, scopes), expr.span)
    if isinstance(expr, Sum):
        return Sum(_qualify_expr(expr.left, qualifier), _qualify_expr(expr.right, qualifier), expr.span, expr.partial)
    if isinstance(expr, Use):
        return Use(tuple(_qualify_expr(i, qualifier) for i in expr.items), expr.span)
    if isinstance(expr, Rename):
        return Rename(_qualify_expr(expr.arg, qualifier), expr.source, expr.target, expr.span)
    if isinstance(expr, SuperAs):
        return SuperAs(_qualify_expr(expr.arg, qualifier), expr.method, expr.arity, expr.alias, expr.span)
    return expr


def qualify_expression(table: DeclarationTable, expr: Expr, scope: Optional[str] = None) -> Expr:
    """
    Qualify type names in a closed run expression against a flattened table.
    With a scope class C, bare names of C's nested classes become `C.Name`.
    """
    nested: Set[str] = set()
    if scope is not None:
        literal = lookup_type(table, TypePath((scope,)))
        nested = _nested_names(literal) if literal is not None else set()

    def resolve(path: TypePath) -> TypePath:
        root = path.root
        if root in TYPE_ALIASES:
            return path.with_root((TYPE_ALIASES[root],))
        if root in nested:
            return TypePath((scope,) + path.segments, path.span)
        if table.get(root) is not None or (table.prelude and root in PRELUDE_NAMES):
            return path
        raise _syntax(f"unknown type {path}", path.span)

    return map_expr_types(expr, resolve)


def owners_of_nested(table: DeclarationTable, names: Iterable[str]) -> List[str]:
    """Top-level classes declaring every given name as a nested class"""
    wanted = set(names)
    owners = []
    for decl in table:
        literal = decl.literal
        if decl.is_class and literal is not None and wanted <= _nested_names(literal):
            owners.append(decl.name)
    return owners


# ============== Loading ==============

def load_program(sources: Iterable[Tuple[str, str]], prelude: bool = True) -> DeclarationTable:
    """Tokenize, parse, desugar and qualify (text, file) pairs concatenated in order"""
    decls: List[Declaration] = []
    for text, file in sources:
        decls.extend(parse_program(tokenize(text, file), prelude))
    table = DeclarationTable(tuple(decls), prelude=prelude)
    return qualify_names(desugar_table(table))


def parse_source(text: str, file: str = "<input>", prelude: bool = True) -> DeclarationTable:
    """Parse one program text into a declaration table"""
    return load_program([(text, file)], prelude)
