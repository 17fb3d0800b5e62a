"""Surface syntax: lexer, parser and printer for declaration files.

The notation mirrors the usual presentation: ``*`` and ``[]`` for the two
sorts, ``(x:A)B`` for products, ``A => B`` for non-dependent ones,
``[x:A]b`` for abstractions, juxtaposition for application.  Declarations::

    symbol f : T [mon+ i, mon- j].
    inductive C : T [mon+ i] := c1 : T1 | c2 : T2.
    inductive C := c1 : T1 | c2 : T2.          // attach to a prior symbol
    rule lhs --> rhs in x:T, y:U with A'=A.    // both clauses optional
    recursor f for C.
    #fuel 5000.
    #equiv f g.

Identifiers may contain letters, digits, underscores and primes; ``//``
starts a line comment.  The parser resolves nothing: every identifier
comes out as a variable, and :func:`resolve` later turns the declared,
unbound ones into symbols.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    Abs,
    App,
    KernelError,
    Prod,
    STAR,
    BOX,
    Sort,
    Sym,
    Term,
    Var,
    arrow,
    free_vars,
    show,
)


class ParseError(KernelError):
    code = "PARSE"

    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class SrcSpan:
    line: int
    col: int
    length: int


KEYWORDS = {"symbol", "inductive", "rule", "recursor", "in", "with", "for"}

_IDENT_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_'")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    col: int

    @property
    def span(self) -> SrcSpan:
        return SrcSpan(self.line, self.col, max(len(self.value), 1))


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def push(kind: str, value: str) -> None:
        tokens.append(Token(kind, value, line, col))

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in _IDENT_CHARS:
            j = i
            while j < n and text[j] in _IDENT_CHARS:
                j += 1
            word = text[i:j]
            if word == "mon" and j < n and text[j] in "+-":
                push("MONPLUS" if text[j] == "+" else "MONMINUS", word + text[j])
                j += 1
            elif word in KEYWORDS:
                push("KW", word)
            else:
                push("IDENT", word)
            col += j - i
            i = j
            continue
        if c == "#":
            j = i + 1
            while j < n and text[j] in _IDENT_CHARS:
                j += 1
            word = text[i:j]
            if word in ("#fuel", "#equiv"):
                push("PRAGMA", word)
                col += j - i
                i = j
                continue
            raise ParseError(f"unknown pragma {word!r}", line, col)
        two = text[i : i + 2]
        if two == "[]":
            push("BOX", "[]")
            i += 2
            col += 2
            continue
        if two == "=>":
            push("ARROW", "=>")
            i += 2
            col += 2
            continue
        if text.startswith("-->", i):
            push("RULEARROW", "-->")
            i += 3
            col += 3
            continue
        if two == ":=":
            push("DEFINE", ":=")
            i += 2
            col += 2
            continue
        single = {
            "(": "LPAREN",
            ")": "RPAREN",
            "[": "LBRACK",
            "]": "RBRACK",
            ":": "COLON",
            ".": "DOT",
            ",": "COMMA",
            "|": "BAR",
            "=": "EQUALS",
            "*": "SORT",
        }.get(c)
        if single is None:
            raise ParseError(f"unexpected character {c!r}", line, col)
        push(single, c)
        i += 1
        col += 1
    tokens.append(Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# source declarations


@dataclass(frozen=True)
class SymbolSrc:
    name: str
    type: Term
    mon_plus: tuple[int, ...]
    mon_minus: tuple[int, ...]
    span: SrcSpan


@dataclass(frozen=True)
class InductiveSrc:
    name: str
    type: Term | None  # None: attach constructors to an existing symbol
    constructors: tuple[tuple[str, Term], ...]
    mon_plus: tuple[int, ...]
    mon_minus: tuple[int, ...]
    span: SrcSpan


@dataclass(frozen=True)
class RuleSrc:
    lhs: Term
    rhs: Term
    env: tuple[tuple[str, Term], ...] | None  # None: infer
    rho: tuple[tuple[str, Term], ...]
    span: SrcSpan


@dataclass(frozen=True)
class RecursorSrc:
    name: str
    target: str
    span: SrcSpan


@dataclass(frozen=True)
class FuelSrc:
    steps: int
    span: SrcSpan


@dataclass(frozen=True)
class EquivSrc:
    names: tuple[str, ...]
    span: SrcSpan


Declaration = SymbolSrc | InductiveSrc | RuleSrc | RecursorSrc | FuelSrc | EquivSrc


@dataclass(frozen=True)
class SourceFile:
    declarations: tuple[Declaration, ...] = ()


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            shown = tok.value or tok.kind
            raise ParseError(f"expected {what or kind}, found {shown!r}", tok.line, tok.col)
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        return self.expect("IDENT", what)

    def expect_int(self, what: str = "number") -> int:
        tok = self.expect_ident(what)
        if not tok.value.isdigit():
            raise ParseError(f"expected {what}, found {tok.value!r}", tok.line, tok.col)
        return int(tok.value)

    # -- terms --------------------------------------------------------

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "LPAREN" and self.peek(1).kind == "IDENT" and self.peek(2).kind == "COLON":
            self.next()
            binder = self.next().value
            self.next()
            domain = self.parse_term()
            self.expect("RPAREN", "')'")
            codomain = self.parse_term()
            return Prod(binder, domain, codomain)
        if tok.kind == "LBRACK":
            self.next()
            binder = self.expect_ident("binder").value
            self.expect("COLON", "':'")
            annot = self.parse_term()
            self.expect("RBRACK", "']'")
            body = self.parse_term()
            return Abs(binder, annot, body)
        left = self.parse_app()
        if self.peek().kind == "ARROW":
            self.next()
            return arrow(left, self.parse_term())
        return left

    def parse_app(self) -> Term:
        t = self.parse_atom()
        while self.peek().kind in ("IDENT", "SORT", "BOX", "LPAREN"):
            t = App(t, self.parse_atom())
        return t

    def parse_atom(self) -> Term:
        tok = self.next()
        if tok.kind == "IDENT":
            return Var(tok.value)
        if tok.kind == "SORT":
            return STAR
        if tok.kind == "BOX":
            return BOX
        if tok.kind == "LPAREN":
            t = self.parse_term()
            self.expect("RPAREN", "')'")
            return t
        raise ParseError(f"expected a term, found {tok.value or tok.kind!r}", tok.line, tok.col)

    # -- annotations ----------------------------------------------------

    def parse_annotations(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        plus: list[int] = []
        minus: list[int] = []
        if self.peek().kind != "LBRACK":
            return (), ()
        self.next()
        while True:
            tok = self.next()
            if tok.kind == "MONPLUS":
                plus.append(self.expect_int("argument index"))
            elif tok.kind == "MONMINUS":
                minus.append(self.expect_int("argument index"))
            else:
                raise ParseError("expected mon+ or mon-", tok.line, tok.col)
            if self.peek().kind == "COMMA":
                self.next()
                continue
            break
        self.expect("RBRACK", "']'")
        return tuple(plus), tuple(minus)

    # -- declarations ---------------------------------------------------

    def parse_source(self) -> SourceFile:
        decls: list[Declaration] = []
        while self.peek().kind != "EOF":
            decls.append(self.parse_declaration())
        return SourceFile(tuple(decls))

    def parse_declaration(self) -> Declaration:
        tok = self.peek()
        if tok.kind == "PRAGMA":
            return self.parse_pragma()
        if tok.kind != "KW":
            raise ParseError(
                f"expected a declaration, found {tok.value or tok.kind!r}", tok.line, tok.col
            )
        if tok.value == "symbol":
            return self.parse_symbol()
        if tok.value == "inductive":
            return self.parse_inductive()
        if tok.value == "rule":
            return self.parse_rule()
        if tok.value == "recursor":
            return self.parse_recursor()
        raise ParseError(f"unexpected keyword {tok.value!r}", tok.line, tok.col)

    def parse_symbol(self) -> SymbolSrc:
        kw = self.next()
        name = self.expect_ident("symbol name").value
        self.expect("COLON", "':'")
        ty = self.parse_term()
        plus, minus = self.parse_annotations()
        self.expect("DOT", "'.'")
        return SymbolSrc(name, ty, plus, minus, kw.span)

    def parse_inductive(self) -> InductiveSrc:
        kw = self.next()
        name = self.expect_ident("inductive type name").value
        ty: Term | None = None
        plus: tuple[int, ...] = ()
        minus: tuple[int, ...] = ()
        if self.peek().kind == "COLON":
            self.next()
            ty = self.parse_term()
            plus, minus = self.parse_annotations()
        ctors: list[tuple[str, Term]] = []
        if self.peek().kind == "DEFINE":
            self.next()
            while True:
                cname = self.expect_ident("constructor name").value
                self.expect("COLON", "':'")
                cty = self.parse_term()
                ctors.append((cname, cty))
                if self.peek().kind == "BAR":
                    self.next()
                    continue
                break
        self.expect("DOT", "'.'")
        return InductiveSrc(name, ty, tuple(ctors), plus, minus, kw.span)

    def parse_rule(self) -> RuleSrc:
        kw = self.next()
        lhs = self.parse_term()
        self.expect("RULEARROW", "'-->'")
        rhs = self.parse_term()
        env: tuple[tuple[str, Term], ...] | None = None
        rho: tuple[tuple[str, Term], ...] = ()
        if self.peek().kind == "KW" and self.peek().value == "in":
            self.next()
            bindings: list[tuple[str, Term]] = []
            while True:
                vname = self.expect_ident("variable").value
                self.expect("COLON", "':'")
                vty = self.parse_term()
                bindings.append((vname, vty))
                if self.peek().kind == "COMMA":
                    self.next()
                    continue
                break
            env = tuple(bindings)
        if self.peek().kind == "KW" and self.peek().value == "with":
            self.next()
            assigns: list[tuple[str, Term]] = []
            while True:
                vname = self.expect_ident("variable").value
                self.expect("EQUALS", "'='")
                image = self.parse_term()
                assigns.append((vname, image))
                if self.peek().kind == "COMMA":
                    self.next()
                    continue
                break
            rho = tuple(assigns)
        self.expect("DOT", "'.'")
        return RuleSrc(lhs, rhs, env, rho, kw.span)

    def parse_recursor(self) -> RecursorSrc:
        kw = self.next()
        name = self.expect_ident("recursor symbol").value
        tok = self.next()
        if not (tok.kind == "KW" and tok.value == "for"):
            raise ParseError("expected 'for'", tok.line, tok.col)
        target = self.expect_ident("target type").value
        self.expect("DOT", "'.'")
        return RecursorSrc(name, target, kw.span)

    def parse_pragma(self) -> Declaration:
        tok = self.next()
        if tok.value == "#fuel":
            steps = self.expect_int("step count")
            self.expect("DOT", "'.'")
            return FuelSrc(steps, tok.span)
        names = [self.expect_ident("symbol").value]
        while self.peek().kind == "IDENT":
            names.append(self.next().value)
        self.expect("DOT", "'.'")
        if len(names) < 2:
            raise ParseError("#equiv needs at least two symbols", tok.line, tok.col)
        return EquivSrc(tuple(names), tok.span)


def parse_source(text: str) -> SourceFile:
    return Parser(tokenize(text)).parse_source()


def parse_term_text(text: str) -> Term:
    parser = Parser(tokenize(text))
    t = parser.parse_term()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.value or tok.kind!r}", tok.line, tok.col)
    return t


# ---------------------------------------------------------------------------
# identifier resolution


def resolve(t: Term, declared, bound: frozenset[str] = frozenset()) -> Term:
    """Turn unbound identifiers that name declared symbols into symbols.

    ``declared`` is anything supporting ``in`` over symbol names.  Binders
    shadow symbols within their scope.
    """
    match t:
        case Sort() | Sym():
            return t
        case Var(name):
            return Sym(name) if name not in bound and name in declared else t
        case App(fn, arg):
            return App(resolve(fn, declared, bound), resolve(arg, declared, bound))
        case Abs(binder, annot, body):
            return Abs(binder, resolve(annot, declared, bound), resolve(body, declared, bound | {binder}))
        case Prod(binder, domain, codomain):
            return Prod(
                binder,
                resolve(domain, declared, bound),
                resolve(codomain, declared, bound | {binder}),
            )
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# printing


def _print_annotations(plus: tuple[int, ...], minus: tuple[int, ...]) -> str:
    items = [f"mon+ {i}" for i in plus] + [f"mon- {i}" for i in minus]
    return f" [{', '.join(items)}]" if items else ""


def print_declaration(decl: Declaration) -> str:
    match decl:
        case SymbolSrc(name, ty, plus, minus, _):
            return f"symbol {name} : {show(ty)}{_print_annotations(plus, minus)}."
        case InductiveSrc(name, ty, ctors, plus, minus, _):
            head = f"inductive {name}"
            if ty is not None:
                head += f" : {show(ty)}{_print_annotations(plus, minus)}"
            if ctors:
                body = " | ".join(f"{c} : {show(t)}" for c, t in ctors)
                return f"{head} := {body}."
            return f"{head}."
        case RuleSrc(lhs, rhs, env, rho, _):
            out = f"rule {show(lhs)} --> {show(rhs)}"
            if env is not None:
                out += " in " + ", ".join(f"{x}:{show(t)}" for x, t in env)
            if rho:
                out += " with " + ", ".join(f"{x}={show(t)}" for x, t in rho)
            return out + "."
        case RecursorSrc(name, target, _):
            return f"recursor {name} for {target}."
        case FuelSrc(steps, _):
            return f"#fuel {steps}."
        case EquivSrc(names, _):
            return f"#equiv {' '.join(names)}."
    raise TypeError(f"not a declaration: {decl!r}")


def print_source(source: SourceFile) -> str:
    return "\n".join(print_declaration(d) for d in source.declarations) + "\n"
