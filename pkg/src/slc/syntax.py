"""Lexer, parser and pretty-printer for LinLang.

LinLang is a small call-by-value functional language.  Its only way to
obtain a value of type ``Nonce`` is the ``new_nonce`` primitive; there is
no literal or coercion for it.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


NO_SPAN = Span(0, 0, 0)


class LexError(Exception):
    def __init__(self, message: str, span: Span):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


class ParseError(Exception):
    def __init__(self, message: str, span: Span, expected: frozenset[str] = frozenset()):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span
        self.expected = expected


# --------------------------------------------------------------------------
# Types

@dataclass(frozen=True)
class BaseType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Prod:
    left: "Type"
    right: "Type"

    def __str__(self) -> str:
        left = f"({self.left})" if isinstance(self.left, Fn) else str(self.left)
        right = f"({self.right})" if isinstance(self.right, (Fn, Prod)) else str(self.right)
        return f"{left} * {right}"


@dataclass(frozen=True)
class Fn:
    arg: "Type"
    ret: "Type"

    def __str__(self) -> str:
        arg = f"({self.arg})" if isinstance(self.arg, Fn) else str(self.arg)
        return f"{arg} -> {self.ret}"


Type = Union[BaseType, Prod, Fn]

UNIT = BaseType("Unit")
BOOL = BaseType("Bool")
INT = BaseType("Int")
NONCE = BaseType("Nonce")

BASE_TYPES = {t.name: t for t in (UNIT, BOOL, INT, NONCE)}


# --------------------------------------------------------------------------
# Terms

class PrimOp(enum.Enum):
    NEW_NONCE = "new_nonce"
    NONCE_GET = "nonce_get"
    ENCRYPT = "encrypt"
    INT_EQ = "eq"
    INT_ADD = "add"


PRIM_NAMES = {op.value: op for op in PrimOp}


def _span():
    return field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class UnitLit:
    span: Span = _span()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: Span = _span()


@dataclass(frozen=True)
class IntLit:
    value: int
    span: Span = _span()


@dataclass(frozen=True)
class Lambda:
    param: str
    annot: Type
    body: "Term"
    span: Span = _span()
    param_span: Span = _span()


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Pair:
    first: "Term"
    second: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class LetPair:
    n1: str
    n2: str
    bound: "Term"
    body: "Term"
    span: Span = _span()
    n1_span: Span = _span()
    n2_span: Span = _span()


@dataclass(frozen=True)
class Let:
    name: str
    bound: "Term"
    body: "Term"
    span: Span = _span()
    name_span: Span = _span()


@dataclass(frozen=True)
class If:
    cond: "Term"
    then: "Term"
    else_: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Seq:
    first: "Term"
    second: "Term"
    span: Span = _span()


@dataclass(frozen=True)
class Prim:
    op: PrimOp
    args: tuple["Term", ...]
    span: Span = _span()


Term = Union[Var, UnitLit, BoolLit, IntLit, Lambda, App, Pair, LetPair, Let, If, Seq, Prim]


def children(term: Term) -> tuple[Term, ...]:
    """Immediate subterms in left-to-right source order."""
    if isinstance(term, Lambda):
        return (term.body,)
    if isinstance(term, App):
        return (term.fn, term.arg)
    if isinstance(term, Pair):
        return (term.first, term.second)
    if isinstance(term, (Let, LetPair)):
        return (term.bound, term.body)
    if isinstance(term, If):
        return (term.cond, term.then, term.else_)
    if isinstance(term, Seq):
        return (term.first, term.second)
    if isinstance(term, Prim):
        return term.args
    return ()


def walk(term: Term):
    """Pre-order traversal."""
    stack = [term]
    while stack:
        t = stack.pop()
        yield t
        stack.extend(reversed(children(t)))


def free_vars(term: Term) -> list[Var]:
    """Free variable occurrences, in textual order (duplicates kept)."""
    out: list[Var] = []

    def go(t: Term, bound: frozenset[str]) -> None:
        if isinstance(t, Var):
            if t.name not in bound:
                out.append(t)
        elif isinstance(t, Lambda):
            go(t.body, bound | {t.param})
        elif isinstance(t, Let):
            go(t.bound, bound)
            go(t.body, bound | {t.name})
        elif isinstance(t, LetPair):
            go(t.bound, bound)
            go(t.body, bound | {t.n1, t.n2})
        else:
            for c in children(t):
                go(c, bound)

    go(term, frozenset())
    return out


# --------------------------------------------------------------------------
# Lexer

KEYWORDS = {"let", "in", "if", "then", "else", "fun", "true", "false"}

PUNCT = {
    "->": "ARROW",
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
    ";": "SEMI",
    ":": "COLON",
    "*": "STAR",
    "=": "EQ",
}

INT64_MAX = 2**63 - 1

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<comment>\#[^\n]*)"
    r"|(?P<ident>[a-z][a-zA-Z0-9_]*)"
    r"|(?P<upper>[A-Z][a-zA-Z0-9_]*)"
    r"|(?P<int>[0-9]+)"
    r"|(?P<punct>->|[(),;:*=])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span
    offset: int
    value: object = None

    def __repr__(self) -> str:
        if self.kind in ("IDENT", "INT", "PRIM", "TYPE"):
            return f"{self.kind}({self.text})"
        return self.kind


def tokenize(source: str) -> list[Token]:
    """Split source text into tokens; ``#`` starts a comment to end of line."""
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise LexError(f"unexpected character {source[pos]!r}", Span(line, col, 1))
        kind = m.lastgroup
        text = m.group()
        span = Span(line, col, len(text))
        if kind == "ws":
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = pos + text.rindex("\n") + 1
        elif kind == "ident":
            if text in KEYWORDS:
                tokens.append(Token(text.upper(), text, span, pos))
            elif text in PRIM_NAMES:
                tokens.append(Token("PRIM", text, span, pos, PRIM_NAMES[text]))
            else:
                tokens.append(Token("IDENT", text, span, pos, text))
        elif kind == "upper":
            if text not in BASE_TYPES:
                raise LexError(f"unknown type name {text!r}", span)
            tokens.append(Token("TYPE", text, span, pos, BASE_TYPES[text]))
        elif kind == "int":
            value = int(text)
            if value > INT64_MAX:
                raise LexError("integer literal out of 64-bit range", span)
            tokens.append(Token("INT", text, span, pos, value))
        elif kind == "punct":
            tokens.append(Token(PUNCT[text], text, span, pos))
        pos = m.end()
    return tokens


# --------------------------------------------------------------------------
# Parser

_ATOM_START = {"IDENT", "INT", "TRUE", "FALSE", "LPAREN", "PRIM"}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.live: list[str] = []

    # token helpers

    def peek(self, k: int = 0) -> Token | None:
        i = self.pos + k
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, kind: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind

    def error(self, expected: set[str]) -> ParseError:
        tok = self.peek()
        exp = frozenset(expected)
        want = ", ".join(sorted(exp))
        if tok is None:
            if self.tokens:
                last = self.tokens[-1]
                span = Span(last.span.line, last.span.column + last.span.length, 1)
            else:
                span = Span(1, 1, 1)
            return ParseError(f"unexpected end of input, expected {want}", span, exp)
        return ParseError(f"unexpected {tok.text!r}, expected {want}", tok.span, exp)

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            raise self.error({kind})
        self.pos += 1
        return tok

    def span_from(self, start: Token) -> Span:
        last = self.tokens[self.pos - 1]
        end = last.offset + len(last.text)
        return Span(start.span.line, start.span.column, end - start.offset)

    def bind(self, tok: Token) -> None:
        if tok.text in self.live:
            raise ParseError("shadowing not permitted", tok.span, frozenset())
        self.live.append(tok.text)

    def unbind(self, *names: str) -> None:
        for name in names:
            self.live.remove(name)

    # grammar

    def program(self) -> Term:
        term = self.expr()
        if self.peek() is not None:
            raise self.error({"end of input"})
        return term

    def expr(self) -> Term:
        tok = self.peek()
        if tok is None:
            raise self.error({"expression"})
        if tok.kind == "LET":
            if self.peek(1) is not None and self.peek(1).kind == "LPAREN":
                return self.let_pair()
            return self.let()
        if tok.kind == "FUN":
            return self.lambda_()
        if tok.kind == "IF":
            return self.if_()
        return self.seq()

    def let(self) -> Term:
        start = self.expect("LET")
        name = self.expect("IDENT")
        self.expect("EQ")
        bound = self.expr()
        self.expect("IN")
        self.bind(name)
        body = self.expr()
        self.unbind(name.text)
        return Let(name.text, bound, body, self.span_from(start), name.span)

    def let_pair(self) -> Term:
        start = self.expect("LET")
        self.expect("LPAREN")
        n1 = self.expect("IDENT")
        self.expect("COMMA")
        n2 = self.expect("IDENT")
        self.expect("RPAREN")
        self.expect("EQ")
        bound = self.expr()
        self.expect("IN")
        self.bind(n1)
        self.bind(n2)
        body = self.expr()
        self.unbind(n1.text, n2.text)
        return LetPair(n1.text, n2.text, bound, body, self.span_from(start), n1.span, n2.span)

    def lambda_(self) -> Term:
        start = self.expect("FUN")
        param = self.expect("IDENT")
        self.expect("COLON")
        # A bare arrow here would be ambiguous with the body arrow;
        # function-typed parameters need parentheses.
        annot = self.prod_type()
        self.expect("ARROW")
        self.bind(param)
        body = self.expr()
        self.unbind(param.text)
        return Lambda(param.text, annot, body, self.span_from(start), param.span)

    def if_(self) -> Term:
        start = self.expect("IF")
        cond = self.expr()
        self.expect("THEN")
        then = self.expr()
        self.expect("ELSE")
        else_ = self.expr()
        return If(cond, then, else_, self.span_from(start))

    def seq(self) -> Term:
        starts = [self.peek()]
        parts = [self.app()]
        while self.at("SEMI"):
            self.pos += 1
            starts.append(self.peek())
            parts.append(self.app())
        term = parts[-1]
        for start, part in zip(reversed(starts[:-1]), reversed(parts[:-1])):
            term = Seq(part, term, self.span_from(start))
        return term

    def app(self) -> Term:
        start = self.peek()
        term = self.atom()
        while self.peek() is not None and self.peek().kind in _ATOM_START:
            arg = self.atom()
            term = App(term, arg, self.span_from(start))
        return term

    def atom(self) -> Term:
        tok = self.peek()
        if tok is None or tok.kind not in _ATOM_START:
            raise self.error(_ATOM_START)
        self.pos += 1
        if tok.kind == "IDENT":
            return Var(tok.text, tok.span)
        if tok.kind == "INT":
            return IntLit(tok.value, tok.span)
        if tok.kind == "TRUE":
            return BoolLit(True, tok.span)
        if tok.kind == "FALSE":
            return BoolLit(False, tok.span)
        if tok.kind == "PRIM":
            lparen = self.expect("LPAREN")
            args: list[Term] = []
            if self.at("RPAREN"):
                rparen = self.expect("RPAREN")
                # `op()` is sugar for `op(())`
                args.append(UnitLit(Span(lparen.span.line, lparen.span.column,
                                         rparen.offset + 1 - lparen.offset)))
            else:
                args.append(self.expr())
                while self.at("COMMA"):
                    self.pos += 1
                    args.append(self.expr())
                self.expect("RPAREN")
            return Prim(tok.value, tuple(args), self.span_from(tok))
        # LPAREN
        if self.at("RPAREN"):
            self.pos += 1
            return UnitLit(self.span_from(tok))
        inner = self.expr()
        if self.at("COMMA"):
            self.pos += 1
            second = self.expr()
            self.expect("RPAREN")
            return Pair(inner, second, self.span_from(tok))
        if not self.at("RPAREN"):
            raise self.error({"RPAREN", "COMMA"})
        self.pos += 1
        return inner

    # types

    def type_(self) -> Type:
        left = self.prod_type()
        if self.at("ARROW"):
            self.pos += 1
            return Fn(left, self.type_())
        return left

    def prod_type(self) -> Type:
        ty = self.type_atom()
        while self.at("STAR"):
            self.pos += 1
            ty = Prod(ty, self.type_atom())
        return ty

    def type_atom(self) -> Type:
        tok = self.peek()
        if tok is not None and tok.kind == "TYPE":
            self.pos += 1
            return tok.value
        if tok is not None and tok.kind == "LPAREN":
            self.pos += 1
            ty = self.type_()
            self.expect("RPAREN")
            return ty
        raise self.error({"TYPE", "LPAREN"})


def parse(tokens: list[Token]) -> Term:
    """Parse a token sequence into a Term; raises ParseError."""
    parser = _Parser(tokens)
    try:
        return parser.program()
    except RecursionError:
        tok = parser.peek() or (tokens[-1] if tokens else None)
        span = tok.span if tok else Span(1, 1, 1)
        raise ParseError("expression nested too deeply", span) from None


def parse_source(source: str | bytes) -> Term:
    """Tokenize and parse; raises only LexError or ParseError."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise LexError("source is not valid UTF-8", _offset_span(source, exc.start)) from None
    return parse(tokenize(source))


def _offset_span(data: bytes, offset: int) -> Span:
    prefix = data[:offset]
    line = prefix.count(b"\n") + 1
    col = offset - (prefix.rfind(b"\n") + 1) + 1
    return Span(line, col, 1)


# --------------------------------------------------------------------------
# Pretty-printer

_EXPR, _SEQ, _APP, _ATOM = range(4)


def _level(term: Term) -> int:
    if isinstance(term, (Let, LetPair, Lambda, If)):
        return _EXPR
    if isinstance(term, Seq):
        return _SEQ
    if isinstance(term, App):
        return _APP
    return _ATOM


def pretty(term: Term, level: int = _EXPR) -> str:
    """Render a term as source text that parses back to an equal term."""
    if _level(term) < level:
        return f"({pretty(term)})"
    if isinstance(term, Var):
        return term.name
    if isinstance(term, UnitLit):
        return "()"
    if isinstance(term, BoolLit):
        return "true" if term.value else "false"
    if isinstance(term, IntLit):
        return str(term.value)
    if isinstance(term, Lambda):
        annot = f"({term.annot})" if isinstance(term.annot, Fn) else str(term.annot)
        return f"fun {term.param}: {annot} -> {pretty(term.body)}"
    if isinstance(term, App):
        return f"{pretty(term.fn, _APP)} {pretty(term.arg, _ATOM)}"
    if isinstance(term, Pair):
        return f"({pretty(term.first)}, {pretty(term.second)})"
    if isinstance(term, Let):
        return f"let {term.name} = {pretty(term.bound)} in {pretty(term.body)}"
    if isinstance(term, LetPair):
        return f"let ({term.n1}, {term.n2}) = {pretty(term.bound)} in {pretty(term.body)}"
    if isinstance(term, If):
        return f"if {pretty(term.cond)} then {pretty(term.then)} else {pretty(term.else_)}"
    if isinstance(term, Seq):
        return f"{pretty(term.first, _APP)}; {pretty(term.second, _SEQ)}"
    if isinstance(term, Prim):
        if term.args == (UnitLit(),):
            return f"{term.op.value}()"
        return f"{term.op.value}({', '.join(pretty(a) for a in term.args)})"
    raise TypeError(f"not a term: {term!r}")
