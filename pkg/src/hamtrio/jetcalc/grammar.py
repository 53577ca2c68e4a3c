"""Text grammar for expressions (shared with the definition-file parser).

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := atom (("^" | "**") unary)?
    atom    := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")" | matrix
    matrix  := "[" row ("," row)* "]"        row := "[" expr ("," expr)* "]"

Identifiers ``u1``, ``u2`` ... are fields; ``u1x``, ``u1xx`` or ``u1_3`` are
jets; ``Dx`` is the total-derivative operator (only meaningful to the
operator evaluator); ``sqrt`` is the only function; anything else is a
symbolic parameter unless an environment binds it.
"""

from __future__ import annotations

import re
from math import gcd, lcm
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from ..errors import ParseError
from .expression import REGISTRY, Expression, param, psi, sqrt, u

_TOKEN = re.compile(
    r"(?P<ws>[ \t]+)|(?P<num>\d+(?:\.\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^()\[\],=])"
)
_JET_X = re.compile(r"u(\d+)(x*)$")
_JET_K = re.compile(r"u(\d+)_(\d+)$")
_PSI = re.compile(r"psi(\d+)_(\d+)(?:(x*)|_(\d+))$")
RESERVED = {"Dx", "sqrt"}


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1, col0: int = 1) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), line, col0 + pos))
        pos = m.end()
    out.append(Token("end", "", line, col0 + pos))
    return out


# -- AST ---------------------------------------------------------------------

@dataclass
class Node:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)


@dataclass
class Num(Node):
    value: Fraction


@dataclass
class Name(Node):
    ident: str


@dataclass
class Call(Node):
    fn: str
    arg: Node


@dataclass
class Unary(Node):
    op: str
    operand: Node


@dataclass
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass
class Matrix(Node):
    rows: list


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def take(self, text: Optional[str] = None) -> Token:
        t = self.toks[self.i]
        if text is not None and t.text != text:
            found = t.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", t.line, t.col)
        self.i += 1
        return t

    def at(self, *texts: str) -> bool:
        t = self.peek()
        return t.kind == "op" and t.text in texts

    def expect_end(self) -> None:
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected {t.text!r}", t.line, t.col)

    def expr(self) -> Node:
        node = self.term()
        while self.at("+", "-"):
            t = self.take()
            node = Binary(t.text, node, self.term(), line=t.line, col=t.col)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at("*", "/"):
            t = self.take()
            node = Binary(t.text, node, self.unary(), line=t.line, col=t.col)
        return node

    def unary(self) -> Node:
        if self.at("-", "+"):
            t = self.take()
            return Unary(t.text, self.unary(), line=t.line, col=t.col)
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at("^", "**"):
            t = self.take()
            return Binary("^", base, self.unary(), line=t.line, col=t.col)
        return base

    def atom(self) -> Node:
        t = self.peek()
        if t.kind == "num":
            self.take()
            return Num(Fraction(t.text), line=t.line, col=t.col)
        if t.kind == "id":
            self.take()
            if self.at("("):
                self.take("(")
                arg = self.expr()
                self.take(")")
                if t.text != "sqrt":
                    raise ParseError(f"unknown function {t.text!r}", t.line, t.col)
                return Call(t.text, arg, line=t.line, col=t.col)
            return Name(t.text, line=t.line, col=t.col)
        if self.at("("):
            self.take("(")
            node = self.expr()
            self.take(")")
            return node
        if self.at("["):
            return self.matrix()
        found = t.text or "end of input"
        raise ParseError(f"unexpected {found!r}", t.line, t.col)

    def matrix(self) -> Matrix:
        t = self.take("[")
        rows = [self.row()]
        while self.at(","):
            self.take(",")
            rows.append(self.row())
        self.take("]")
        return Matrix(rows, line=t.line, col=t.col)

    def row(self) -> list:
        self.take("[")
        items = [self.expr()]
        while self.at(","):
            self.take(",")
            items.append(self.expr())
        self.take("]")
        return items


def parse_ast(text: str, line: int = 1, col0: int = 1) -> Node:
    p = Parser(tokenize(text, line, col0))
    node = p.expr()
    p.expect_end()
    return node


def jet_of(ident: str):
    """``(field, order)`` when ``ident`` names a field or jet variable."""
    m = _JET_X.match(ident)
    if m:
        return int(m.group(1)), len(m.group(2))
    m = _JET_K.match(ident)
    if m:
        return int(m.group(1)), int(m.group(2))
    return None


def name_to_expression(ident: str) -> Expression:
    jet = jet_of(ident)
    if jet is not None:
        return u(*jet)
    m = _PSI.match(ident)
    if m:
        order = len(m.group(3)) if m.group(4) is None else int(m.group(4))
        return psi(int(m.group(1)), int(m.group(2)), order)
    return param(ident)


def to_expression(node: Node, env: Optional[Mapping[str, Expression]] = None) -> Expression:
    """Evaluate an AST that denotes a scalar function."""
    env = env or {}
    if isinstance(node, Num):
        return Expression.const(node.value)
    if isinstance(node, Name):
        if node.ident in env:
            return env[node.ident]
        if node.ident in RESERVED:
            raise ParseError(f"{node.ident!r} is not a scalar expression", node.line, node.col)
        return name_to_expression(node.ident)
    if isinstance(node, Call):
        return sqrt(to_expression(node.arg, env))
    if isinstance(node, Unary):
        v = to_expression(node.operand, env)
        return -v if node.op == "-" else v
    if isinstance(node, Binary):
        a = to_expression(node.left, env)
        if node.op == "^":
            return a ** exponent_of(node.right)
        b = to_expression(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b.is_zero():
            raise ParseError("division by zero", node.line, node.col)
        return a / b
    raise ParseError("matrix where a scalar was expected", node.line, node.col)


def exponent_of(node: Node) -> int:
    sign = 1
    while isinstance(node, Unary):
        sign *= -1 if node.op == "-" else 1
        node = node.operand
    if isinstance(node, Num) and node.value.denominator == 1:
        return sign * int(node.value)
    raise ParseError("exponent must be an integer literal", node.line, node.col)


def parse_expression(text: str, env: Optional[Mapping[str, Expression]] = None) -> Expression:
    return to_expression(parse_ast(text), env)


# -- printing -------------------------------------------------------------------

def display_name(idx: int) -> str:
    v = REGISTRY.vars[idx]
    if v.kind == "u":
        if v.order == 0:
            return f"u{v.field}"
        return f"u{v.field}" + "x" * v.order if v.order <= 3 else f"u{v.field}_{v.order}"
    if v.kind == "psi":
        return f"psi{v.slot}_{v.field}" + ("x" * v.order if v.order <= 3 else f"_{v.order}")
    if v.kind == "sqrt":
        return f"sqrt({format_expression(REGISTRY.radicands[idx])})"
    return v.name


def _sorted_terms(p) -> list[tuple[list[tuple[str, int]], Fraction]]:
    terms = []
    for exps, c in p.terms():
        mono = sorted((display_name(i), int(e)) for i, e in enumerate(exps) if e)
        terms.append((mono, Fraction(int(c.p), int(c.q))))
    terms.sort(key=lambda t: (-sum(e for _, e in t[0]), [(n, -e) for n, e in t[0]]))
    return terms


def _format_mono(mono) -> str:
    parts = []
    for n, e in mono:
        if n.startswith("sqrt(") and e > 1:
            parts.append(f"{n}^{e}")
        else:
            parts.append(n if e == 1 else f"{n}^{e}")
    return "*".join(parts)


def _format_terms(terms) -> str:
    if not terms:
        return "0"
    out = []
    for k, (mono, c) in enumerate(terms):
        neg = c < 0
        a = abs(c)
        body = _format_mono(mono)
        if not body:
            s = str(a)
        elif a == 1:
            s = body
        else:
            s = f"{a}*{body}"
        if k == 0:
            out.append(("-" if neg else "") + s)
        else:
            out.append((" - " if neg else " + ") + s)
    return "".join(out)


def format_expression(e: Expression) -> str:
    n, d, _ = e.polys()
    if d.is_one():
        return _format_terms(_sorted_terms(n))
    nt = _sorted_terms(n)
    dt = _sorted_terms(d)
    # integer coefficients overall, content 1, first printed denominator term positive
    mult = 1
    for _, c in nt + dt:
        mult = lcm(mult, c.denominator)
    g = 0
    for _, c in nt + dt:
        g = gcd(g, (c * mult).numerator)
    scale = Fraction(mult, g)
    if dt[0][1] < 0:
        scale = -scale
    nt = [(m, c * scale) for m, c in nt]
    dt = [(m, c * scale) for m, c in dt]
    num_s = _format_terms(nt)
    den_s = _format_terms(dt)
    if len(nt) > 1:
        num_s = f"({num_s})"
    single = len(dt) == 1 and dt[0][1] == 1 and len(dt[0][0]) == 1
    if not single:
        den_s = f"({den_s})"
    return f"{num_s}/{den_s}"
