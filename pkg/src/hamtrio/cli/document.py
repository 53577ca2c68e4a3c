"""Definition files: fields, parameters, expressions, metrics, operators, trios, functionals.

Grammar, one statement per line (``#`` starts a comment)::

    document   := statement*
    statement  := "fields" IDENT+ | "params" IDENT+
                | "expr" IDENT "=" expr
                | "metric" IDENT "=" matrix
                | "op" IDENT "=" opexpr
                | "trio" IDENT "=" IDENT "," IDENT "," IDENT
                | "functional" IDENT "=" expr
    opexpr     := expr, where Dx is the total derivative, products are compositions
                  and a matrix entry may itself be an operator

A scalar operator times a matrix composes with every entry, so the sandwich
form ``Dx * [[...]] * Dx`` is written literally.  Identifiers that are not
fields, jets, declared parameters or earlier names are errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from ..diffop import MatrixDiffOp, ScalarDiffOp, compose_matrix, format_scalar
from ..errors import DimensionMismatch, ParseError
from ..geometry import Metric
from ..jetcalc import Expression, format_expression, param, sqrt, u
from ..jetcalc.grammar import (
    Binary,
    Call,
    Matrix,
    Name,
    Node,
    Num,
    Unary,
    exponent_of,
    jet_of,
    parse_ast,
)

Value = Union[Expression, ScalarDiffOp, MatrixDiffOp]

_STATEMENT = re.compile(r"\s*(fields|params|expr|metric|op|trio|functional)\b\s*(.*)$")
_BINDING = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")
KEYWORDS = ("fields", "params", "expr", "metric", "op", "trio", "functional")


@dataclass
class Entry:
    kind: str
    name: str
    value: object
    line: int


@dataclass
class Document:
    m: int = 0
    params: list = field(default_factory=list)
    entries: dict = field(default_factory=dict)  # name -> Entry, in declaration order
    source: str = "<string>"

    def names(self, kind: Optional[str] = None) -> list[str]:
        return [n for n, e in self.entries.items() if kind is None or e.kind == kind]

    def get(self, name: str, kind: Optional[str] = None):
        e = self.entries.get(name)
        if e is None or (kind is not None and e.kind != kind):
            what = kind or "name"
            raise KeyError(f"no {what} {name!r} in {self.source}")
        return e.value

    def operator(self, name: str) -> MatrixDiffOp:
        return self.get(name, "op")

    def metric(self, name: str) -> Metric:
        return self.get(name, "metric")

    def trio(self, name: str) -> tuple:
        return tuple(self.operator(n) for n in self.get(name, "trio"))

    def functional(self, name: str) -> Expression:
        return self.get(name, "functional")

    def pretty(self) -> str:
        lines = ["fields " + " ".join(f"u{i + 1}" for i in range(self.m))]
        if self.params:
            lines.append("params " + " ".join(self.params))
        for name, e in self.entries.items():
            if e.kind in ("expr", "functional"):
                lines.append(f"{e.kind} {name} = {format_expression(e.value)}")
            elif e.kind == "metric":
                rows = ", ".join("[" + ", ".join(format_expression(x) for x in r) + "]" for r in e.value.g)
                lines.append(f"metric {name} = [{rows}]")
            elif e.kind == "op":
                lines.append(f"op {name} = {format_matrix(e.value)}")
            else:
                lines.append(f"trio {name} = " + ", ".join(e.value))
        return "\n".join(lines) + "\n"


def format_matrix(P: MatrixDiffOp) -> str:
    return "[" + ", ".join("[" + ", ".join(format_scalar(e) for e in row) + "]" for row in P.entries) + "]"


# -- operator evaluation --------------------------------------------------------------

def _mult(e: Expression) -> ScalarDiffOp:
    return ScalarDiffOp({0: e}) if not e.is_zero() else ScalarDiffOp()


def _as_scalar_op(v: Value, node: Node) -> ScalarDiffOp:
    if isinstance(v, Expression):
        return _mult(v)
    if isinstance(v, ScalarDiffOp):
        return v
    raise ParseError("matrix inside a matrix entry", node.line, node.col)


def _entrywise(S: ScalarDiffOp, M: MatrixDiffOp, left: bool) -> MatrixDiffOp:
    return MatrixDiffOp([[S * e if left else e * S for e in row] for row in M.entries])


def _add(a: Value, b: Value, node: Node) -> Value:
    if isinstance(a, Expression) and isinstance(b, Expression):
        return a + b
    if isinstance(a, MatrixDiffOp) and isinstance(b, MatrixDiffOp):
        if a.m != b.m:
            raise DimensionMismatch(f"{node.line}:{node.col}: adding operators of sizes {a.m} and {b.m}")
        return a + b
    if isinstance(a, MatrixDiffOp) or isinstance(b, MatrixDiffOp):
        raise DimensionMismatch(f"{node.line}:{node.col}: adding a matrix and a scalar")
    return _as_scalar_op(a, node) + _as_scalar_op(b, node)


def _mul(a: Value, b: Value, node: Node) -> Value:
    if isinstance(a, Expression) and isinstance(b, Expression):
        return a * b
    if isinstance(a, MatrixDiffOp) and isinstance(b, MatrixDiffOp):
        if a.m != b.m:
            raise DimensionMismatch(f"{node.line}:{node.col}: composing operators of sizes {a.m} and {b.m}")
        return compose_matrix(a, b)
    if isinstance(b, MatrixDiffOp):
        return _entrywise(_as_scalar_op(a, node), b, left=True)
    if isinstance(a, MatrixDiffOp):
        return _entrywise(_as_scalar_op(b, node), a, left=False)
    return _as_scalar_op(a, node) * _as_scalar_op(b, node)


def _power(a: Value, n: int, node: Node) -> Value:
    if isinstance(a, Expression):
        return a ** n
    if n < 0:
        raise ParseError("negative power of an operator", node.line, node.col)
    if isinstance(a, ScalarDiffOp):
        out = ScalarDiffOp({0: Expression.const(1)})
    else:
        out = MatrixDiffOp.identity(a.m)
    for _ in range(n):
        out = _mul(out, a, node)
    return out


class Scope:
    """Name resolution for one document (``strict=False`` makes unknown names parameters)."""

    def __init__(self, m: Optional[int], params=(), values: Optional[Mapping[str, Value]] = None,
                 strict: bool = True):
        self.m = m
        self.params = set(params)
        self.values = dict(values or {})
        self.strict = strict

    def lookup(self, node: Name) -> Value:
        ident = node.ident
        if ident == "Dx":
            return ScalarDiffOp.dx(1)
        if ident in self.values:
            return self.values[ident]
        jet = jet_of(ident)
        if jet is not None:
            if self.m is not None and not 1 <= jet[0] <= self.m:
                raise ParseError(f"unknown identifier {ident!r} (fields are u1..u{self.m})", node.line, node.col)
            return u(*jet)
        if ident in self.params or not self.strict:
            return param(ident)
        raise ParseError(f"unknown identifier {ident!r}", node.line, node.col)


def evaluate(node: Node, scope: Scope) -> Value:
    if isinstance(node, Num):
        return Expression.const(node.value)
    if isinstance(node, Name):
        return scope.lookup(node)
    if isinstance(node, Call):
        arg = evaluate(node.arg, scope)
        if not isinstance(arg, Expression):
            raise ParseError("sqrt of an operator", node.line, node.col)
        return sqrt(arg)
    if isinstance(node, Unary):
        v = evaluate(node.operand, scope)
        return v if node.op == "+" else _neg(v)
    if isinstance(node, Matrix):
        rows = [[_as_scalar_op(evaluate(x, scope), x) for x in row] for row in node.rows]
        if any(len(r) != len(rows) for r in rows):
            raise DimensionMismatch(f"{node.line}:{node.col}: matrix is not square")
        return MatrixDiffOp(rows)
    if isinstance(node, Binary):
        a = evaluate(node.left, scope)
        if node.op == "^":
            return _power(a, exponent_of(node.right), node)
        b = evaluate(node.right, scope)
        if node.op == "+":
            return _add(a, b, node)
        if node.op == "-":
            return _add(a, _neg(b), node)
        if node.op == "*":
            return _mul(a, b, node)
        if not (isinstance(a, Expression) and isinstance(b, Expression)):
            raise ParseError("division by an operator", node.line, node.col)
        if b.is_zero():
            raise ParseError("division by zero", node.line, node.col)
        return a / b
    raise ParseError("unsupported syntax", node.line, node.col)


def _neg(v: Value) -> Value:
    return v.scale(Expression.const(-1)) if isinstance(v, (ScalarDiffOp, MatrixDiffOp)) else -v


def _to_operator(v: Value, m: Optional[int], node: Node) -> MatrixDiffOp:
    if isinstance(v, Expression):
        v = _mult(v)
    if isinstance(v, ScalarDiffOp):
        v = MatrixDiffOp([[v]])
    if m is not None and v.m != m:
        raise DimensionMismatch(f"{node.line}:{node.col}: operator of size {v.m}, document has {m} fields")
    return v


def parse_operator_text(text: str, env: Optional[Mapping[str, Value]] = None, m: Optional[int] = None) -> Value:
    """Evaluate one operator expression with free parameters allowed."""
    return evaluate(parse_ast(text), Scope(m, values=env, strict=False))


# -- documents ------------------------------------------------------------------------

def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def parse(source: str, name: str = "<string>") -> Document:
    doc = Document(source=name)
    scope = Scope(None)
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        m = _STATEMENT.match(line)
        if not m:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError(f"expected one of {', '.join(KEYWORDS)}", lineno, col)
        kw, rest = m.group(1), m.group(2)
        col0 = m.start(2) + 1
        if kw in ("fields", "params"):
            idents = rest.replace(",", " ").split()
            if kw == "fields":
                _declare_fields(doc, scope, idents, lineno, col0)
            else:
                for p in idents:
                    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", p) or jet_of(p) or p == "Dx":
                        raise ParseError(f"bad parameter name {p!r}", lineno, col0)
                    if p not in doc.params:
                        doc.params.append(p)
                    scope.params.add(p)
            continue
        if doc.m == 0:
            raise ParseError("declare fields first", lineno, 1)
        b = _BINDING.match(rest)
        if not b:
            raise ParseError(f"expected NAME = ... after {kw!r}", lineno, col0)
        ident, body = b.group(1), b.group(2)
        bcol = col0 + b.start(2)
        if ident in doc.entries or ident in scope.values:
            raise ParseError(f"{ident!r} is already defined", lineno, col0)
        if ident == "Dx" or jet_of(ident) is not None or ident in scope.params:
            raise ParseError(f"{ident!r} is reserved", lineno, col0)
        if kw == "trio":
            parts = [p.strip() for p in body.split(",")]
            if len(parts) != 3:
                raise ParseError("a trio names three operators", lineno, bcol)
            for p in parts:
                if p not in doc.entries or doc.entries[p].kind != "op":
                    raise ParseError(f"unknown operator {p!r}", lineno, bcol + body.find(p))
            doc.entries[ident] = Entry(kw, ident, tuple(parts), lineno)
            continue
        node = parse_ast(body, lineno, bcol)
        value = evaluate(node, scope)
        if kw in ("expr", "functional"):
            if not isinstance(value, Expression):
                raise ParseError(f"{kw} must be a scalar function", lineno, bcol)
            if kw == "expr":
                scope.values[ident] = value
        elif kw == "metric":
            if not isinstance(value, MatrixDiffOp) or value.order() > 0:
                raise ParseError("a metric is a matrix of functions", lineno, bcol)
            if value.m != doc.m:
                raise DimensionMismatch(f"{lineno}:{bcol}: metric of size {value.m}, document has {doc.m} fields")
            try:
                value = Metric([[value.coeff(i, j, 0) for j in range(value.m)] for i in range(value.m)])
            except ValueError as exc:
                raise ParseError(str(exc), lineno, bcol) from None
        else:
            value = _to_operator(value, doc.m, node)
            scope.values[ident] = value
        doc.entries[ident] = Entry(kw, ident, value, lineno)
    if doc.m == 0:
        raise ParseError("no fields declared", 1, 1)
    return doc


def _declare_fields(doc: Document, scope: Scope, idents, lineno: int, col: int) -> None:
    if doc.m:
        raise ParseError("fields declared twice", lineno, col)
    expected = [f"u{i + 1}" for i in range(len(idents))]
    if not idents or idents != expected:
        raise ParseError("fields must be u1 u2 ... in order", lineno, col)
    doc.m = len(idents)
    scope.m = doc.m


def load(path) -> Document:
    from pathlib import Path

    p = Path(path)
    return parse(p.read_text(encoding="utf-8"), p.name)
