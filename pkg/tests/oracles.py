"""Independent sympy implementations used as test oracles.

Nothing here calls into the hamtrio kernel except ``to_sympy``, which goes
through the printed form of an expression.
"""

from __future__ import annotations

import re

import sympy as sp

from hamtrio.jetcalc import format_expression

_JET = re.compile(r"^u(\d+)(?:(x*)|_(\d+))$")


def jet_symbol(i: int, k: int = 0) -> sp.Symbol:
    return sp.Symbol(f"u{i}" + ("x" * k if k <= 3 else f"_{k}"))


def parse_jet(sym: sp.Symbol):
    m = _JET.match(sym.name)
    if not m:
        return None
    k = len(m.group(2)) if m.group(3) is None else int(m.group(3))
    return int(m.group(1)), k


def to_sympy(e) -> sp.Expr:
    text = format_expression(e).replace("^", "**")
    names = set(re.findall(r"[A-Za-z_][A-Za-z0-9_]*", text)) - {"sqrt"}
    return sp.sympify(text, locals={n: sp.Symbol(n) for n in names})


def total_derivative(f: sp.Expr) -> sp.Expr:
    out = sp.Integer(0)
    for s in f.free_symbols:
        jet = parse_jet(s)
        if jet is not None:
            out += sp.diff(f, s) * jet_symbol(jet[0], jet[1] + 1)
    return out


def euler(f: sp.Expr, i: int) -> sp.Expr:
    orders = [parse_jet(s)[1] for s in f.free_symbols if parse_jet(s) and parse_jet(s)[0] == i]
    out = sp.Integer(0)
    for k in range(max(orders, default=-1) + 1):
        term = sp.diff(f, jet_symbol(i, k))
        for _ in range(k):
            term = -total_derivative(term)
        out += term
    return out


def same(a, b) -> bool:
    return sp.simplify(sp.together(to_sympy(a) - (b if isinstance(b, sp.Expr) else to_sympy(b)))) == 0


def riemann_contravariant(g_up) -> list:
    """All R^i_{jkl} of the metric whose inverse is ``g_up`` (textbook formulas)."""
    m = len(g_up)
    us = [jet_symbol(i + 1) for i in range(m)]
    G = sp.Matrix(g_up).inv()
    Gi = sp.Matrix(g_up)
    chr_ = [[[sp.simplify(sum(Gi[i, l] * (sp.diff(G[l, j], us[k]) + sp.diff(G[l, k], us[j]) - sp.diff(G[j, k], us[l]))
                              for l in range(m)) / 2)
              for k in range(m)] for j in range(m)] for i in range(m)]
    out = []
    for i in range(m):
        for j in range(m):
            for k in range(m):
                for l in range(m):
                    r = sp.diff(chr_[i][l][j], us[k]) - sp.diff(chr_[i][k][j], us[l])
                    r += sum(chr_[i][k][p] * chr_[p][l][j] - chr_[i][l][p] * chr_[p][k][j] for p in range(m))
                    out.append(sp.simplify(r))
    return out


def is_flat(g_up) -> bool:
    return all(r == 0 for r in riemann_contravariant(g_up))
