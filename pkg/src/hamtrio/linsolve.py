"""Exact sparse-to-dense linear algebra over QQ (flint fmpq_mat)."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import flint

from .jetcalc import Expression


def _q(x) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    if isinstance(x, Fraction):
        return flint.fmpq(x.numerator, x.denominator)
    return flint.fmpq(x)


def _frac(x: flint.fmpq) -> Fraction:
    return Fraction(int(x.p), int(x.q))


def rref(rows: Sequence[Mapping[int, object]], ncols: int):
    """Reduced row echelon form of sparse rows; returns (dense rows, pivot columns)."""
    rows = [r for r in rows if any(v != 0 for v in r.values())]
    if not rows:
        return [], []
    M = flint.fmpq_mat(len(rows), ncols)
    for i, r in enumerate(rows):
        for j, v in r.items():
            M[i, j] = _q(v)
    R, rank = M.rref()
    dense = []
    pivots = []
    for i in range(rank):
        row = [R[i, j] for j in range(ncols)]
        piv = next(j for j, v in enumerate(row) if v != 0)
        pivots.append(piv)
        dense.append([_frac(v) for v in row])
    return dense, pivots


def nullspace(rows: Sequence[Mapping[int, object]], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : A x = 0}, one vector per free column (free entry = 1)."""
    dense, pivots = rref(rows, ncols)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(dense, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def rank(rows: Sequence[Mapping[int, object]], ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def solve(rows: Sequence[Mapping[int, object]], rhs: Sequence, ncols: int):
    """One particular solution of A x = b, or None when inconsistent."""
    aug = []
    for r, b in zip(rows, rhs):
        d = dict(r)
        if b != 0:
            d[ncols] = b
        aug.append(d)
    dense, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(dense, pivots):
        x[p] = row[ncols]
    return x


def same_span(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    """Do two lists of coefficient vectors span the same subspace?"""
    ncols = max((len(v) for v in list(a) + list(b)), default=0)

    def as_rows(vs):
        return [{j: x for j, x in enumerate(v) if x != 0} for v in vs]

    ra = rank(as_rows(a), ncols)
    rb = rank(as_rows(b), ncols)
    return ra == rb == rank(as_rows(list(a) + list(b)), ncols)


def monomial_rows(exprs: Iterable[Sequence[Expression]], ncols: int) -> list[dict]:
    """Turn ``sum_n x_n * exprs[n] == 0`` into linear equations.

    ``exprs`` is indexed [unknown][component]; each component identity is
    cleared of denominators and split by monomials of all its variables.
    """
    exprs = list(exprs)
    ncomp = max((len(e) for e in exprs), default=0)
    rows: list[dict] = []
    for c in range(ncomp):
        col_terms = [(n, e[c]) for n, e in enumerate(exprs) if c < len(e) and not e[c].is_zero()]
        if not col_terms:
            continue
        den = None
        for _, e in col_terms:
            d = e.polys()[1]
            den = d if den is None else _lcm(den, d)
        buckets: dict[tuple, dict[int, flint.fmpq]] = {}
        for n, e in col_terms:
            num, d, _ = e.polys()
            scaled = num * (den / d) if not d.is_one() or not den.is_one() else num
            for exps, coeff in scaled.terms():
                key = tuple(int(x) for x in exps)
                slot = buckets.setdefault(key, {})
                slot[n] = slot.get(n, 0) + coeff
        rows.extend(buckets.values())
    return rows


def _lcm(a, b):
    g = a.gcd(b)
    return a * (b / g)
