"""Hamiltonian and compatibility tests through the Schouten bracket.

The bracket of two skew-adjoint operators is represented by the integrand

    T = sum_cyclic psi_1 . D_P[Q psi_2](psi_3) + (P <-> Q)

in three formal test covectors; [P, Q] = 0 iff T is a total derivative.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .diffop import MatrixDiffOp, ScalarDiffOp, _DerivCache, apply
from .errors import HamtrioError, NotSkewAdjoint
from .geometry import Metric, connection_of, is_flat, levi_civita_residuals
from .jetcalc import Expression, euler, jet_order, psi, u
from .jetcalc.calculus import dependent_variables
from .jetcalc.expression import REGISTRY

BRACKET_JET_CAP = 24


def covector(a: int, m: int) -> list[Expression]:
    """Test covector psi_a = (psi_{a,1}, ..., psi_{a,m})."""
    return [psi(a, i + 1) for i in range(m)]


def _prolonged_derivative(coef: Expression, X: Sequence[_DerivCache]) -> Expression:
    """pr X (coef) = sum_{i,k} d coef / d u^i_(k) * D_x^k X^i."""
    out = Expression.const(0)
    for idx in coef.deep_variables():
        v = REGISTRY.vars[idx]
        if v.kind != "u":
            continue
        out = out + coef.diff(idx) * X[v.field - 1][v.order]
    return out


def directional_derivative(P: MatrixDiffOp, X: Sequence) -> MatrixDiffOp:
    """D_P[X]: the operator with every coefficient differentiated along X."""
    caches = [x if isinstance(x, _DerivCache) else _DerivCache(Expression.coerce(x)) for x in X]
    rows = []
    for row in P.entries:
        new = []
        for e in row:
            new.append(ScalarDiffOp({k: _prolonged_derivative(a, caches) for k, a in e.coeffs.items()}))
        rows.append(new)
    return MatrixDiffOp(rows)


def _pairing(a: Sequence[Expression], b: Sequence[Expression]) -> Expression:
    out = Expression.const(0)
    for x, y in zip(a, b):
        out = out + x * y
    return out


def _half(P: MatrixDiffOp, Q: MatrixDiffOp, psis) -> Expression:
    total = Expression.const(0)
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        X = apply(Q, psis[b])
        DP = directional_derivative(P, X)
        total = total + _pairing(psis[a], apply(DP, psis[c]))
    return total


def _require_skew(*ops: MatrixDiffOp) -> None:
    for P in ops:
        if not P.is_skew_adjoint():
            raise NotSkewAdjoint("operator is not skew-adjoint")


def schouten_integrand(P: MatrixDiffOp, Q: MatrixDiffOp, *, check: bool = True) -> Expression:
    """Trivector integrand of [P, Q]; a total derivative iff the bracket vanishes."""
    if P.m != Q.m:
        raise ValueError("operators of different size")
    if check:
        _require_skew(P, Q)
    m = P.m
    psis = [covector(a, m) for a in (1, 2, 3)]
    with jet_order(BRACKET_JET_CAP):
        T = _half(P, Q, psis)
        if P is not Q:
            T = T + _half(Q, P, psis)
        else:
            T = T + T
    return T


def bracket_residuals(P: MatrixDiffOp, Q: MatrixDiffOp, *, full: bool = False) -> list[Expression]:
    """Euler residuals of the integrand.

    The integrand is linear in the jets of psi_1, so its Euler derivatives in
    psi_1 already decide exactness; ``full`` adds those in u and psi_2, psi_3.
    """
    T = schouten_integrand(P, Q)
    m = P.m
    with jet_order(BRACKET_JET_CAP):
        keys = [("psi", 1, i + 1) for i in range(m)]
        if full:
            keys = dependent_variables(T)
        return [r for r in (euler(T, k) for k in keys) if not r.is_zero()]


def are_compatible(P: MatrixDiffOp, Q: MatrixDiffOp, *, full: bool = False) -> bool:
    """[P, Q] = 0 decided by Euler annihilation of the Schouten integrand."""
    return not bracket_residuals(P, Q, full=full)


def _hydrodynamic_data(P: MatrixDiffOp):
    """(g, Gamma) when P = g D_x + (linear in u_x), else None."""
    if P.order() != 1:
        return None
    m = P.m
    xs = [u(k + 1, 1) for k in range(m)]
    for i in range(m):
        for j in range(m):
            lead = P.coeff(i, j, 1)
            if any(REGISTRY.vars[v].kind == "u" and REGISTRY.vars[v].order > 0 for v in lead.deep_variables()):
                return None
            c0 = P.coeff(i, j, 0)
            rest = c0
            for k, x in enumerate(xs):
                rest = rest - c0.diff(x) * x
            if not rest.is_zero():
                return None
            for k in range(m):
                d = c0.diff(xs[k])
                if any(REGISTRY.vars[v].kind == "u" and REGISTRY.vars[v].order > 0 for v in d.deep_variables()):
                    return None
    g = Metric(P.coefficient_matrix(1))
    return g, connection_of(P)


def geometric_hamiltonian(P: MatrixDiffOp) -> Optional[bool]:
    """Flat metric plus Levi-Civita connection; None when not applicable."""
    data = _hydrodynamic_data(P)
    if data is None:
        return None
    g, gamma = data
    if g.is_degenerate():
        return None
    return is_flat(g) and not levi_civita_residuals(g, gamma)


def is_hamiltonian(P: MatrixDiffOp, *, cross_check: bool = True) -> bool:
    """Skew-adjoint and [P, P] = 0 (geometric cross-check for first-order P)."""
    if not P.is_skew_adjoint():
        return False
    verdict = are_compatible(P, P)
    if cross_check:
        geo = geometric_hamiltonian(P)
        if geo is not None and geo != verdict:
            raise HamtrioError(
                f"bracket test says {verdict} but flat-metric test says {geo}"
            )
    return verdict


# -- canonical third-order form ------------------------------------------------------------

def third_order_data(R: MatrixDiffOp) -> tuple[Metric, list]:
    """(l^{ij}, c^{ij}_k) of R = D_x (l D_x + c_k u^k_x) D_x, read from the expansion."""
    m = R.m
    ell = Metric(R.coefficient_matrix(3))
    c = []
    for i in range(m):
        row = []
        for j in range(m):
            two = R.coeff(i, j, 2)
            row.append([two.diff(u(k + 1, 1)) - ell[i, j].diff(u(k + 1)) for k in range(m)])
        c.append(row)
    return ell, c


def third_order_conditions(ell: Metric, c) -> list[Expression]:
    """Residuals of the three conditions on (l, c) of a canonical third-order operator.

    c_{nkm} = (l_{nm,k} - l_{nk,m})/3,  l_{mn,k} + l_{nk,m} + l_{km,n} = 0,
    c_{mnk,l} = -l^{pq} c_{pml} c_{qnk},  with c_{ijk} = l_{iq} l_{jp} c^{pq}_k.
    """
    m = ell.m
    L = ell.inverse()  # DegenerateMetric when det(l) = 0
    us = [u(i + 1) for i in range(m)]
    cl = [[[Expression.const(0)] * m for _ in range(m)] for _ in range(m)]
    for i in range(m):
        for j in range(m):
            for k in range(m):
                acc = Expression.const(0)
                for p in range(m):
                    for q in range(m):
                        acc = acc + L[i][q] * L[j][p] * Expression.coerce(c[p][q][k])
                cl[i][j][k] = acc
    dL = [[[L[a][b].diff(us[k]) for k in range(m)] for b in range(m)] for a in range(m)]
    out = []
    for n in range(m):
        for k in range(m):
            for mm in range(m):
                out.append(cl[n][k][mm] - (dL[n][mm][k] - dL[n][k][mm]) / 3)
    for mm in range(m):
        for n in range(m):
            for k in range(m):
                out.append(dL[mm][n][k] + dL[n][k][mm] + dL[k][mm][n])
    for mm in range(m):
        for n in range(m):
            for k in range(m):
                for l in range(m):
                    acc = cl[mm][n][k].diff(us[l])
                    for p in range(m):
                        for q in range(m):
                            acc = acc + ell[p, q] * cl[p][mm][l] * cl[q][n][k]
                    out.append(acc)
    return out


def second_order_form_check(T, T0) -> bool:
    """T_{ijk} totally antisymmetric and T^0_{ij} antisymmetric."""
    m = len(T0)
    E = Expression.coerce
    for i in range(m):
        for j in range(m):
            if not (E(T0[i][j]) + E(T0[j][i])).is_zero():
                return False
            for k in range(m):
                t = E(T[i][j][k])
                if not (t + E(T[j][i][k])).is_zero():
                    return False
                if not (t + E(T[i][k][j])).is_zero():
                    return False
                if not (t + E(T[k][j][i])).is_zero():
                    return False
    return True
