"""Contravariant metrics, Levi-Civita connections, curvature and flat pencils.

Index conventions: ``g[i][j]`` is g^{ij}; a connection ``gamma[i][j][k]`` is the
contravariant symbol Gamma^{ij}_k appearing in g^{ij} D_x + Gamma^{ij}_k u^k_x;
``christoffel[k][i][j]`` is the usual Gamma^k_{ij} of the covariant metric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .diffop import MatrixDiffOp, determinant
from .errors import DegenerateMetric, DegeneratePencil
from .jetcalc import Expression, param, u
from .jetcalc.expression import REGISTRY, index_of

Matrix = list[list[Expression]]
Connection = list[list[list[Expression]]]


def _E(x) -> Expression:
    return Expression.coerce(x)


@dataclass(frozen=True)
class Metric:
    """Symmetric contravariant 2-tensor g^{ij}(u)."""

    g: tuple

    def __init__(self, entries: Sequence[Sequence]):
        rows = tuple(tuple(_E(x) for x in row) for row in entries)
        m = len(rows)
        if any(len(r) != m for r in rows):
            raise ValueError("metric must be square")
        for i in range(m):
            for j in range(i + 1, m):
                if not (rows[i][j] - rows[j][i]).is_zero():
                    raise ValueError(f"metric is not symmetric in ({i + 1},{j + 1})")
        object.__setattr__(self, "g", rows)

    @property
    def m(self) -> int:
        return len(self.g)

    def __getitem__(self, ij) -> Expression:
        i, j = ij
        return self.g[i][j]

    def rows(self) -> Matrix:
        return [list(r) for r in self.g]

    def det(self) -> Expression:
        return determinant(self.rows())

    def is_degenerate(self) -> bool:
        return self.det().is_zero()

    def inverse(self) -> Matrix:
        """Covariant metric g_{ij}."""
        d = self.det()
        if d.is_zero():
            raise DegenerateMetric("det(g) vanishes identically")
        return _inverse(self.rows(), d)

    def __add__(self, other: "Metric") -> "Metric":
        return Metric([[a + b for a, b in zip(r, s)] for r, s in zip(self.g, other.g)])

    def __sub__(self, other: "Metric") -> "Metric":
        return Metric([[a - b for a, b in zip(r, s)] for r, s in zip(self.g, other.g)])

    def scale(self, c) -> "Metric":
        c = _E(c)
        return Metric([[c * a for a in r] for r in self.g])

    def subs(self, mapping) -> "Metric":
        return Metric([[a.subs(mapping) for a in r] for r in self.g])

    def __eq__(self, other):
        if not isinstance(other, Metric) or other.m != self.m:
            return NotImplemented
        return all((a - b).is_zero() for r, s in zip(self.g, other.g) for a, b in zip(r, s))

    def __hash__(self):
        return hash(self.g)

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(str(a) for a in r) + "]" for r in self.g) + "]"


def _inverse(M: Matrix, det: Expression) -> Matrix:
    m = len(M)
    if m == 1:
        return [[1 / M[0][0]]]
    if m == 2:
        return [[M[1][1] / det, -M[0][1] / det], [-M[1][0] / det, M[0][0] / det]]
    inv = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            minor = [row[:i] + row[i + 1:] for k, row in enumerate(M) if k != j]
            c = determinant(minor)
            inv[i][j] = c / det if (i + j) % 2 == 0 else -c / det
    return inv


def _fields(m: int) -> list[Expression]:
    return [u(i + 1) for i in range(m)]


def christoffel(g: Metric) -> Connection:
    """Gamma^k_{ij} of the covariant metric g^{-1}, as ``out[k][i][j]``."""
    m = g.m
    G = g.inverse()
    us = _fields(m)
    dG = [[[G[i][j].diff(us[k]) for k in range(m)] for j in range(m)] for i in range(m)]
    out = [[[Expression.const(0)] * m for _ in range(m)] for _ in range(m)]
    for k in range(m):
        for i in range(m):
            for j in range(i, m):
                acc = Expression.const(0)
                for l in range(m):
                    if g.g[k][l].is_zero():
                        continue
                    acc = acc + g.g[k][l] * (dG[l][j][i] + dG[l][i][j] - dG[i][j][l])
                acc = acc / 2
                out[k][i][j] = acc
                out[k][j][i] = acc
    return out


def levi_civita(g: Metric) -> Connection:
    """Contravariant symbols Gamma^{ij}_k = -g^{is} Gamma^j_{sk}."""
    m = g.m
    chr_ = christoffel(g)
    out = [[[Expression.const(0)] * m for _ in range(m)] for _ in range(m)]
    for i in range(m):
        for j in range(m):
            for k in range(m):
                acc = Expression.const(0)
                for s in range(m):
                    acc = acc - g.g[i][s] * chr_[j][s][k]
                out[i][j][k] = acc
    return out


def levi_civita_residuals(g: Metric, gamma: Connection, *, nonzero_only: bool = True) -> list[Expression]:
    """Residuals of g^{is}Gamma^{jk}_s = g^{js}Gamma^{ik}_s and Gamma^{ij}_k + Gamma^{ji}_k = d_k g^{ij}."""
    m = g.m
    us = _fields(m)
    res = []
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(m):
                r = Expression.const(0)
                for s in range(m):
                    r = r + g.g[i][s] * _E(gamma[j][k][s]) - g.g[j][s] * _E(gamma[i][k][s])
                res.append(r)
    for i in range(m):
        for j in range(i, m):
            for k in range(m):
                res.append(_E(gamma[i][j][k]) + _E(gamma[j][i][k]) - g.g[i][j].diff(us[k]))
    if nonzero_only:
        res = [r for r in res if not r.is_zero()]
    return res


def riemann(g: Metric) -> list:
    """R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj} + Gamma^i_{kp}Gamma^p_{lj} - Gamma^i_{lp}Gamma^p_{kj}."""
    m = g.m
    G = christoffel(g)
    us = _fields(m)
    z = Expression.const(0)
    R = [[[[z] * m for _ in range(m)] for _ in range(m)] for _ in range(m)]
    for i in range(m):
        for j in range(m):
            for k in range(m):
                for l in range(k + 1, m):
                    acc = G[i][l][j].diff(us[k]) - G[i][k][j].diff(us[l])
                    for p in range(m):
                        acc = acc + G[i][k][p] * G[p][l][j] - G[i][l][p] * G[p][k][j]
                    R[i][j][k][l] = acc
                    R[i][j][l][k] = -acc
    return R


def riemann_components(g: Metric) -> list[Expression]:
    return [c for a in riemann(g) for b in a for cc in b for c in cc]


def is_flat(g: Metric) -> bool:
    return all(c.is_zero() for c in riemann_components(g))


def op_from_metric(g: Metric, gamma: Optional[Connection] = None) -> MatrixDiffOp:
    """g^{ij} D_x + Gamma^{ij}_k u^k_x with the Levi-Civita Gamma by default."""
    if gamma is None:
        gamma = levi_civita(g)
    return MatrixDiffOp.hydrodynamic(g.rows(), gamma)


def metric_of(P: MatrixDiffOp) -> Metric:
    """Leading coefficient of a first-order operator."""
    return Metric(P.coefficient_matrix(1))


def connection_of(P: MatrixDiffOp) -> Connection:
    """Gamma^{ij}_k read off the D_x^0 part of a hydrodynamic operator."""
    m = P.m
    out = []
    for i in range(m):
        row = []
        for j in range(m):
            c0 = P.coeff(i, j, 0)
            row.append([c0.diff(u(k + 1, 1)) for k in range(m)])
        out.append(row)
    return out


def tensor_pushforward(g: Metric, phi: Sequence, phi_inv: Sequence) -> Metric:
    """g^{ij} transformed as a contravariant 2-tensor under v = phi(u)."""
    m = g.m
    us = _fields(m)
    J = [[_E(phi[i]).diff(us[j]) for j in range(m)] for i in range(m)]
    back = {us[i]: _E(phi_inv[i]) for i in range(m)}
    out = []
    for i in range(m):
        row = []
        for j in range(m):
            acc = Expression.const(0)
            for k in range(m):
                for l in range(m):
                    acc = acc + J[i][k] * g.g[k][l] * J[j][l]
            row.append(acc.subs(back))
        out.append(row)
    return Metric(out)


# -- flat pencils -------------------------------------------------------------------------

@dataclass
class FlatPencilResult:
    flat: bool
    additive: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.flat and self.additive

    def __bool__(self):
        return self.ok

    def diagnostic(self) -> str:
        if self.ok:
            return "flat pencil"
        return "; ".join(self.failures)


def _lam_symbol(name: str = "lam") -> Expression:
    return param(name)


def flat_pencil_check(
    g: Metric,
    h: Metric,
    *,
    gamma_g: Optional[Connection] = None,
    gamma_h: Optional[Connection] = None,
    lam: str = "lam",
) -> FlatPencilResult:
    """g - lam h flat for all lam and Gamma(g - lam h) = Gamma(g) - lam Gamma(h).

    Both conditions are tested as exact identities in the indeterminate lam.
    When h (or g) is degenerate its connection must be supplied explicitly.
    """
    if g.m != h.m:
        raise ValueError("metrics of different size")
    L = _lam_symbol(lam)
    gl = g - h.scale(L)
    det = gl.det()
    if det.is_zero():
        raise DegeneratePencil("det(g - lam h) vanishes identically")
    m = g.m
    failures = []
    flat = True
    R = riemann(gl)
    for i in range(m):
        for j in range(m):
            for k in range(m):
                for l in range(k + 1, m):
                    if not R[i][j][k][l].is_zero():
                        flat = False
                        failures.append(f"R^{i + 1}_{j + 1}{k + 1}{l + 1} of g - lam h is nonzero")
    if gamma_g is None:
        gamma_g = levi_civita(g)
    if gamma_h is None:
        gamma_h = levi_civita(h)
    gam = levi_civita(gl)
    additive = True
    for i in range(m):
        for j in range(m):
            for k in range(m):
                r = gam[i][j][k] - (_E(gamma_g[i][j][k]) - L * _E(gamma_h[i][j][k]))
                if not r.is_zero():
                    additive = False
                    failures.append(f"Gamma^{i + 1}{j + 1}_{k + 1} is not additive in lam")
    return FlatPencilResult(flat, additive, failures)


# -- parameter conditions -----------------------------------------------------------------

def parameter_conditions(residuals: Iterable[Expression], params: Sequence[str]) -> list[Expression]:
    """Coefficients (in the field/jet variables) of the residual numerators.

    For residuals polynomial in the parameters this yields the parameter
    conditions under which all residuals vanish identically in u.
    """
    pidx = {index_of(param(p)) for p in params}
    out = []
    for r in residuals:
        n = r.num
        jets = [i for i in n.variables() if i not in pidx and REGISTRY.vars[i].kind != "param"]
        if not jets:
            if not n.is_zero():
                out.append(n)
            continue
        for c in n.coefficients(jets).values():
            if not c.is_zero():
                out.append(c)
    return out
