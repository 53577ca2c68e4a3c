"""Matrix differential operators in the total derivative D_x.

Operators are kept fully expanded: entry (i, j) is a finite sum
``sum_k a_k D_x^k`` with canonical Expression coefficients and no zero terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Mapping, Optional, Sequence

from .errors import DimensionMismatch, NotGraded, NotHomogeneous, SingularJacobian
from .jetcalc import Dx, Expression, homogeneous_degree, param, u
from .jetcalc.expression import REGISTRY, index_of


def _E(x) -> Expression:
    return Expression.coerce(x)


class _DerivCache:
    """Memo of D_x^j(a) for one coefficient ``a``."""

    __slots__ = ("seq",)

    def __init__(self, a: Expression):
        self.seq = [a]

    def __getitem__(self, j: int) -> Expression:
        while len(self.seq) <= j:
            self.seq.append(Dx(self.seq[-1]))
        return self.seq[j]


class ScalarDiffOp:
    """``sum_k coeffs[k] * D_x^k``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Optional[Mapping[int, object]] = None):
        clean = {}
        for k, a in (coeffs or {}).items():
            a = _E(a)
            if k < 0:
                raise ValueError("negative power of D_x")
            if not a.is_zero():
                clean[k] = a
        self.coeffs: dict[int, Expression] = clean

    # -- constructors --------------------------------------------------------------
    @staticmethod
    def mult(a) -> "ScalarDiffOp":
        return ScalarDiffOp({0: a})

    @staticmethod
    def dx(power: int = 1) -> "ScalarDiffOp":
        return ScalarDiffOp({power: 1})

    @staticmethod
    def zero() -> "ScalarDiffOp":
        return ScalarDiffOp()

    # -- structure -----------------------------------------------------------------
    def order(self) -> int:
        return max(self.coeffs, default=-1)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int) -> Expression:
        return self.coeffs.get(k, Expression.const(0))

    def __eq__(self, other):
        if not isinstance(other, ScalarDiffOp):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(sorted((k, hash(a)) for k, a in self.coeffs.items())))

    def __repr__(self):
        return f"ScalarDiffOp({format_scalar(self)!r})"

    __str__ = lambda self: format_scalar(self)

    # -- linear structure ----------------------------------------------------------------
    def __add__(self, other):
        other = _as_scalar(other)
        out = dict(self.coeffs)
        for k, b in other.coeffs.items():
            out[k] = out[k] + b if k in out else b
        return ScalarDiffOp(out)

    __radd__ = __add__

    def __neg__(self):
        return ScalarDiffOp({k: -a for k, a in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-_as_scalar(other))

    def __rsub__(self, other):
        return _as_scalar(other) - self

    def scale(self, c) -> "ScalarDiffOp":
        """Left multiplication by the function ``c``."""
        c = _E(c)
        return ScalarDiffOp({k: c * a for k, a in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, ScalarDiffOp):
            return compose(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def map(self, f) -> "ScalarDiffOp":
        return ScalarDiffOp({k: f(a) for k, a in self.coeffs.items()})

    def subs(self, mapping) -> "ScalarDiffOp":
        return self.map(lambda a: a.subs(mapping))

    def apply(self, f) -> Expression:
        f = _E(f)
        out = Expression.const(0)
        d = _DerivCache(f)
        for k, a in self.coeffs.items():
            out = out + a * d[k]
        return out

    def adjoint(self) -> "ScalarDiffOp":
        return scalar_adjoint(self)


def _as_scalar(x) -> ScalarDiffOp:
    return x if isinstance(x, ScalarDiffOp) else ScalarDiffOp.mult(x)


def compose(A: ScalarDiffOp, B: ScalarDiffOp) -> ScalarDiffOp:
    """A o B with D_x^k o b = sum_j C(k, j) D_x^j(b) D_x^(k-j)."""
    A, B = _as_scalar(A), _as_scalar(B)
    out: dict[int, Expression] = {}
    caches = {l: _DerivCache(b) for l, b in B.coeffs.items()}
    for k, a in A.coeffs.items():
        for l, cache in caches.items():
            for j in range(k + 1):
                db = cache[j]
                if db.is_zero():
                    break
                term = a * db * comb(k, j)
                p = k - j + l
                out[p] = out[p] + term if p in out else term
    return ScalarDiffOp(out)


def scalar_adjoint(A: ScalarDiffOp) -> ScalarDiffOp:
    """sum_k (-D_x)^k o a_k, expanded."""
    out: dict[int, Expression] = {}
    for k, a in A.coeffs.items():
        cache = _DerivCache(a)
        sign = -1 if k % 2 else 1
        for j in range(k + 1):
            da = cache[j]
            if da.is_zero():
                break
            term = da * (sign * comb(k, j))
            p = k - j
            out[p] = out[p] + term if p in out else term
    return ScalarDiffOp(out)


# -- matrix operators ----------------------------------------------------------------

class MatrixDiffOp:
    """Square matrix of ScalarDiffOp entries."""

    __slots__ = ("entries", "m")

    def __init__(self, entries: Sequence[Sequence]):
        m = len(entries)
        rows = []
        for row in entries:
            if len(row) != m:
                raise DimensionMismatch(f"operator rows must have length {m}")
            rows.append([_as_scalar(x) for x in row])
        self.entries: list[list[ScalarDiffOp]] = rows
        self.m = m

    # -- constructors ----------------------------------------------------------------
    @staticmethod
    def zero(m: int) -> "MatrixDiffOp":
        return MatrixDiffOp([[ScalarDiffOp() for _ in range(m)] for _ in range(m)])

    @staticmethod
    def identity(m: int, power: int = 0) -> "MatrixDiffOp":
        return MatrixDiffOp(
            [[ScalarDiffOp.dx(power) if i == j else ScalarDiffOp() for j in range(m)] for i in range(m)]
        )

    @staticmethod
    def from_coeffs(m: int, coeffs: Mapping[tuple, object]) -> "MatrixDiffOp":
        """Build from ``{(i, j, k): a}`` (0-based i, j) meaning a D_x^k in entry (i, j)."""
        grid = [[{} for _ in range(m)] for _ in range(m)]
        for (i, j, k), a in coeffs.items():
            grid[i][j][k] = _E(a) + grid[i][j].get(k, 0)
        return MatrixDiffOp([[ScalarDiffOp(c) for c in row] for row in grid])

    @staticmethod
    def multiplication(matrix: Sequence[Sequence]) -> "MatrixDiffOp":
        return MatrixDiffOp([[ScalarDiffOp.mult(a) for a in row] for row in matrix])

    @staticmethod
    def hydrodynamic(g: Sequence[Sequence], gamma) -> "MatrixDiffOp":
        """g^{ij} D_x + Gamma^{ij}_k u^k_x with ``gamma[i][j][k]``."""
        m = len(g)
        rows = []
        for i in range(m):
            row = []
            for j in range(m):
                c0 = Expression.const(0)
                for k in range(m):
                    c0 = c0 + _E(gamma[i][j][k]) * u(k + 1, 1)
                row.append(ScalarDiffOp({1: g[i][j], 0: c0}))
            rows.append(row)
        return MatrixDiffOp(rows)

    # -- structure -------------------------------------------------------------------
    def __getitem__(self, ij) -> ScalarDiffOp:
        i, j = ij
        return self.entries[i][j]

    def coeff(self, i: int, j: int, k: int) -> Expression:
        return self.entries[i][j].coeff(k)

    def order(self) -> int:
        return max((e.order() for row in self.entries for e in row), default=-1)

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def coefficient_matrix(self, k: int) -> list[list[Expression]]:
        return [[e.coeff(k) for e in row] for row in self.entries]

    def items(self):
        """Yield ``(i, j, k, coefficient)`` over nonzero terms."""
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                for k, a in sorted(e.coeffs.items()):
                    yield i, j, k, a

    def variables(self) -> frozenset[int]:
        out = set()
        for *_, a in self.items():
            out |= a.deep_variables()
        return frozenset(out)

    def __eq__(self, other):
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        if self.m != other.m:
            return False
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(hash(e) for row in self.entries for e in row))

    def __repr__(self):
        return f"MatrixDiffOp({format_operator(self)!r})"

    def __str__(self):
        return format_operator(self)

    # -- algebra -----------------------------------------------------------------------
    def _check(self, other: "MatrixDiffOp") -> None:
        if self.m != other.m:
            raise DimensionMismatch(f"{self.m}x{self.m} vs {other.m}x{other.m} operators")

    def __add__(self, other):
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        self._check(other)
        return MatrixDiffOp(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def __neg__(self):
        return MatrixDiffOp([[-a for a in row] for row in self.entries])

    def __sub__(self, other):
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "MatrixDiffOp":
        return MatrixDiffOp([[a.scale(c) for a in row] for row in self.entries])

    def __mul__(self, other):
        if isinstance(other, MatrixDiffOp):
            return compose_matrix(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def map(self, f) -> "MatrixDiffOp":
        return MatrixDiffOp([[a.map(f) for a in row] for row in self.entries])

    def subs(self, mapping) -> "MatrixDiffOp":
        return self.map(lambda a: a.subs(mapping))

    def transpose(self) -> "MatrixDiffOp":
        return MatrixDiffOp([[self.entries[j][i] for j in range(self.m)] for i in range(self.m)])

    def adjoint(self) -> "MatrixDiffOp":
        return adjoint(self)

    def is_skew_adjoint(self) -> bool:
        return (self + adjoint(self)).is_zero()

    def apply(self, psi: Sequence) -> list[Expression]:
        return apply(self, psi)


def compose_matrix(A: MatrixDiffOp, B: MatrixDiffOp) -> MatrixDiffOp:
    A._check(B)
    m = A.m
    rows = []
    for i in range(m):
        row = []
        for j in range(m):
            acc = ScalarDiffOp()
            for k in range(m):
                if A.entries[i][k].is_zero() or B.entries[k][j].is_zero():
                    continue
                acc = acc + compose(A.entries[i][k], B.entries[k][j])
            row.append(acc)
        rows.append(row)
    return MatrixDiffOp(rows)


def adjoint(P) -> MatrixDiffOp:
    """(P^+)^{ij} = sum_k (-D_x)^k o a^{ji}_k."""
    if isinstance(P, ScalarDiffOp):
        return scalar_adjoint(P)
    m = P.m
    return MatrixDiffOp([[scalar_adjoint(P.entries[j][i]) for j in range(m)] for i in range(m)])


def apply(P: MatrixDiffOp, psi: Sequence) -> list[Expression]:
    """(P psi)^i = sum_j P^{ij} psi_j."""
    if len(psi) != P.m:
        raise DimensionMismatch(f"vector of length {len(psi)} for a {P.m}x{P.m} operator")
    psi = [_E(p) for p in psi]
    caches = [_DerivCache(p) for p in psi]
    out = []
    for i in range(P.m):
        acc = Expression.const(0)
        for j in range(P.m):
            for k, a in P.entries[i][j].coeffs.items():
                acc = acc + a * caches[j][k]
        out.append(acc)
    return out


def equal_up_to_scale(P: MatrixDiffOp, Q: MatrixDiffOp) -> Optional[Expression]:
    """Return kappa with P = kappa * Q (kappa free of jet variables), else None."""
    if P.m != Q.m:
        return None
    if Q.is_zero():
        return Expression.const(1) if P.is_zero() else None
    for i, j, k, b in Q.items():
        a = P.coeff(i, j, k)
        kappa = a / b
        break
    if kappa.is_zero():
        return None
    if any(REGISTRY.vars[v].is_jet for v in kappa.deep_variables()):
        return None
    return kappa if (P - Q.scale(kappa)).is_zero() else None


# -- pencils and graded coefficients ---------------------------------------------------

EPS = "eps"
LAM = "lam"


@dataclass
class Pencil:
    """Pi = side2 - lam * side1, each side = hydrodynamic part + sum eps^k (...)."""

    op: MatrixDiffOp
    eps: str = EPS
    lam: str = LAM

    @staticmethod
    def from_sides(side2: MatrixDiffOp, side1: MatrixDiffOp, eps: str = EPS, lam: str = LAM) -> "Pencil":
        return Pencil(side2 - side1.scale(param(lam)), eps, lam)

    @property
    def m(self) -> int:
        return self.op.m

    def side(self, a: int) -> MatrixDiffOp:
        """Side 2 is the lam^0 part, side 1 is minus the lam^1 part."""
        lam = index_of(param(self.lam))
        parts = {0: {}, 1: {}}
        for i, j, k, c in self.op.items():
            for (p,), cc in c.coefficients([lam]).items():
                if p > 1:
                    raise NotGraded(f"pencil is of degree {p} in {self.lam}")
                parts[p][(i, j, k)] = cc
        if a == 2:
            return MatrixDiffOp.from_coeffs(self.m, parts[0])
        return -MatrixDiffOp.from_coeffs(self.m, parts[1])

    def at(self, lam=None, eps=None) -> MatrixDiffOp:
        mapping = {}
        if lam is not None:
            mapping[self.lam] = lam
        if eps is not None:
            mapping[self.eps] = eps
        return self.op.subs(mapping) if mapping else self.op


@dataclass
class GradedCoefficients:
    """A^{ij}_{a;k,l} keyed by (a, k, l) as m x m matrices, plus the hydrodynamic parts."""

    m: int
    table: dict = field(default_factory=dict)
    omega: dict = field(default_factory=dict)
    eps: str = EPS
    lam: str = LAM

    def get(self, a: int, k: int, l: int) -> list[list[Expression]]:
        z = Expression.const(0)
        return self.table.get((a, k, l), [[z] * self.m for _ in range(self.m)])

    def entry(self, a: int, k: int, l: int, i: int, j: int) -> Expression:
        return self.get(a, k, l)[i][j]

    def reassemble(self) -> Pencil:
        eps, lam = param(self.eps), param(self.lam)
        sides = {}
        for a in (1, 2):
            op = self.omega.get(a, MatrixDiffOp.zero(self.m))
            coeffs = {}
            for (aa, k, l), mat in self.table.items():
                if aa != a:
                    continue
                p = k - l + 1
                for i in range(self.m):
                    for j in range(self.m):
                        if not mat[i][j].is_zero():
                            key = (i, j, p)
                            coeffs[key] = coeffs.get(key, 0) + mat[i][j] * eps**k
            sides[a] = op + MatrixDiffOp.from_coeffs(self.m, coeffs)
        return Pencil.from_sides(sides[2], sides[1], self.eps, self.lam)


def extract_graded(pencil: Pencil) -> GradedCoefficients:
    """Split both sides by powers of eps and check degree l = k + 1 - (D_x power)."""
    eps = index_of(param(pencil.eps))
    out = GradedCoefficients(pencil.m, eps=pencil.eps, lam=pencil.lam)
    m = pencil.m
    for a in (1, 2):
        side = pencil.side(a)
        omega = {}
        for i, j, p, c in side.items():
            for (k,), cc in c.coefficients([eps]).items():
                if k == 0:
                    omega[(i, j, p)] = cc
                    continue
                l = k + 1 - p
                try:
                    deg = homogeneous_degree(cc)
                except NotHomogeneous as exc:
                    raise NotGraded(f"entry ({i + 1},{j + 1}) at eps^{k} D_x^{p}: {exc}") from exc
                if deg != l or l < 0:
                    raise NotGraded(
                        f"entry ({i + 1},{j + 1}) at eps^{k} D_x^{p} has degree {deg}, expected {l}"
                    )
                mat = out.table.setdefault(
                    (a, k, l), [[Expression.const(0)] * m for _ in range(m)]
                )
                mat[i][j] = mat[i][j] + cc
        out.omega[a] = MatrixDiffOp.from_coeffs(m, omega)
    return out


# -- point transformations -------------------------------------------------------------

def jacobian(phi: Sequence) -> list[list[Expression]]:
    m = len(phi)
    return [[_E(phi[i]).diff(u(j + 1)) for j in range(m)] for i in range(m)]


def det2(M) -> Expression:
    return M[0][0] * M[1][1] - M[0][1] * M[1][0]


def determinant(M) -> Expression:
    """Laplace expansion (m is tiny here)."""
    m = len(M)
    if m == 1:
        return M[0][0]
    if m == 2:
        return det2(M)
    total = Expression.const(0)
    for j in range(m):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * determinant(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def jet_substitution(phi_inv: Sequence, order: int) -> dict[int, Expression]:
    """u^i_(k) -> D_x^k phi_inv^i for k <= order (simultaneous)."""
    mapping = {}
    for i, f in enumerate(phi_inv):
        cache = _DerivCache(_E(f))
        for k in range(order + 1):
            mapping[index_of(u(i + 1, k))] = cache[k]
    return mapping


def point_transform(P: MatrixDiffOp, phi: Sequence, phi_inv: Sequence) -> MatrixDiffOp:
    """Operator in coordinates v = phi(u): J o P o J^T rewritten through phi_inv.

    ``phi`` is written in the old fields u1..um, ``phi_inv`` expresses the old
    fields through the new ones, which reuse the names u1..um.
    """
    m = P.m
    if len(phi) != m or len(phi_inv) != m:
        raise DimensionMismatch("map length differs from operator size")
    J = jacobian(phi)
    if determinant(J).is_zero():
        raise SingularJacobian("Jacobian of the point transformation is singular")
    Jop = MatrixDiffOp.multiplication(J)
    JT = MatrixDiffOp.multiplication([[J[j][i] for j in range(m)] for i in range(m)])
    out = compose_matrix(compose_matrix(Jop, P), JT)
    order = 0
    for idx in out.variables():
        v = REGISTRY.vars[idx]
        if v.kind == "u":
            order = max(order, v.order)
    return out.subs(jet_substitution(phi_inv, order))


def compose_maps(first: Sequence, second: Sequence) -> list[Expression]:
    """Coordinates of ``second`` o ``first`` (both written in u1..um)."""
    mapping = {u(i + 1): _E(f) for i, f in enumerate(first)}
    return [_E(g).subs(mapping) for g in second]


# -- printing ----------------------------------------------------------------------------

def format_scalar(A: ScalarDiffOp) -> str:
    if A.is_zero():
        return "0"
    parts = []
    for k in sorted(A.coeffs, reverse=True):
        s = str(A.coeffs[k])
        if k == 0:
            parts.append(s)
            continue
        d = "Dx" if k == 1 else f"Dx^{k}"
        if s == "1":
            parts.append(d)
        elif s == "-1":
            parts.append(f"-{d}")
        else:
            parts.append(f"({s})*{d}" if " " in s else f"{s}*{d}")
    out = parts[0]
    for p in parts[1:]:
        if p.startswith("-"):
            out += " - " + p[1:]
        elif p.startswith("(-") and p.endswith(")") and " " not in p:
            out += " - " + p[2:-1]
        else:
            out += " + " + p
    return out


def format_operator(P: MatrixDiffOp) -> str:
    return "[" + ", ".join("[" + ", ".join(format_scalar(e) for e in row) + "]" for row in P.entries) + "]"


def operator_from_rows(rows: Iterable[Iterable[str]], env=None) -> MatrixDiffOp:
    """Convenience: each entry parsed with the operator grammar of the cli."""
    from .cli.document import parse_operator_text

    def entry(text):
        v = parse_operator_text(text, env)
        return ScalarDiffOp({0: v}) if isinstance(v, Expression) else v

    return MatrixDiffOp([[entry(s) for s in row] for row in rows])
