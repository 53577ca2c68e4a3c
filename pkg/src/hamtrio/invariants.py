"""Canonical coordinates and central invariants of a deformed hydrodynamic pencil.

For Pi = side2 - lam * side1 the canonical coordinates are the roots r^i of
det(g_2 - r g_1), and

    s_i = (A^{ii}_{2;2,0} - r^i A^{ii}_{1;2,0}
           + sum_{k != i} (A^{ki}_{2;1,0} - r^i A^{ki}_{1;1,0})^2 / (f^k (r^k - r^i))) / (f^i)^2

with f^i the diagonal of g_1 in canonical coordinates.  The coefficients
A_{a;2,0} (of eps^2 D_x^3) and A_{a;1,0} (of eps D_x^2) are leading symbols, so
they transform as tensors; that gives a second route to s_i written in the
original fields, next to the full point transformation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .diffop import MatrixDiffOp, Pencil, compose_maps, extract_graded, jacobian, point_transform
from .errors import NegativeRadicand, PoleAtPoint, SemisimplicityFailure, Undecided
from .geometry import Metric
from .jetcalc import Expression, eval_numeric, param, parse_expression, sqrt, u
from .jetcalc.expression import REGISTRY

DEFAULT_DOMAIN = ((1, 2), (2, 3))
TOL = 1e-9


def _E(x) -> Expression:
    return parse_expression(x) if isinstance(x, str) else Expression.coerce(x)


def exact_sqrt(e: Expression) -> Expression:
    """sqrt(e), taken exactly when e is a square of a rational function."""
    e = _E(e)
    if e.is_constant():
        return sqrt(e)
    n, d, _ = e.polys()
    try:
        return Expression.from_polys(n.sqrt(), d.sqrt())
    except Exception:
        return sqrt(e)


def _point(values: Sequence) -> dict:
    return {u(i + 1): Fraction(v) if not isinstance(v, float) else v for i, v in enumerate(values)}


def _num(e: Expression, pt: dict):
    return eval_numeric(e, pt)


@dataclass
class CanonicalChart:
    """Canonical coordinates lam^i(u), and u(l) when known (names l1, l2, ... ).

    ``inverse`` is written in the fields u1..um, which then stand for the
    canonical coordinates (the convention of point_transform).
    """

    lambdas: list
    base: tuple
    inverse: Optional[list] = None
    labels: tuple = ()

    @property
    def m(self) -> int:
        return len(self.lambdas)

    @property
    def rational(self) -> bool:
        return not any(l.has_radicals() for l in self.lambdas)

    def at(self, point: Sequence) -> list:
        pt = _point(point)
        return [_num(l, pt) for l in self.lambdas]

    def with_inverse(self, inverse: Sequence) -> "CanonicalChart":
        """Attach u(lam); the composition with lam(u) must be the identity."""
        inv = [_E(x) for x in inverse]
        back = compose_maps(self.lambdas, inv)
        if not all((b - u(i + 1)).is_zero() for i, b in enumerate(back)):
            raise ValueError("inverse does not invert the chart")
        return CanonicalChart(self.lambdas, self.base, inv, self.labels)

    def relabel(self, order: Sequence[int]) -> "CanonicalChart":
        """Reorder the coordinates (``order[i]`` is the old index of the new i-th)."""
        lams = [self.lambdas[j] for j in order]
        labels = tuple(self.labels[j] for j in order) if self.labels else ()
        return CanonicalChart(lams, self.base, None, labels)


def _affinor_roots(g1: list, g2: list):
    """Roots of det(g2 - r g1) for m = 1, 2."""
    m = len(g1)
    if m == 1:
        if g1[0][0].is_zero():
            raise SemisimplicityFailure("g1 vanishes")
        return [g2[0][0] / g1[0][0]], None
    if m != 2:
        raise NotImplementedError("canonical coordinates are implemented for m <= 2")
    a = g1[0][0] * g1[1][1] - g1[0][1] * g1[1][0]
    if a.is_zero():
        raise SemisimplicityFailure("g1 is degenerate")
    b = -(g2[0][0] * g1[1][1] + g1[0][0] * g2[1][1] - g2[0][1] * g1[1][0] - g1[0][1] * g2[1][0])
    c = g2[0][0] * g2[1][1] - g2[0][1] * g2[1][0]
    disc = b * b - 4 * a * c
    if disc.is_zero():
        raise SemisimplicityFailure("the affinor has a double eigenvalue identically")
    try:
        root = exact_sqrt(disc)
    except NegativeRadicand:
        raise SemisimplicityFailure("the affinor has complex eigenvalues everywhere") from None
    return [(-b + root) / (2 * a), (-b - root) / (2 * a)], disc


def canonical_coordinates(g1, g2, base: Optional[Sequence] = None,
                          order: Optional[Sequence[int]] = None) -> CanonicalChart:
    """Eigenvalues of the affinor g_2 g_1^{-1}, sorted decreasingly at ``base``.

    ``order`` relabels after sorting.
    """
    g1 = g1.g if isinstance(g1, Metric) else [[_E(x) for x in row] for row in g1]
    g2 = g2.g if isinstance(g2, Metric) else [[_E(x) for x in row] for row in g2]
    m = len(g1)
    base = tuple(base) if base is not None else tuple(Fraction(lo + hi, 2) for lo, hi in DEFAULT_DOMAIN[:m])
    roots, disc = _affinor_roots(g1, g2)
    pt = _point(base)
    try:
        vals = [_num(r, pt) for r in roots]
    except (PoleAtPoint, NegativeRadicand) as exc:
        raise SemisimplicityFailure(f"canonical coordinates undefined at the base point: {exc}") from exc
    if m == 2 and abs(vals[0] - vals[1]) < TOL:
        raise SemisimplicityFailure("eigenvalues coincide at the base point")
    if m == 2 and abs(complex(vals[0]).imag) > TOL:
        raise SemisimplicityFailure("complex eigenvalues at the base point")
    idx = sorted(range(m), key=lambda i: -float(vals[i]))
    chart = CanonicalChart([roots[i] for i in idx], base, None, tuple(f"l{i + 1}" for i in range(m)))
    if m == 2:
        J = jacobian(chart.lambdas)
        if (J[0][0] * J[1][1] - J[0][1] * J[1][0]).is_zero():
            raise SemisimplicityFailure("canonical coordinates are functionally dependent")
    return chart.relabel(order) if order is not None else chart


def pencil_chart(pencil: Pencil, base=None, order=None) -> CanonicalChart:
    g1 = _metric_of(pencil.side(1))
    g2 = _metric_of(pencil.side(2).subs({pencil.eps: 0}))
    return canonical_coordinates(g1, g2, base, order)


def _metric_of(op: MatrixDiffOp) -> list:
    return [[op.coeff(i, j, 1) for j in range(op.m)] for i in range(op.m)]


# -- the invariants ---------------------------------------------------------------------

def _tensor(J, A):
    m = len(J)
    z = Expression.const(0)
    return [[sum((J[i][a] * A[a][b] * J[j][b] for a in range(m) for b in range(m)), z)
             for j in range(m)] for i in range(m)]


def _formula(f, r, A2, A1, B2, B1) -> list:
    """The invariants from canonical-coordinate data (all m x m, f diagonal)."""
    m = len(r)
    out = []
    for i in range(m):
        acc = A2[i][i] - r[i] * A1[i][i]
        for k in range(m):
            if k == i:
                continue
            acc = acc + (B2[k][i] - r[i] * B1[k][i]) ** 2 / (f[k][k] * (r[k] - r[i]))
        out.append(acc / f[i][i] ** 2)
    return out


def _check_diagonal(f, where: str) -> None:
    m = len(f)
    for i in range(m):
        for j in range(m):
            if i != j and not f[i][j].is_zero():
                raise SemisimplicityFailure(f"g1 is not diagonal in the canonical chart ({where})")


def invariants_in_fields(pencil: Pencil, chart: CanonicalChart) -> list:
    """s_i as functions of the original fields, through the tensor law of the leading symbols."""
    G = extract_graded(pencil)
    J = jacobian(chart.lambdas) if chart.m > 1 else [[chart.lambdas[0].diff(u(1))]]
    g1 = _metric_of(pencil.side(1))
    f = _tensor(J, g1)
    _check_diagonal(f, "tensor route")
    A2, A1 = _tensor(J, G.get(2, 2, 0)), _tensor(J, G.get(1, 2, 0))
    B2, B1 = _tensor(J, G.get(2, 1, 0)), _tensor(J, G.get(1, 1, 0))
    return _formula(f, chart.lambdas, A2, A1, B2, B1)


def invariants_in_chart(pencil: Pencil, chart: CanonicalChart) -> list:
    """s_i as functions of the canonical coordinates (written u1..um) via point_transform."""
    if chart.inverse is None:
        raise Undecided("the chart has no rational inverse")
    sides = [point_transform(pencil.side(a), chart.lambdas, chart.inverse) for a in (1, 2)]
    new = Pencil.from_sides(sides[1], sides[0], pencil.eps, pencil.lam)
    G = extract_graded(new)
    m = pencil.m
    f = _metric_of(sides[0])
    _check_diagonal(f, "transformed pencil")
    r = [u(i + 1) for i in range(m)]
    return _formula(f, r, G.get(2, 2, 0), G.get(1, 2, 0), G.get(2, 1, 0), G.get(1, 1, 0))


@dataclass
class Sample:
    point: tuple
    lambdas: tuple
    values: tuple


@dataclass
class CentralInvariants:
    """s_i in the original fields (always), in canonical coordinates (rational charts), samples."""

    chart: CanonicalChart
    in_fields: list
    in_chart: Optional[list] = None
    samples: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.in_fields)

    def closed_form(self) -> Optional[list]:
        """s_i written in l1..lm when the chart route ran."""
        if self.in_chart is None:
            return None
        names = {u(i + 1): param(f"l{i + 1}") for i in range(self.m)}
        return [s.subs(names) for s in self.in_chart]

    def constants(self) -> Optional[list]:
        if all(s.is_constant() for s in self.in_fields):
            return [s.constant_value() for s in self.in_fields]
        return None

    def at(self, point: Sequence) -> list:
        pt = _point(point)
        return [_num(s, pt) for s in self.in_fields]


def sample_points(m: int, n: int, seed: int, domain=None) -> list:
    """``n`` seeded points with u^i in domain[i] (rationals with denominator 1000)."""
    domain = domain or DEFAULT_DOMAIN
    rng = random.Random(seed)
    pts = []
    for _ in range(n):
        pts.append(tuple(Fraction(rng.randint(int(lo * 1000), int(hi * 1000)), 1000)
                         for lo, hi in domain[:m]))
    return pts


def central_invariants(pencil: Pencil, chart: Optional[CanonicalChart] = None, samples: int = 10,
                       seed: int = 0, domain=None) -> CentralInvariants:
    """Central invariants with both routes when the chart is invertible, plus samples.

    Points where the chart or the invariants have a pole are skipped.
    """
    chart = chart or pencil_chart(pencil)
    fields_ = invariants_in_fields(pencil, chart)
    chart_form = None
    if chart.inverse is not None:
        chart_form = invariants_in_chart(pencil, chart)
        back = [s.subs({u(i + 1): l for i, l in enumerate(chart.lambdas)}) for s in chart_form]
        for a, b in zip(back, fields_):
            if not (a - b).is_zero():
                raise Undecided("point transformation and tensor routes disagree")
    out = CentralInvariants(chart, fields_, chart_form)
    tries = 0
    rng_seed = seed
    while len(out.samples) < samples:
        tries += 1
        if tries > 50:
            raise Undecided("could not find admissible sample points in the domain")
        for pt in sample_points(pencil.m, samples - len(out.samples), rng_seed, domain):
            try:
                lams = tuple(chart.at(pt))
                vals = tuple(out.at(pt))
            except (PoleAtPoint, NegativeRadicand):
                continue
            out.samples.append(Sample(pt, lams, vals))
        rng_seed += 1
    return out


def triviality_verdict(s: CentralInvariants) -> tuple[str, str]:
    """("trivial" | "nontrivial", note)."""
    if all(x.is_zero() for x in s.in_fields):
        return "trivial", "all invariants vanish identically"
    if any(not x.has_radicals() for x in s.in_fields if not x.is_zero()):
        return "nontrivial", "a rational invariant is not identically zero"
    for smp in s.samples:
        if any(abs(v) > TOL for v in smp.values):
            return "nontrivial", "nonzero at a sample point"
    return "trivial", "numerically zero at every sample; not a proof"


def depends_only_on_own(s: CentralInvariants, i: int) -> bool:
    """d s_i ^ d lam^i = 0 (s_i is a function of lam^i alone)."""
    if s.m == 1:
        return True
    J = jacobian([s.in_fields[i], s.chart.lambdas[i]])
    return (J[0][0] * J[1][1] - J[0][1] * J[1][0]).is_zero()


def matches_printed(s: CentralInvariants, printed: Sequence, tol: float = TOL) -> list:
    """Per invariant: does s_i(u) equal the printed function of l_i at every sample?"""
    verdicts = []
    for i, text in enumerate(printed):
        expr = _E(text)
        lam_names = {param(f"l{k + 1}"): s.chart.lambdas[k] for k in range(s.m)}
        target = expr.subs(lam_names)
        ok = True
        for smp in s.samples:
            pt = _point(smp.point)
            if abs(_num(target, pt) - smp.values[i]) > tol:
                ok = False
                break
        verdicts.append(ok)
    return verdicts


def trio_pencil(P1: MatrixDiffOp, Q1: MatrixDiffOp, R: MatrixDiffOp, eps: str = "eps") -> Pencil:
    """-(P1 + eps^2 R) - lam Q1: the sign choice that reproduces the published values."""
    e = param(eps)
    return Pencil.from_sides(-(P1 + R.scale(e * e)), Q1, eps)
