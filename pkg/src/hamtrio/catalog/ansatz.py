"""Re-derivation of the first-order families compatible with a canonical operator.

Every g^{ij} and Gamma^{ij}_k is an unknown linear combination of basis
functions.  Skew-adjointness and [P_1, R] = 0 are linear in P_1, so each basis
operator is bracketed with R once and the identities are collected into one
exact linear system whose nullspace is the family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from ..diffop import MatrixDiffOp, ScalarDiffOp, adjoint
from ..errors import AnsatzTooSmall
from ..geometry import Metric, levi_civita_residuals, parameter_conditions
from ..jetcalc import Expression, euler, jet_order, param, parse_expression, u
from ..linsolve import monomial_rows, nullspace, rank, solve
from ..poisson import BRACKET_JET_CAP, schouten_integrand
from .canonical import CANONICAL

G_BASIS_TEXT = ("1", "u1", "u2", "u2^2/u1", "u2/u1", "1/u1")
# first derivatives of the metric basis also occur in the connection
GAMMA_EXTRA_TEXT = ("1/u1^2", "u2/u1^2", "u2^2/u1^2")

EXPECTED_DIMENSION = {"R2": 5, "R3_1": 7, "R3_2": 6, "R3_3": 6}


@dataclass
class Ansatz:
    g_basis: tuple
    gamma_basis: tuple

    @staticmethod
    def default() -> "Ansatz":
        g = tuple(parse_expression(t) for t in G_BASIS_TEXT)
        return Ansatz(g, g + tuple(parse_expression(t) for t in GAMMA_EXTRA_TEXT))

    @staticmethod
    def metric_only() -> "Ansatz":
        g = tuple(parse_expression(t) for t in G_BASIS_TEXT)
        return Ansatz(g, g)


@dataclass
class Unknown:
    kind: str  # "g" or "gamma"
    i: int
    j: int
    k: int  # derivative index for gamma, -1 for g
    basis: int
    func: Expression

    def operator(self, m: int) -> MatrixDiffOp:
        if self.kind == "g":
            term = ScalarDiffOp({1: self.func})
        else:
            term = ScalarDiffOp({0: self.func * u(self.k + 1, 1)})
        grid = [[ScalarDiffOp() for _ in range(m)] for _ in range(m)]
        grid[self.i][self.j] = term
        return MatrixDiffOp(grid)


@dataclass
class AnsatzResult:
    tag: str
    unknowns: list
    solutions: list  # nullspace basis vectors
    m: int = 2
    params: tuple = field(default=())

    @property
    def dimension(self) -> int:
        return len(self.solutions)

    def metric(self, vector: Sequence[Fraction]) -> list[list[Expression]]:
        m = self.m
        g = [[Expression.const(0)] * m for _ in range(m)]
        for x, unk in zip(vector, self.unknowns):
            if x and unk.kind == "g":
                g[unk.i][unk.j] = g[unk.i][unk.j] + unk.func * x
        return g

    def connection(self, vector: Sequence[Fraction]):
        m = self.m
        gam = [[[Expression.const(0)] * m for _ in range(m)] for _ in range(m)]
        for x, unk in zip(vector, self.unknowns):
            if x and unk.kind == "gamma":
                gam[unk.i][unk.j][unk.k] = gam[unk.i][unk.j][unk.k] + unk.func * x
        return gam

    def symbolic(self, names: Optional[Sequence[str]] = None):
        """(g, Gamma) of the general member sum_a t_a v_a."""
        names = names or [f"t{a + 1}" for a in range(self.dimension)]
        vec = [Expression.const(0)] * len(self.unknowns)
        for name, v in zip(names, self.solutions):
            t = param(name)
            vec = [acc + t * x if x else acc for acc, x in zip(vec, v)]
        return self.metric(vec), self.connection(vec)

    def g_part(self, vector) -> list[Fraction]:
        return [x for x, unk in zip(vector, self.unknowns) if unk.kind == "g"]

    def g_unknowns(self) -> list:
        return [unk for unk in self.unknowns if unk.kind == "g"]


def _unknowns(m: int, ansatz: Ansatz) -> list[Unknown]:
    out = []
    for i in range(m):
        for j in range(m):
            for b, f in enumerate(ansatz.g_basis):
                out.append(Unknown("g", i, j, -1, b, f))
    for i in range(m):
        for j in range(m):
            for k in range(m):
                for b, f in enumerate(ansatz.gamma_basis):
                    out.append(Unknown("gamma", i, j, k, b, f))
    return out


def _skew_components(B: MatrixDiffOp, m: int) -> list[Expression]:
    S = B + adjoint(B)
    return [S.coeff(i, j, p) for i in range(m) for j in range(m) for p in (0, 1)]


def _bracket_components(B: MatrixDiffOp, R: MatrixDiffOp, m: int) -> list[Expression]:
    T = schouten_integrand(B, R, check=False)
    with jet_order(BRACKET_JET_CAP):
        return [euler(T, ("psi", 1, i + 1)) for i in range(m)]


def ansatz_search(R, ansatz: Optional[Ansatz] = None, *, tag: Optional[str] = None) -> AnsatzResult:
    """Solve skew-adjointness and [P_1, R] = 0 over the ansatz space."""
    if isinstance(R, str):
        tag = R
        R = CANONICAL[R].op
    ansatz = ansatz or Ansatz.default()
    m = R.m
    unknowns = _unknowns(m, ansatz)
    skew, brk = [], []
    for unk in unknowns:
        B = unk.operator(m)
        skew.append(_skew_components(B, m))
        brk.append(_bracket_components(B, R, m))
    rows = monomial_rows(skew, len(unknowns)) + monomial_rows(brk, len(unknowns))
    basis = nullspace(rows, len(unknowns))
    result = AnsatzResult(tag or "custom", unknowns, basis, m)
    expected = EXPECTED_DIMENSION.get(tag or "")
    if expected is not None and result.dimension < expected:
        raise AnsatzTooSmall(
            f"solution space of dimension {result.dimension} < {expected} for {tag}"
        )
    return result


# -- alignment with a hard-coded family --------------------------------------------------

def coordinates(f: Expression, basis: Sequence[Expression]) -> Optional[list[Fraction]]:
    """Coefficients of ``f`` in ``basis`` (None if outside the span)."""
    cols = [[b] for b in basis] + [[f]]
    rows = monomial_rows(cols, len(cols))
    sol = solve([{j: v for j, v in r.items() if j < len(basis)} for r in rows],
                [r.get(len(basis), 0) for r in rows], len(basis))
    return sol


def family_g_vectors(result: AnsatzResult, metric, params: Sequence[str]) -> list[list[Fraction]]:
    """For each parameter, the coordinates of d g / d param in the g-unknown layout."""
    m = result.m
    vecs = []
    gunk = result.g_unknowns()
    for p in params:
        P = param(p)
        vec = [Fraction(0)] * len(gunk)
        for i in range(m):
            for j in range(m):
                entry = Expression.coerce(metric[i][j]).coeff(P, 1)
                if entry.is_zero():
                    continue
                basis = [unk.func for unk in gunk if unk.i == i and unk.j == j]
                slots = [n for n, unk in enumerate(gunk) if unk.i == i and unk.j == j]
                coords = coordinates(entry, basis)
                if coords is None:
                    raise AnsatzTooSmall(f"g^{i + 1}{j + 1} of the family is outside the ansatz")
                for s, x in zip(slots, coords):
                    vec[s] = x
        vecs.append(vec)
    return vecs


@dataclass
class Alignment:
    matches: bool
    dimension: int
    metric: list
    connection: list
    params: tuple
    note: str = ""


def align(result: AnsatzResult, metric, params: Sequence[str]) -> Alignment:
    """Express the solution space in the family's own parameters.

    Succeeds when the metric parts of the nullspace span exactly the family's
    metrics and determine the connection (projection onto g is injective).
    """
    target = family_g_vectors(result, metric, params)
    gparts = [result.g_part(v) for v in result.solutions]
    ncols = len(gparts[0]) if gparts else 0

    def as_rows(vs):
        return [{j: x for j, x in enumerate(v) if x != 0} for v in vs]

    r_sol = rank(as_rows(gparts), ncols)
    r_tgt = rank(as_rows(target), ncols)
    r_all = rank(as_rows(gparts + target), ncols)
    injective = r_sol == len(gparts)
    same = r_sol == r_tgt == r_all and len(params) == r_tgt
    if not (same and injective):
        return Alignment(False, result.dimension, [], [], tuple(params),
                         f"rank(solution g)={r_sol}, rank(family)={r_tgt}, joint={r_all}")
    # express each family direction through the solution basis
    m = result.m
    vec = [Expression.const(0)] * len(result.unknowns)
    cols = list(zip(*gparts)) if gparts else []
    for p, w in zip(params, target):
        rows = [{a: c[a] for a in range(len(gparts)) if c[a] != 0} for c in cols]
        alpha = solve(rows, w, len(gparts))
        full = [sum((alpha[a] * result.solutions[a][n] for a in range(len(gparts))), Fraction(0))
                for n in range(len(result.unknowns))]
        P = param(p)
        vec = [acc + P * x if x else acc for acc, x in zip(vec, full)]
    return Alignment(True, result.dimension, result.metric(vec), result.connection(vec), tuple(params))


def variety_from_connection(metric, connection, params: Sequence[str]) -> list[Expression]:
    """Parameter conditions making (g, Gamma) Levi-Civita."""
    res = levi_civita_residuals(Metric(metric), connection)
    return parameter_conditions(res, params)
