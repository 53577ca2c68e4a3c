"""The four first-order families compatible with R2, R3_1, R3_2, R3_3.

Metrics are transcribed by hand; the connections are the output of the
bracket solve (see ``ansatz.ansatz_search``) written in the same parameters.
Pencil rows pair a branch ``k`` of the variety for g (parameters c) with a
branch ``l`` for h (parameters d).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from ..diffop import MatrixDiffOp
from ..errors import NoMatch, NotOnVariety
from ..geometry import FlatPencilResult, Metric, flat_pencil_check, is_flat, levi_civita_residuals
from ..jetcalc import Expression, param, parse_expression, u
from ..linsolve import monomial_rows, rref

Values = Mapping[str, object]


def _p(text: str) -> Expression:
    return parse_expression(text)


@dataclass(frozen=True)
class Branch:
    """One solved piece of the variety: substitutions plus genericity assumptions."""

    label: int
    solved: tuple  # ((name, text), ...) applied in order
    nonzero: tuple = ()

    def substitutions(self, prefix: str = "c") -> dict:
        entries = [(_ren(n, prefix), _rename(_p(t), prefix)) for n, t in self.solved]
        return compose_substitutions(entries).mapping


@dataclass
class Composition:
    mapping: dict
    skipped: list = field(default_factory=list)  # entries whose denominator vanished
    conflicts: list = field(default_factory=list)  # entries contradicting earlier ones


def compose_substitutions(entries, mapping: Optional[dict] = None) -> Composition:
    """Fold ``name = value`` entries into one simultaneous substitution.

    Later values are rewritten through earlier ones.  An entry whose value has
    a vanishing denominator is skipped; an entry for an already fixed name is
    kept only as a consistency check.
    """
    out = Composition(dict(mapping or {}))
    for name, value in entries:
        key = param(name)
        try:
            value = value.subs(out.mapping) if out.mapping else value
        except ZeroDivisionError:
            out.skipped.append(name)
            continue
        if key in out.mapping:
            if not (out.mapping[key] - value).is_zero():
                out.conflicts.append(name)
            continue
        out.mapping = {k: v.subs({key: value}) for k, v in out.mapping.items()}
        out.mapping[key] = value
    return out


@dataclass(frozen=True)
class PencilRule:
    """Row g_{lambda,kl}: alternatives are ORed, entries inside one are ANDed."""

    k: int
    l: int
    alternatives: tuple  # (((name, text), ...), ...); () means no constraint
    nonzero: tuple = ()
    note: str = ""

    @property
    def label(self) -> str:
        return f"g_lambda_{self.k}{self.l}"


@dataclass(frozen=True)
class ParamFamily:
    tag: str
    operator: str
    nparams: int
    metric_text: tuple  # (g11, g12, g22) in c1..cn
    gamma_text: tuple  # [i][j][k] in c1..cn
    variety_text: tuple
    branches: tuple
    pencils: tuple = ()
    excluded: tuple = ()  # (k, l) pairs that do not give flat pencils

    def names(self, prefix: str = "c") -> list[str]:
        return [f"{prefix}{i + 1}" for i in range(self.nparams)]

    def symbols(self, prefix: str = "c") -> list[Expression]:
        return [param(n) for n in self.names(prefix)]

    def metric(self, prefix: str = "c") -> Metric:
        g11, g12, g22 = (_rename(_p(t), prefix) for t in self.metric_text)
        return Metric([[g11, g12], [g12, g22]])

    def connection(self, prefix: str = "c") -> list:
        return [[[_rename(_p(t), prefix) for t in row] for row in plane] for plane in self.gamma_text]

    def variety(self, prefix: str = "c") -> list[Expression]:
        return [_rename(_p(t), prefix) for t in self.variety_text]

    def branch(self, label: int) -> Branch:
        return next(b for b in self.branches if b.label == label)

    def pencil(self, k: int, l: int) -> PencilRule:
        return next(r for r in self.pencils if (r.k, r.l) == (k, l))


def _ren(name: str, prefix: str) -> str:
    return prefix + name[1:] if prefix != "c" and name.startswith("c") else name


def _rename(e: Expression, prefix: str) -> Expression:
    if prefix == "c":
        return e
    return e.subs({param(f"c{i}"): param(f"{prefix}{i}") for i in range(1, 8)})


# -- data ---------------------------------------------------------------------------------

TH1 = ParamFamily(
    "Th1", "R2", 5,
    ("c1*u1 + c2", "c3*u1/2 + c1*u2/2 + c5", "c3*u2 + c4"),
    (
        (("c1/2", "0"), ("c3/2", "0")),
        (("0", "c1/2"), ("0", "c3/2")),
    ),
    (),
    (Branch(1, ()),),
    (PencilRule(1, 1, ((),)),),
)

TH2 = ParamFamily(
    "Th2", "R3_1", 7,
    ("c1*u1 + c2*u2 + c3", "c4*u1 + c1*u2 + c5", "c6*u1 + c4*u2 + c7"),
    (
        (("c1/2", "c2/2"), ("c4/2", "c1/2")),
        (("c4/2", "c1/2"), ("c6/2", "c4/2")),
    ),
    ("c1*c4 - c2*c6", "c3*c4 - c7*c2", "c3*c6 - c1*c7"),
    (
        Branch(1, (("c6", "c4*c1/c2"), ("c7", "c3*c4/c2")), ("c2",)),
        Branch(2, (("c2", "0"), ("c6", "c7*c1/c3"), ("c4", "0")), ("c3",)),
        Branch(3, (("c3", "0"), ("c2", "0"), ("c1", "0"))),
        Branch(4, (("c3", "0"), ("c2", "0"), ("c4", "0"), ("c7", "0")), ("c1",)),
    ),
    (
        PencilRule(1, 1, ((("c4", "d4*c2/d2"),), (("d3", "d2*c3/c2"), ("c1", "d1*c2/d2")))),
        PencilRule(1, 2, ((("d7", "d3*c4/c2"),),)),
        PencilRule(1, 3, ((("d6", "d4*c1/c2"), ("d7", "d4*c3/c2")),)),
        PencilRule(1, 4, ((("d6", "c4*d1/c2"),),)),
        PencilRule(2, 2, ((("d7", "d3*c7/c3"),), (("d1", "d3*c1/c3"),))),
        PencilRule(2, 3, ((("d4", "0"), ("d6", "d7*c1/c3")),)),
        PencilRule(2, 4, ((("d6", "c7*d1/c3"),),)),
        PencilRule(3, 3, ((),)),
        PencilRule(3, 4, ((("c4", "0"), ("c7", "0")),)),
        PencilRule(4, 4, ((),)),
    ),
)

TH3 = ParamFamily(
    "Th3", "R3_2", 6,
    ("c1*u1 + c2*u2", "c4*u1 + c3/u1 + c2*u2^2/(2*u1)", "2*c4*u2 + c6/u1 - c1*u2^2/u1 + c5"),
    (
        (("c1/2", "c2/2"), ("c4", "-c1/2")),
        (("(-c2*u2^2 - 2*c3)/(2*u1^2)", "(c1*u1 + 2*c2*u2)/(2*u1)"),
         ("(c1*u2^2 - c6)/(2*u1^2)", "(c4*u1 - c1*u2)/u1")),
    ),
    ("c2*c6 + 2*c1*c3", "c2*c5", "c1*c5"),
    (
        Branch(1, (("c5", "0"), ("c3", "-c2*c6/(2*c1)")), ("c1",)),
        Branch(2, (("c1", "0"), ("c5", "0"), ("c6", "0")), ("c2",)),
        Branch(3, (("c1", "0"), ("c2", "0"))),
    ),
    (
        PencilRule(1, 1, ((("d6", "d1*c6/c1"),), (("d2", "d1*c2/c1"),))),
        PencilRule(1, 2, ((("d3", "-d2*c6/(2*c1)"),),)),
        PencilRule(1, 3, ((("d3", "-d6*c2/(2*c1)"), ("d5", "0")),)),
        PencilRule(2, 2, ((),)),
        PencilRule(2, 3, ((("d5", "0"), ("d6", "0")),)),
        PencilRule(3, 3, ((),)),
    ),
)

TH4 = ParamFamily(
    "Th4", "R3_3", 6,
    ("c1*u1 + c2*u2 + c3",
     "c4*u1 - c2/(2*u1) + c3*u2/u1 + c2*u2^2/(2*u1)",
     "2*c4*u2 + c1/u1 + c5*u2/u1 - c1*u2^2/u1 + c6"),
    (
        (("c1/2", "c2/2"), ("c4", "-c1/2")),
        (("(-c2*u2^2 - 2*c3*u2 + c2)/(2*u1^2)", "(c1*u1 + 2*c2*u2 + 2*c3)/(2*u1)"),
         ("(c1*u2^2 - c5*u2 - c1)/(2*u1^2)", "(2*c4*u1 - 2*c1*u2 + c5)/(2*u1)")),
    ),
    ("c2*c5 + 2*c1*c3", "c2*c6 - 2*c3*c4", "c1*c6 + c4*c5"),
    (
        Branch(1, (("c5", "-2*c1*c3/c2"), ("c6", "2*c3*c4/c2")), ("c2",)),
        Branch(2, (("c2", "0"), ("c1", "0"), ("c4", "0")), ("c3",)),
        Branch(3, (("c2", "0"), ("c3", "0"), ("c1", "-c4*c5/c6")), ("c6",)),
        Branch(4, (("c2", "0"), ("c3", "0"), ("c6", "0"), ("c4", "0")), ("c5",)),
        Branch(5, (("c2", "0"), ("c3", "0"), ("c5", "0"), ("c6", "0"))),
    ),
    (
        PencilRule(1, 1, ((("d3", "d2*c3/c2"),), (("d1", "d2*c1/c2"), ("d4", "d2*c4/c2")))),
        PencilRule(1, 2, ((("d5", "-2*d3*c1/c2"), ("d6", "2*d3*c4/c2")),)),
        PencilRule(1, 3, ((("d6", "2*d4*c3/(2*c2)"),),), ("d4", "c3")),
        PencilRule(1, 4, ((("d5", "-2*d4*c3/(2*c2)"),),), ("d4", "c3")),
        PencilRule(1, 5, ((("c3", "0"),),)),
        PencilRule(2, 2, ((),)),
        PencilRule(3, 3, ((("d5", "0"), ("d6", "0")), (("d5", "d6*c5/c6"),), (("d4", "d6*c4/c6"),))),
        PencilRule(3, 4, ((("d1", "-d5*c4/c6"),),)),
        PencilRule(3, 5, ((("d1", "-d4*c5/c6"),),)),
        PencilRule(4, 4, ((),)),
        PencilRule(4, 5, ((("d4", "0"),),)),
        PencilRule(5, 5, ((),)),
    ),
    excluded=((2, 3), (2, 4), (2, 5)),
)

# rows of the R3_3 table that fail as printed, with conditions under which the pencil is flat
TH4_AMENDED_ROWS = (
    PencilRule(1, 4, ((("d5", "-2*d1*c3/c2"),),), note="d1 in place of d4"),
    PencilRule(3, 3, ((("d5", "0"), ("d6", "0"), ("d1", "-d4*c5/c6")),), note="d1 fixed when d5 = d6 = 0"),
)

# the same rows with the alternative reading "2 d4 c3 / c2" of the printed fraction
TH4_ROWS_13_14_LITERAL_DOUBLE = (
    PencilRule(1, 3, ((("d6", "2*d4*c3/c2"),),), ("d4", "c3"), "numerator doubled"),
    PencilRule(1, 4, ((("d5", "-2*d4*c3/c2"),),), ("d4", "c3"), "numerator doubled"),
)

FAMILIES = {f.tag: f for f in (TH1, TH2, TH3, TH4)}
BY_OPERATOR = {f.operator: f for f in FAMILIES.values()}


def family(tag: str) -> ParamFamily:
    key = {"theorem1": "Th1", "theorem2": "Th2", "theorem3": "Th3", "theorem4": "Th4"}.get(tag.lower(), tag)
    if key in BY_OPERATOR:
        return BY_OPERATOR[key]
    try:
        return FAMILIES[key]
    except KeyError:
        raise KeyError(f"unknown family {tag!r}; known: {sorted(FAMILIES)}") from None


# -- operations ---------------------------------------------------------------------------

def _assignment(fam: ParamFamily, values: Values, prefix: str) -> dict:
    out = {}
    for name, v in values.items():
        name = str(name)
        if not name.startswith(prefix):
            raise KeyError(f"parameter {name!r} does not belong to prefix {prefix!r}")
        out[param(name)] = Expression.coerce(v)
    return out


def instantiate(fam: ParamFamily, values: Optional[Values] = None, *, prefix: str = "c",
                complete: bool = False):
    """(Metric, Connection, operator) of the member with the given parameters.

    Parameters absent from ``values`` stay symbolic unless ``complete`` is
    set, in which case they are zero (the convention "all other c_i = 0").
    """
    values = dict(values or {})
    if complete:
        for n in fam.names(prefix):
            values.setdefault(n, 0)
    sub = _assignment(fam, values, prefix)
    g = fam.metric(prefix).subs(sub)
    gamma = [[[x.subs(sub) for x in row] for row in plane] for plane in fam.connection(prefix)]
    return g, gamma, MatrixDiffOp.hydrodynamic(g.rows(), gamma)


def on_variety(fam: ParamFamily, values: Values, *, prefix: str = "c", complete: bool = False) -> bool:
    """All variety polynomials vanish (missing parameters symbolic, or zero if ``complete``)."""
    if complete:
        values = {**{n: 0 for n in fam.names(prefix)}, **values}
    sub = _assignment(fam, values, prefix)
    return all(q.subs(sub).is_zero() for q in fam.variety(prefix))


def branch_member(fam: ParamFamily, label: int, prefix: str = "c"):
    """Generic member of a branch: (Metric, Connection) with remaining parameters symbolic."""
    sub = fam.branch(label).substitutions(prefix)
    g = fam.metric(prefix).subs(sub)
    gamma = [[[x.subs(sub) for x in row] for row in plane] for plane in fam.connection(prefix)]
    return g, gamma, sub


def levi_civita_variety(fam: ParamFamily, prefix: str = "c") -> list[Expression]:
    """Parameter conditions read from the Levi-Civita residuals of the stored (g, Gamma)."""
    from ..geometry import parameter_conditions

    res = levi_civita_residuals(fam.metric(prefix), fam.connection(prefix))
    return parameter_conditions(res, fam.names(prefix))


def same_quadratic_span(a: Sequence[Expression], b: Sequence[Expression]) -> bool:
    """Do two lists of parameter polynomials span the same linear space?"""
    from ..linsolve import rank

    polys = list(a) + list(b)
    # columns = polynomials, rows = monomials; compare ranks of the column sets
    cols = monomial_rows([[p] for p in polys], len(polys))
    T = [[row.get(n, 0) for n in range(len(polys))] for row in cols]

    def rank_of(idx):
        rows = [{j: T[r][c] for j, c in enumerate(idx) if T[r][c] != 0} for r in range(len(T))]
        return rank(rows, len(idx))

    ia = list(range(len(a)))
    ib = list(range(len(a), len(polys)))
    ra, rb, rall = rank_of(ia), rank_of(ib), rank_of(ia + ib)
    return ra == rb == rall


def branch_is_flat(fam: ParamFamily, label: int) -> bool:
    g, _, _ = branch_member(fam, label)
    return is_flat(g)


def rule_substitution(fam: ParamFamily, rule: PencilRule, alternative: int) -> Composition:
    """Row constraints first, then the branch solutions of both endpoints."""
    entries = [(n, _p(t)) for n, t in rule.alternatives[alternative]]
    for prefix, label in (("c", rule.k), ("d", rule.l)):
        entries += [(_ren(n, prefix), _rename(_p(t), prefix)) for n, t in fam.branch(label).solved]
    return compose_substitutions(entries)


def pencil_pair(fam: ParamFamily, k: int, l: int, substitution: Optional[dict] = None):
    """(g, Gamma_g, h, Gamma_h) for branches k (c) and l (d) under a substitution."""
    if substitution is None:
        substitution = {**fam.branch(k).substitutions("c"), **fam.branch(l).substitutions("d")}
    g = fam.metric("c").subs(substitution)
    h = fam.metric("d").subs(substitution)
    gg = [[[x.subs(substitution) for x in row] for row in plane] for plane in fam.connection("c")]
    gh = [[[x.subs(substitution) for x in row] for row in plane] for plane in fam.connection("d")]
    return g, gg, h, gh


@dataclass
class RowCheck:
    rule: PencilRule
    alternative: int
    result: Optional[FlatPencilResult]
    on_variety: bool
    composition: Composition
    error: str = ""

    @property
    def ok(self) -> bool:
        return bool(self.result) and self.on_variety and not self.composition.conflicts

    def diagnostic(self) -> str:
        parts = []
        if self.error:
            parts.append(self.error)
        if self.result is not None:
            parts.append(self.result.diagnostic())
        if not self.on_variety:
            parts.append("an endpoint leaves the variety")
        if self.composition.skipped:
            parts.append("dropped branch entries " + ", ".join(self.composition.skipped))
        if self.composition.conflicts:
            parts.append("row contradicts branch on " + ", ".join(self.composition.conflicts))
        return "; ".join(parts)


def check_pencil_rule(fam: ParamFamily, rule: PencilRule, alternative: int = 0) -> RowCheck:
    from ..errors import DegeneratePencil

    comp = rule_substitution(fam, rule, alternative)
    sub = comp.mapping
    inside = all(q.subs(sub).is_zero() for q in fam.variety("c") + fam.variety("d"))
    g, gg, h, gh = pencil_pair(fam, rule.k, rule.l, sub)
    try:
        res = flat_pencil_check(g, h, gamma_g=gg, gamma_h=gh)
    except DegeneratePencil as exc:
        return RowCheck(rule, alternative, None, inside, comp, str(exc))
    return RowCheck(rule, alternative, res, inside, comp)


def check_pencil_table(fam: ParamFamily, rules: Optional[Sequence[PencilRule]] = None) -> list[RowCheck]:
    """Every alternative of every row; a row passes when one of its alternatives does."""
    out = []
    for rule in rules if rules is not None else fam.pencils:
        for a in range(len(rule.alternatives)):
            out.append(check_pencil_rule(fam, rule, a))
    return out


def check_pencil_at(fam: ParamFamily, c: Values, d: Values) -> FlatPencilResult:
    """flat_pencil_check for two concrete members with their stored connections."""
    g, gg, _ = instantiate(fam, c, prefix="c", complete=True)
    h, gh, _ = instantiate(fam, d, prefix="d", complete=True)
    return flat_pencil_check(g, h, gamma_g=gg, gamma_h=gh)


def branch_point(fam: ParamFamily, label: int, prefix: str, rng) -> dict:
    """A random point of one branch: free parameters nonzero integers, solved ones computed."""
    br = fam.branch(label)
    solved = {_ren(n, prefix) for n, _ in br.solved}
    values = {}
    for n in fam.names(prefix):
        if n not in solved:
            values[n] = Fraction(rng.choice([-5, -4, -3, -2, -1, 1, 2, 3, 4, 5, 6, 7]))
    point = {param(k): v for k, v in values.items()}
    for n, e in br.substitutions(prefix).items():
        values[str(n)] = e.subs(point).constant_value()
    return values


def excluded_pair_fails(fam: ParamFamily, k: int, l: int, seed: int = 0) -> tuple[bool, dict, dict]:
    """Does the pencil of generic members of branches k (c) and l (d) fail to be flat?"""
    import random

    rng = random.Random(seed)
    c = branch_point(fam, k, "c", rng)
    d = branch_point(fam, l, "d", rng)
    from ..errors import DegeneratePencil

    try:
        res = check_pencil_at(fam, c, d)
    except DegeneratePencil:
        return True, c, d
    return not res.ok, c, d


# -- pencil admissibility ------------------------------------------------------------------

@dataclass
class Admissibility:
    admissible: bool
    labels: list = field(default_factory=list)
    branches: tuple = ()

    def __bool__(self):
        return self.admissible


def _numeric(v) -> Fraction:
    e = Expression.coerce(v)
    if not e.is_constant():
        raise TypeError("branch detection needs numeric parameters")
    return e.constant_value()


def _branches_of(fam: ParamFamily, values: Mapping[str, Fraction], prefix: str) -> list[int]:
    out = []
    for b in fam.branches:
        ok = all(values.get(_ren(n, prefix), 0) != 0 for n in b.nonzero)
        if not ok:
            continue
        sub = {}
        for name, text in b.solved:
            target = _rename(_p(text), prefix).subs({param(k): v for k, v in values.items()})
            if not target.is_constant() or target.constant_value() != values.get(_ren(name, prefix), 0):
                ok = False
                break
        if ok:
            out.append(b.label)
    return out


def pencil_admissible(fam: ParamFamily, c: Values, d: Values) -> Admissibility:
    """Is the line c - lam d contained in the variety?  Reports matching table rows."""
    c = {**{n: 0 for n in fam.names("c")}, **c}
    d = {**{n: 0 for n in fam.names("d")}, **d}
    if not on_variety(fam, c, prefix="c"):
        raise NotOnVariety("the point c is not on the variety")
    if not on_variety(fam, d, prefix="d"):
        raise NotOnVariety("the point d is not on the variety")
    lam = param("lam")
    line = {}
    for i, n in enumerate(fam.names("c")):
        cv = Expression.coerce(c.get(n, 0))
        dv = Expression.coerce(d.get(f"d{i + 1}", 0))
        line[param(n)] = cv - lam * dv
    ok = all(q.subs(line).is_zero() for q in fam.variety("c"))
    labels: list[str] = []
    try:
        cn = {n: _numeric(c.get(n, 0)) for n in fam.names("c")}
        dn = {n: _numeric(d.get(n, 0)) for n in fam.names("d")}
    except TypeError:
        return Admissibility(ok, labels)
    bc, bd = tuple(_branches_of(fam, cn, "c")), tuple(_branches_of(fam, dn, "d"))
    point = {param(k): v for k, v in {**cn, **dn}.items()}
    for rule in fam.pencils:
        if rule.k not in bc or rule.l not in bd:
            continue
        for alt in rule.alternatives:
            holds = True
            for name, text in alt:
                try:
                    val = _p(text).subs(point)
                except ZeroDivisionError:
                    holds = False
                    break
                if not (val - point.get(param(name), Fraction(0))).is_zero():
                    holds = False
                    break
            if holds:
                labels.append(rule.label)
                break
    return Admissibility(ok, labels, (bc, bd))


# -- matching known operators --------------------------------------------------------------

@dataclass
class SideMatch:
    values: dict  # parameter name -> Expression
    r_scale: Expression  # coefficient of the canonical R inside this operator


@dataclass
class KnownMatch:
    family: str
    operator: str
    sides: list

    def values(self, side: int) -> dict:
        return self.sides[side].values


def _split(P: MatrixDiffOp):
    """(first-order hydrodynamic part, remainder of higher derivative order)."""
    from ..errors import NotHomogeneous
    from ..jetcalc import homogeneous_degree

    low, high = {}, {}
    for i, j, k, a in P.items():
        try:
            deg = homogeneous_degree(a)
        except NotHomogeneous:
            raise NoMatch(f"entry ({i + 1},{j + 1}) mixes degrees at D_x^{k}") from None
        (low if k + deg == 1 else high)[(i, j, k)] = a
    return MatrixDiffOp.from_coeffs(P.m, low), MatrixDiffOp.from_coeffs(P.m, high)


def _solve_linear_symbolic(columns: Sequence[Sequence[Expression]], target: Sequence[Expression]):
    """x with sum_n x_n columns[n] == target; columns are u-dependent, free of symbols."""
    from ..jetcalc.expression import REGISTRY

    n = len(columns)
    ncomp = len(target)
    # rows: for each component, monomials in u of numerators over a common denominator
    rows = []
    rhs = []
    for c in range(ncomp):
        exprs = [columns[a][c] for a in range(n)] + [target[c]]
        den = Expression.const(1)
        for e in exprs:
            d = e.den
            den = den * d / _gcd_expr(den, d)
        scaled = [(e * den) for e in exprs]
        jets = set()
        for e in scaled:
            jets |= {v for v in e.variables() if REGISTRY.vars[v].kind == "u"}
        jets = sorted(jets)
        keyed: dict = {}
        for a, e in enumerate(scaled):
            for mono, co in (e.coefficients(jets).items() if jets else [((), e)]):
                keyed.setdefault(mono, {})[a] = co
        for mono, d in keyed.items():
            rows.append({a: d[a] for a in range(n) if a in d})
            rhs.append(d.get(n, Expression.const(0)))
    for r in rows:
        for v in r.values():
            if not v.is_constant():
                raise NoMatch("family coefficients are not numeric")
    nr = len(rows)
    aug = [{**{a: v.constant_value() for a, v in r.items()}, n + i: 1} for i, r in enumerate(rows)]
    dense, pivots = rref(aug, n + nr)
    x = [Expression.const(0)] * n
    for row, p in zip(dense, pivots):
        comb = Expression.const(0)
        for i in range(nr):
            if row[n + i] != 0:
                comb = comb + rhs[i] * row[n + i]
        if p >= n:
            if not comb.is_zero():
                return None
            continue
        x[p] = comb
    return x


def _gcd_expr(a: Expression, b: Expression) -> Expression:
    na, da, _ = a.polys()
    nb, db, _ = b.polys()
    return Expression.from_polys(na.gcd(nb), da)


def _match_side(fam: ParamFamily, P: MatrixDiffOp, prefix: str) -> SideMatch:
    from ..diffop import equal_up_to_scale
    from .canonical import canonical

    low, high = _split(P)
    R = canonical(fam.operator)
    if high.is_zero():
        kappa = Expression.const(0)
    else:
        kappa = equal_up_to_scale(high, R)
        if kappa is None:
            raise NoMatch(f"higher-order part is not a multiple of {fam.operator}")
    names = fam.names(prefix)
    syms = fam.symbols(prefix)
    g = fam.metric(prefix)
    gam = fam.connection(prefix)

    def flat(op):
        return [op.coeff(i, j, k) for i in range(2) for j in range(2) for k in (0, 1)]

    columns = []
    for s in syms:
        unit = {t: (1 if t == s else 0) for t in syms}
        gs = g.subs(unit)
        gms = [[[x.subs(unit) for x in row] for row in plane] for plane in gam]
        columns.append(flat(MatrixDiffOp.hydrodynamic(gs.rows(), gms)))
    x = _solve_linear_symbolic(columns, flat(low))
    if x is None:
        raise NoMatch(f"first-order part is not a member of {fam.tag}")
    values = {n: v for n, v in zip(names, x)}
    member = instantiate(fam, values, prefix=prefix)[2]
    if not (member - low).is_zero():
        raise NoMatch(f"first-order part is not a member of {fam.tag}")
    return SideMatch(values, kappa)


def match_known_system(pair: Sequence[MatrixDiffOp], family_tag: Optional[str] = None) -> KnownMatch:
    """Parameters (c for the first operator, d for the second) and R scales of a known pair."""
    ops = list(pair)
    candidates = [family(family_tag)] if family_tag else list(FAMILIES.values())
    last = None
    for fam in candidates:
        if ops[0].m != 2:
            break
        try:
            sides = [_match_side(fam, P, prefix) for P, prefix in zip(ops, ("c", "d"))]
        except NoMatch as exc:
            last = exc
            continue
        if all(s.r_scale.is_zero() for s in sides) and family_tag is None and fam.tag != "Th1":
            continue
        return KnownMatch(fam.tag, fam.operator, sides)
    raise NoMatch(str(last) if last else "no family matches")
