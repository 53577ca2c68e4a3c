"""Known bi-Hamiltonian systems and the three new trios, as operator data."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..diffop import MatrixDiffOp, ScalarDiffOp
from ..jetcalc import Expression, param, parse_expression, sqrt, u
from .canonical import D, canonical, mult, sandwich, symmetrized

Dx2 = ScalarDiffOp.dx(2)
Dx3 = ScalarDiffOp.dx(3)


def _half_sym(a) -> ScalarDiffOp:
    """(1/2)(a D_x + D_x a)."""
    return symmetrized(a).scale(Expression.const(1) / 2)


# -- R2 systems ---------------------------------------------------------------------------

def cohomology_operator(a=None, alpha=None, beta=None, gamma=None, c=None, epsilon=None) -> MatrixDiffOp:
    """Six-parameter family of operators from the cohomology of curves."""
    a = param("a") if a is None else Expression.coerce(a)
    alpha = param("alpha") if alpha is None else Expression.coerce(alpha)
    beta = param("beta") if beta is None else Expression.coerce(beta)
    gamma = param("gamma") if gamma is None else Expression.coerce(gamma)
    c = param("c") if c is None else Expression.coerce(c)
    epsilon = param("epsilon") if epsilon is None else Expression.coerce(epsilon)
    u1, u2 = u(1), u(2)
    e11 = ScalarDiffOp({1: 2 * a * u1 + alpha, 0: a * u(1, 1), 3: c})
    e12 = ScalarDiffOp({1: a * u2 + beta, 2: gamma})
    e21 = mult(a) * D * mult(u2) + ScalarDiffOp({1: beta, 2: -gamma})
    e22 = ScalarDiffOp({1: epsilon})
    return MatrixDiffOp([[e11, e12], [e21, e22]])


def kaup_broer():
    u1, u2 = u(1), u(2)
    B1 = MatrixDiffOp([[0, D], [D, 0]])
    B2 = MatrixDiffOp([[2 * D, D * mult(u1) - Dx2], [mult(u1) * D + Dx2, symmetrized(u2)]])
    return B1, B2


def kaup_broer_flow(alpha=None, beta=None) -> list[Expression]:
    from ..jetcalc import total_derivative as Dt

    alpha = param("alpha") if alpha is None else Expression.coerce(alpha)
    beta = param("beta") if beta is None else Expression.coerce(beta)
    u1, u2 = u(1), u(2)
    return [
        Dt(u1**2 / 2 + u2 + beta * u(1, 1)),
        Dt(u1 * u2 + alpha * u(1, 2) - beta * u(2, 1)),
    ]


# -- R3_1 systems -------------------------------------------------------------------------

def dww():
    """Dispersive water waves operators B0, B1, B2 (up to a Miura map)."""
    u1, u2 = u(1), u(2)
    q = Expression.const(1) / 4
    L = Dx3.scale(q) + _half_sym(u1)
    B0 = MatrixDiffOp([[-_half_sym(u2), D], [D, 0]])
    B1 = MatrixDiffOp([[L, 0], [0, D]])
    B2 = MatrixDiffOp([[0, L], [L, _half_sym(u2)]])
    return B0, B1, B2


def dww_flow() -> list[Expression]:
    u1, u2 = u(1), u(2)
    return [
        u(2, 3) / 4 + u2 * u(1, 1) / 2 + u1 * u(2, 1),
        u(1, 1) + 3 * u2 * u(2, 1) / 2,
    ]


def harry_dym(alpha=None):
    alpha = param("alpha") if alpha is None else Expression.coerce(alpha)
    u1, u2 = u(1), u(2)
    L = Dx3.scale(Expression.const(1) / 4) - D.scale(alpha)
    B0 = MatrixDiffOp([[-_half_sym(u1), -_half_sym(u2)], [-_half_sym(u2), 0]])
    B1 = MatrixDiffOp([[L, 0], [0, -_half_sym(u2)]])
    B2 = MatrixDiffOp([[0, L], [L, _half_sym(u1)]])
    return B0, B1, B2


def harry_dym_flow(alpha=None) -> list[Expression]:
    from ..jetcalc import total_derivative as Dt

    alpha = param("alpha") if alpha is None else Expression.coerce(alpha)
    u1, u2 = u(1), u(2)
    w = 1 / sqrt(u2)
    return [
        Dt(w / 4, 3) - alpha * Dt(w),
        u1 * Dt(w) + u(1, 1) * w / 2,
    ]


# -- printed identifications --------------------------------------------------------------

@dataclass(frozen=True)
class Identification:
    """Parameter values as printed next to a known system."""

    system: str
    family: str
    c: dict
    d: dict = field(default_factory=dict)
    r_scale: Optional[str] = None


PRINTED_IDENTIFICATIONS = {
    "cohomology": Identification("cohomology", "Th1", {"c1": "2*a", "c2": "alpha", "c4": "epsilon"}),
    "kaup_broer": Identification("kaup_broer", "Th1", {"c2": "2", "c3": "2"}, r_scale="-1"),
    "dww": Identification("dww", "Th2", {"c2": "-1/2", "c5": "1"}, {"d4": "1/2"}, "1/4"),
    "harry_dym": Identification("harry_dym", "Th2", {"c1": "-1/2"}, {"d5": "-alpha", "d6": "1/2"}, "1/4"),
}


# -- the three new trios ------------------------------------------------------------------

@dataclass
class Example:
    """A trio (P1, Q1, R) with Casimirs of Q1 and the printed data that goes with it."""

    name: str
    family: str
    c: dict
    d: dict
    casimirs: dict  # name -> density
    printed_flows: dict = field(default_factory=dict)  # name -> (F1, F2) texts
    chart: tuple = ()  # printed canonical coordinates
    invariants: tuple = ()  # printed central invariants in terms of l1, l2
    chart_order: Optional[tuple] = None  # relabeling after sorting the eigenvalues decreasingly
    chart_inverse: Optional[tuple] = None  # u(l), written in u1, u2 standing for l1, l2
    domain: Optional[tuple] = None  # sampling box where the printed branches hold

    def trio(self):
        from .families import family, instantiate

        fam = family(self.family)
        P1 = instantiate(fam, self.c, prefix="c", complete=True)[2]
        Q1 = instantiate(fam, self.d, prefix="d", complete=True)[2]
        return P1, Q1, canonical(fam.operator)

    def casimir(self, name: str) -> Expression:
        return parse_expression(self.casimirs[name])

    def pencil(self):
        from ..invariants import trio_pencil

        return trio_pencil(*self.trio())

    def canonical_chart(self, pencil=None):
        from ..invariants import DEFAULT_DOMAIN, pencil_chart

        box = self.domain or DEFAULT_DOMAIN
        base = tuple(Fraction(lo + hi, 2) for lo, hi in box)
        chart = pencil_chart(pencil or self.pencil(), base, self.chart_order)
        return chart.with_inverse(self.chart_inverse) if self.chart_inverse else chart


EXAMPLE45 = Example(
    "example45", "Th3",
    {"c1": -1, "c6": -1},
    {"d4": -1},
    {"C1": "u1", "C2": "u2/u1"},
    {
        "C1": ("-u1x/2", "-u2x/2"),
        "C2": (
            "3/2*u2x/u1 - 3/2*u2*u1x/u1^2 - u1xxx/u1^3 + 9*u1x*u1xx/u1^4 - 12*u1x^3/u1^5",
            "3/2*(1 - u2^2)*u1x/u1^3 + 3/2*u2*u2x/u1^2 - 30*u2*u1x^3/u1^6"
            " + 10*u2x*u1x^2/u1^5 + 12*u2x*u1x^2/u1^5"
            " - 3*u2x*u1xx/u1^4 - 2*u2*u1xxx/u1^4 - u2xx*u1x/u1^4",
        ),
    },
    ("(u2 + 1)/u1", "(u2 - 1)/u1"),
    ("1/2", "-1/2"),
    chart_inverse=("2/(u1 - u2)", "(u1 + u2)/(u1 - u2)"),
)

EXAMPLE46 = Example(
    "example46", "Th3",
    {"c2": 2, "c4": 1},
    {"d3": -1},
    {"C1": "u1^2/2", "C2": "u2"},
    {
        "C1": ("u1x", "u2x"),
        "C2": ("2*u2*u1x + u1*u2x", "u1*u1x + 2*u2*u2x - u1x*u1xx/u1^2 + u1xxx/u1"),
    },
    ("(u1 + u2)^2", "(u1 - u2)^2"),
    ("-1/(8*sqrt(l1))", "1/(8*sqrt(l2))"),
    domain=((2, 3), (1, 2)),  # u1 > u2, so sqrt(l2) = u1 - u2
)

EXAMPLE47 = Example(
    "example47", "Th4",
    {"c1": 1, "c2": -1},
    {"d3": -1, "d5": -2},
    {"C1": "u1 - u2", "C2": "sqrt(u2^2 - 2*u1*u2)"},
    {},
    ("-(u2^2 - 1)/(2*u2)", "(4*u1^2 - 4*u1*u2 + u2^2 - 1)/(2*(2*u1 - u2))"),
    ("(l1*sqrt(l1^2 + 1) - l1^2 - 1)/(2*(l1^2 + 1))",
     "-(l2*sqrt(l2^2 + 1) + l2^2 + 1)/(2*(l2^2 + 1))"),
    chart_order=(1, 0),
    domain=((2, 3), (1, 2)),  # u2 > 0 and 2 u1 > u2 pick the printed square roots
)

EXAMPLES = {e.name: e for e in (EXAMPLE45, EXAMPLE46, EXAMPLE47)}

# printed first-order operators of the new trios, entry texts of g and of the u_x part
PRINTED_TRIO_METRICS = {
    "example45": (
        ("-u1", "0", "(u2^2 - 1)/u1"),
        ("0", "-u1", "-2*u2"),
    ),
    "example46": (
        ("2*u2", "(u1^2 + u2^2)/u1", "2*u2"),
        ("0", "-1/u1", "0"),
    ),
    "example47": (
        ("u1 - u2", "(1 - u2^2)/(2*u1)", "(1 - u2^2)/u1"),
        ("-1", "-u2/u1", "-2*u2/u1"),
    ),
}

# parameter values printed next to each trio (before completing "all others zero")
PRINTED_TRIO_PARAMETERS = {
    "example45": ({"c4": 0, "c1": -1, "c6": -1, "c2": 0}, {"d2": 0, "d1": 0}),
    "example46": ({"c3": 0, "c2": 2, "c4": 1}, {"d3": 1, "d4": 0, "d5": 0}),
    "example47": ({"c1": 1, "c2": -1, "c3": 0, "c4": 0}, {"d3": 1}),
}
