"""Normal forms of the second- and third-order operators and the scalar tier."""

from __future__ import annotations

from dataclasses import dataclass

from ..diffop import MatrixDiffOp, ScalarDiffOp
from ..jetcalc import u

D = ScalarDiffOp.dx()


def mult(a) -> ScalarDiffOp:
    return ScalarDiffOp.mult(a)


def sandwich(inner) -> MatrixDiffOp:
    """D_x o inner o D_x for a matrix of scalar operators."""
    inner = inner if isinstance(inner, MatrixDiffOp) else MatrixDiffOp(inner)
    Dm = MatrixDiffOp.identity(inner.m, 1)
    return Dm * inner * Dm


def symmetrized(a) -> ScalarDiffOp:
    """a D_x + D_x a."""
    return mult(a) * D + D * mult(a)


@dataclass(frozen=True)
class CanonicalOperator:
    tag: str
    op: MatrixDiffOp
    order: int


def _build() -> dict[str, CanonicalOperator]:
    u1, u2 = u(1), u(2)
    out = {}
    out["R2"] = CanonicalOperator("R2", MatrixDiffOp([[0, ScalarDiffOp.dx(2)], [-ScalarDiffOp.dx(2), 0]]), 2)
    out["R3_1"] = CanonicalOperator(
        "R3_1", MatrixDiffOp([[0, ScalarDiffOp.dx(3)], [ScalarDiffOp.dx(3), 0]]), 3
    )
    out["R3_2"] = CanonicalOperator(
        "R3_2",
        sandwich([[0, D * mult(1 / u1)], [mult(1 / u1) * D, symmetrized(u2 / u1**2)]]),
        3,
    )
    f = (u2**2 + 1) / (2 * u1**2)
    out["R3_3"] = CanonicalOperator(
        "R3_3",
        sandwich([[D, D * mult(u2 / u1)], [mult(u2 / u1) * D, symmetrized(f)]]),
        3,
    )
    return out


CANONICAL = _build()


def canonical(tag: str) -> MatrixDiffOp:
    try:
        return CANONICAL[tag].op
    except KeyError:
        raise KeyError(f"unknown canonical operator {tag!r}; known: {sorted(CANONICAL)}") from None


def leading_metric(tag: str):
    from ..geometry import Metric

    c = CANONICAL[tag]
    return Metric(c.op.coefficient_matrix(c.order))


def scalar_trio() -> tuple[MatrixDiffOp, MatrixDiffOp, MatrixDiffOp]:
    """(D_x, 2u D_x + u_x, D_x^3) for one field."""
    u1 = u(1)
    P = MatrixDiffOp([[D]])
    Q = MatrixDiffOp([[ScalarDiffOp({1: 2 * u1, 0: u(1, 1)})]])
    R = MatrixDiffOp([[ScalarDiffOp.dx(3)]])
    return P, Q, R


def scalar_pencils():
    """Magri pencil Q + eps^2 R - lam P and Camassa-Holm pencil Q - lam (P + eps^2 R)."""
    from ..diffop import Pencil
    from ..jetcalc import param

    P, Q, R = scalar_trio()
    eps2 = param("eps") ** 2
    magri = Pencil.from_sides(Q + R.scale(eps2), P)
    ch = Pencil.from_sides(Q, P + R.scale(eps2))
    return magri, ch


def akns_trio() -> tuple[MatrixDiffOp, MatrixDiffOp, MatrixDiffOp]:
    u1, u2 = u(1), u(2)
    P1 = MatrixDiffOp([[0, D], [D, 0]])
    Q1 = MatrixDiffOp([[ScalarDiffOp({1: 2 * u1, 0: u(1, 1)}), mult(u2) * D], [D * mult(u2), -2 * D]])
    return P1, Q1, canonical("R2")
