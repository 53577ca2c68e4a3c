"""Hypothesis strategies for expressions, operators and invertible point maps."""

from __future__ import annotations

from hypothesis import strategies as st

from hamtrio.diffop import MatrixDiffOp, ScalarDiffOp
from hamtrio.jetcalc import Expression, u

small = st.integers(min_value=-3, max_value=3)
nonzero = small.filter(lambda n: n != 0)


@st.composite
def monomials(draw, m=2, max_order=2, max_factors=3):
    e = Expression.const(1)
    for _ in range(draw(st.integers(0, max_factors))):
        e = e * u(draw(st.integers(1, m)), draw(st.integers(0, max_order)))
    return e


@st.composite
def polynomials(draw, m=2, max_order=2, max_terms=4):
    e = Expression.const(0)
    for _ in range(draw(st.integers(1, max_terms))):
        e = e + draw(nonzero) * draw(monomials(m, max_order))
    return e


@st.composite
def field_denominators(draw, m=2):
    """1, u_i, or u_i + c with c > 0; all nonvanishing on the positive quadrant."""
    kind = draw(st.integers(0, 2))
    if kind == 0:
        return Expression.const(1)
    base = u(draw(st.integers(1, m)))
    return base if kind == 1 else base + draw(st.integers(1, 3))


@st.composite
def expressions(draw, m=2, max_order=2):
    """Rational differential functions: polynomial over a product of field factors."""
    num = draw(polynomials(m, max_order))
    den = draw(field_denominators(m)) * draw(field_denominators(m))
    return num / den


@st.composite
def scalar_ops(draw, m=2, max_order=2, coeff_order=1):
    coeffs = {}
    for k in range(draw(st.integers(0, max_order)) + 1):
        if draw(st.booleans()):
            coeffs[k] = draw(expressions(m, coeff_order))
    return ScalarDiffOp(coeffs)


@st.composite
def matrix_ops(draw, m=2, max_order=2):
    return MatrixDiffOp([[draw(scalar_ops(m, max_order)) for _ in range(m)] for _ in range(m)])


@st.composite
def point_maps(draw, steps=3):
    """(phi, phi_inv) for a composition of elementary invertible maps of the plane."""
    u1, u2 = u(1), u(2)
    phi, inv = [u1, u2], [u1, u2]

    def then(f, g):
        # f then g, with g = (g1, g2) written in u1, u2
        sub = {u(1): f[0], u(2): f[1]}
        return [g[0].subs(sub), g[1].subs(sub)]

    for _ in range(draw(st.integers(1, steps))):
        kind = draw(st.integers(0, 3))
        a = draw(nonzero)
        b = draw(st.integers(1, 3))
        if kind == 0:  # shear by a polynomial in the other field
            step, back = [u1 + a * u2 ** b, u2], [u1 - a * u2 ** b, u2]
        elif kind == 1:
            step, back = [u1, u2 + a * u1 ** b], [u1, u2 - a * u1 ** b]
        elif kind == 2:  # scaling
            step, back = [a * u1, b * u2], [u1 / a, u2 / b]
        else:  # u2 -> u2 u1^b, inverse u2 / u1^b
            step, back = [u1, u2 * u1 ** b], [u1, u2 / u1 ** b]
        phi = then(phi, step)
        inv = then(back, inv)
    return phi, inv
