"""Algebraic identities checked on randomized inputs.

Run standalone with ``python tests/test_properties.py``.
"""

from __future__ import annotations

import itertools

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from hamtrio.catalog import akns_trio, canonical, scalar_trio
from hamtrio.catalog.systems import EXAMPLES, cohomology_operator
from hamtrio.diffop import MatrixDiffOp, compose_matrix, compose_maps, point_transform
from hamtrio.jetcalc import Dx, euler, is_total_derivative, u
from hamtrio.poisson import schouten_integrand

from strategies import expressions, matrix_ops, point_maps, scalar_ops

exact = settings(max_examples=100, deadline=None, derandomize=True,
                 suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])


@exact
@given(expressions(m=2, max_order=3))
def test_euler_kills_total_derivatives(e):
    d = Dx(e)
    assert euler(d, 1).is_zero()
    assert euler(d, 2).is_zero()
    assert is_total_derivative(d)


@settings(exact, max_examples=50)
@given(matrix_ops())
def test_adjoint_is_an_involution(A):
    assert A.adjoint().adjoint() == A


@settings(exact, max_examples=50)
@given(matrix_ops(max_order=1), matrix_ops(max_order=1))
def test_adjoint_reverses_products(A, B):
    assert compose_matrix(A, B).adjoint() == compose_matrix(B.adjoint(), A.adjoint())


@settings(exact, max_examples=50)
@given(scalar_ops(m=1), scalar_ops(m=1))
def test_scalar_adjoint_reverses_products(a, b):
    assert (a * b).adjoint() == b.adjoint() * a.adjoint()


def _catalog():
    ops = {tag: canonical(tag) for tag in ("R2", "R3_1", "R3_2", "R3_3")}
    P, Q, _ = akns_trio()
    ops["akns_P1"], ops["akns_Q1"] = P, Q
    ops["cohomology"] = cohomology_operator(1, 2, 3, 1, 1, 1)
    for name, ex in EXAMPLES.items():
        P1, Q1, _ = ex.trio()
        ops[f"{name}_P1"], ops[f"{name}_Q1"] = P1, Q1
    return ops


CATALOG = _catalog()
PAIRS = [("R2", "akns_P1"), ("R2", "akns_Q1"), ("R3_2", "example45_P1"), ("R3_3", "example47_Q1"),
         ("example46_P1", "example46_Q1"), ("cohomology", "R2")]


@pytest.mark.parametrize("a,b", PAIRS)
def test_bracket_is_symmetric(a, b):
    P, Q = CATALOG[a], CATALOG[b]
    assert is_total_derivative(schouten_integrand(P, Q) - schouten_integrand(Q, P))


@pytest.mark.parametrize("a,b,c", [("akns_P1", "akns_Q1", "R2"), ("example45_P1", "example45_Q1", "R3_2"),
                                   ("example47_P1", "example47_Q1", "R3_3")])
def test_bracket_is_bilinear(a, b, c):
    P, Q, R = CATALOG[a], CATALOG[b], CATALOG[c]
    for k in (2, -3):
        lhs = schouten_integrand(P + Q.scale(k), R)
        rhs = schouten_integrand(P, R) + k * schouten_integrand(Q, R)
        assert is_total_derivative(lhs - rhs)
        lhs = schouten_integrand(R, P.scale(k) + Q)
        rhs = k * schouten_integrand(R, P) + schouten_integrand(R, Q)
        assert is_total_derivative(lhs - rhs)


def test_catalog_pairs_cover_the_listed_operators():
    names = set(itertools.chain.from_iterable(PAIRS))
    assert names <= set(CATALOG)


TRANSFORMED = [akns_trio()[1], canonical("R2"), EXAMPLES["example46"].trio()[0]]


@settings(exact, max_examples=20)
@given(point_maps(steps=2), point_maps(steps=2), st.integers(0, len(TRANSFORMED) - 1))
def test_point_transform_is_functorial(first, second, which):
    P = TRANSFORMED[which]
    phi, phi_inv = first
    psi, psi_inv = second
    stepwise = point_transform(point_transform(P, phi, phi_inv), psi, psi_inv)
    at_once = point_transform(P, compose_maps(phi, psi), compose_maps(psi_inv, phi_inv))
    assert stepwise == at_once


@settings(exact, max_examples=20)
@given(point_maps())
def test_point_maps_are_inverse_pairs(pair):
    phi, inv = pair
    assert compose_maps(phi, inv) == [u(1), u(2)]
    assert compose_maps(inv, phi) == [u(1), u(2)]


def test_identity_map_fixes_operators():
    P = TRANSFORMED[0]
    ident = [u(1), u(2)]
    assert point_transform(P, ident, ident) == P


def test_scalar_trio_zero_operator_adjoint():
    assert MatrixDiffOp.zero(2).adjoint() == MatrixDiffOp.zero(2)
    P, Q, R = scalar_trio()
    assert P.adjoint() == P.scale(-1) and R.adjoint() == R.scale(-1)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
