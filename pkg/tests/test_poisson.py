import pytest

from hamtrio.catalog import EXAMPLES, akns_trio, canonical, family, instantiate, scalar_trio
from hamtrio.diffop import MatrixDiffOp, ScalarDiffOp
from hamtrio.errors import NotSkewAdjoint
from hamtrio.geometry import Metric, levi_civita, op_from_metric
from hamtrio.jetcalc import is_total_derivative, u
from hamtrio.poisson import (
    are_compatible,
    bracket_residuals,
    geometric_hamiltonian,
    is_hamiltonian,
    schouten_integrand,
    third_order_conditions,
    third_order_data,
)


@pytest.mark.parametrize("tag", ["R2", "R3_1", "R3_2", "R3_3"])
def test_canonical_operators_are_hamiltonian(tag):
    assert bracket_residuals(canonical(tag), canonical(tag)) == []


@pytest.mark.parametrize("tag", ["R3_1", "R3_2", "R3_3"])
def test_third_order_conditions_hold(tag):
    ell, c = third_order_data(canonical(tag))
    assert all(r.is_zero() for r in third_order_conditions(ell, c))


def test_third_order_conditions_detect_a_bad_coefficient():
    ell, c = third_order_data(canonical("R3_2"))
    c[0][1][0] = c[0][1][0] + 1
    assert not all(r.is_zero() for r in third_order_conditions(ell, c))


def test_scalar_trio_is_mutually_compatible():
    P, Q, R = scalar_trio()
    for a in (P, Q, R):
        assert is_hamiltonian(a)
    assert are_compatible(P, Q) and are_compatible(P, R) and are_compatible(Q, R)


def test_quadratic_scalar_metric_is_not_compatible_with_dispersion():
    # u^2 D + D u^2 is Hamiltonian but only metrics linear in u pair with D^3
    S = MatrixDiffOp([[ScalarDiffOp({1: 2 * u(1) ** 2, 0: 2 * u(1) * u(1, 1)})]])
    P, _, R = scalar_trio()
    assert is_hamiltonian(S)
    assert are_compatible(S, P)
    assert not are_compatible(S, R)


def test_akns_trio():
    P1, Q1, R2 = akns_trio()
    assert is_hamiltonian(P1) and is_hamiltonian(Q1)
    assert are_compatible(P1, Q1) and are_compatible(P1, R2) and are_compatible(Q1, R2)


def test_non_flat_metric_is_not_hamiltonian():
    g = Metric([[1, 0], [0, u(1) ** 2 + 1]])
    S = op_from_metric(g, levi_civita(g))
    assert geometric_hamiltonian(S) is False
    assert bracket_residuals(S, S)


def test_constant_metric_outside_the_r33_family():
    # g11 = 1 forces c3 = 1 in the family, and then g12 contains u2/u1
    I = MatrixDiffOp.identity(2, 1)
    assert not are_compatible(I, canonical("R3_3"))
    assert are_compatible(I, canonical("R3_1"))


def test_symbolic_family_member_is_compatible():
    P = instantiate(family("Th1"))[2]
    assert are_compatible(P, canonical("R2"))


def test_skew_adjointness_is_required():
    with pytest.raises(NotSkewAdjoint):
        bracket_residuals(MatrixDiffOp([[ScalarDiffOp.mult(u(1))]]), scalar_trio()[0])


def test_integrand_of_constant_operators_is_exact():
    P, _, R = scalar_trio()
    assert is_total_derivative(schouten_integrand(P, R))


@pytest.mark.parametrize("name", ["example45", "example46"])
def test_psi1_euler_check_agrees_with_the_full_one(name):
    P1, Q1, R = EXAMPLES[name].trio()
    for a, b in ((P1, Q1), (Q1, R), (R, R)):
        assert bracket_residuals(a, b) == [] and bracket_residuals(a, b, full=True) == []


def test_psi1_euler_check_detects_failure_like_the_full_one():
    P = EXAMPLES["example46"].trio()[0]
    R = canonical("R3_3")
    assert bool(bracket_residuals(P, R)) and bool(bracket_residuals(P, R, full=True))
