import pytest
from hypothesis import HealthCheck, given, settings

from hamtrio.catalog import akns_trio, canonical, scalar_trio
from hamtrio.diffop import (
    MatrixDiffOp,
    Pencil,
    ScalarDiffOp,
    apply,
    compose,
    compose_matrix,
    equal_up_to_scale,
    extract_graded,
    format_operator,
    operator_from_rows,
    point_transform,
)
from hamtrio.errors import DimensionMismatch, NotGraded, SingularJacobian
from hamtrio.geometry import Metric, tensor_pushforward
from hamtrio.jetcalc import Dx, is_total_derivative, param, u

from strategies import expressions, matrix_ops, scalar_ops

quick = settings(max_examples=25, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])
D = ScalarDiffOp.dx()


def test_leibniz_rule():
    f = u(1)
    # D o f = f D + f_x
    assert D * ScalarDiffOp.mult(f) == ScalarDiffOp({1: f, 0: u(1, 1)})
    # D^2 o f = f D^2 + 2 f_x D + f_xx
    assert ScalarDiffOp.dx(2) * ScalarDiffOp.mult(f) == ScalarDiffOp({2: f, 1: 2 * u(1, 1), 0: u(1, 2)})


@quick
@given(scalar_ops(m=1), scalar_ops(m=1), expressions(m=1, max_order=1))
def test_composition_is_application_in_sequence(a, b, f):
    assert compose(a, b).apply(f) == a.apply(b.apply(f))


@quick
@given(scalar_ops(m=1), expressions(m=1, max_order=1), expressions(m=1, max_order=1))
def test_adjoint_by_integration_by_parts(a, f, g):
    # f (A g) - (A* f) g is a total derivative
    assert is_total_derivative(f * a.apply(g) - a.adjoint().apply(f) * g)


@quick
@given(matrix_ops(max_order=1), matrix_ops(max_order=1))
def test_matrix_composition_applies_in_sequence(A, B):
    v = [u(1) * u(2), u(2, 1) + 1]
    assert apply(compose_matrix(A, B), v) == apply(A, apply(B, v))


def test_canonical_operators_are_skew_adjoint():
    for tag in ("R2", "R3_1", "R3_2", "R3_3"):
        assert canonical(tag).is_skew_adjoint()
    P, Q, R = scalar_trio()
    assert Q.adjoint() == Q.scale(-1)
    assert not MatrixDiffOp([[ScalarDiffOp.mult(u(1))]]).is_skew_adjoint()


def test_size_mismatch():
    with pytest.raises(DimensionMismatch):
        canonical("R2") + scalar_trio()[0]


def test_equal_up_to_scale():
    R = canonical("R3_3")
    assert equal_up_to_scale(R.scale(param("k")), R) == param("k")
    assert equal_up_to_scale(R.scale(u(1)), R) is None
    assert equal_up_to_scale(canonical("R3_2"), R) is None


def test_operator_text_round_trip():
    for P in list(akns_trio()) + [canonical("R3_3")]:
        text = format_operator(P)
        rows = [r.strip(" []") for r in text[1:-1].split("], [")]
        entries = [[e.strip() for e in r.split(", ")] for r in rows]
        assert operator_from_rows(entries) == P


def test_pencil_sides_and_graded_pieces():
    P, Q, R = scalar_trio()
    eps = param("eps")
    pencil = Pencil.from_sides(Q + R.scale(eps ** 2), P)
    assert pencil.side(1) == P
    assert pencil.side(2) == Q + R.scale(eps ** 2)
    graded = extract_graded(pencil)
    assert graded.entry(2, 2, 0, 0, 0) == 1  # eps^2 D_x^3 has degree 0
    assert graded.omega[1] == P
    assert graded.reassemble().op == pencil.op


def test_ungraded_pencil_is_rejected():
    P, Q, R = scalar_trio()
    eps = param("eps")
    bad = Pencil.from_sides(Q + MatrixDiffOp([[ScalarDiffOp({1: u(1)})]]).scale(eps ** 2), P)
    with pytest.raises(NotGraded):
        extract_graded(bad)


def test_point_transform_of_first_order_operator_matches_tensor_rule():
    P1 = akns_trio()[1]
    phi = [u(1) + u(2) ** 2, u(2)]
    inv = [u(1) - u(2) ** 2, u(2)]
    T = point_transform(P1, phi, inv)
    g = Metric(P1.coefficient_matrix(1))
    assert Metric(T.coefficient_matrix(1)) == tensor_pushforward(g, phi, inv)
    assert T.is_skew_adjoint()


def test_singular_jacobian():
    with pytest.raises(SingularJacobian):
        point_transform(canonical("R2"), [u(1) + u(2), 2 * u(1) + 2 * u(2)], [u(1), u(2)])


def test_application_to_gradient():
    P = scalar_trio()[1]
    # (2u D + u_x) 1 = u_x
    assert apply(P, [1]) == [u(1, 1)]
    assert apply(P, [u(1)]) == [3 * u(1) * u(1, 1)]
    assert Dx(u(1) ** 2) == 2 * u(1) * u(1, 1)
