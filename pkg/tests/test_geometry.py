import pytest

from hamtrio.catalog import EXAMPLES, family, instantiate, leading_metric
from hamtrio.diffop import MatrixDiffOp, ScalarDiffOp
from hamtrio.errors import DegenerateMetric, DegeneratePencil
from hamtrio.geometry import (
    Metric,
    connection_of,
    flat_pencil_check,
    is_flat,
    levi_civita,
    levi_civita_residuals,
    metric_of,
    op_from_metric,
    riemann_components,
)
from hamtrio.jetcalc import Expression, u

import oracles

u1, u2 = u(1), u(2)

METRICS = {
    "polar": [[1, 0], [0, 1 / u1 ** 2]],
    "sphere": [[1, 0], [0, u1 ** 2 + 1]],
    "th1": [[2 * u1 + 3 * u2, 1 + u1], [1 + u1, 4 * u2 - 1]],
    "ell2": leading_metric("R3_2").g,
    "ell3": leading_metric("R3_3").g,
    "example46_P1": metric_of(EXAMPLES["example46"].trio()[0]).g,
}


@pytest.mark.parametrize("name", sorted(METRICS))
def test_flatness_agrees_with_sympy(name):
    g = METRICS[name]
    expected = oracles.is_flat([[oracles.to_sympy(Expression.coerce(x)) for x in row] for row in g])
    assert is_flat(Metric(g)) == expected


def test_known_flatness_values():
    assert is_flat(Metric(METRICS["polar"]))
    assert not is_flat(Metric(METRICS["sphere"]))
    assert is_flat(leading_metric("R3_2"))
    assert not is_flat(leading_metric("R3_3"))


def test_theorem1_metric_is_flat_for_symbolic_parameters():
    fam = family("Th1")
    assert is_flat(fam.metric("c"))
    assert levi_civita_residuals(fam.metric("c"), fam.connection("c")) == []


def test_levi_civita_round_trip_through_operators():
    g = Metric(METRICS["th1"])
    gamma = levi_civita(g)
    P = op_from_metric(g, gamma)
    assert metric_of(P) == g
    assert levi_civita_residuals(g, connection_of(P)) == []


def test_wrong_connection_leaves_residuals():
    g = Metric(METRICS["polar"])
    zero = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
    assert levi_civita_residuals(g, zero)


def test_riemann_components_vanish_for_constant_metric():
    assert all(r.is_zero() for r in riemann_components(Metric([[0, 1], [1, 0]])))


def test_degenerate_metric():
    with pytest.raises(DegenerateMetric):
        Metric([[u1, u1], [u1, u1]]).inverse()


def test_flat_pencil_of_a_trio():
    P1, Q1, _ = EXAMPLES["example46"].trio()
    res = flat_pencil_check(metric_of(P1), metric_of(Q1), gamma_g=connection_of(P1), gamma_h=connection_of(Q1))
    assert res.flat and res.additive and res.ok


def test_non_pencil_is_reported():
    g = Metric([[1, 0], [0, 1]])
    h = Metric(METRICS["sphere"])
    res = flat_pencil_check(g, h)
    assert not res
    assert any("R^" in f for f in res.failures)


def test_identically_degenerate_pencil():
    g = Metric([[u1, u1], [u1, u1]])
    with pytest.raises(DegeneratePencil):
        flat_pencil_check(g, g.scale(2))


def test_first_order_part_of_an_instantiated_family_member():
    fam = family("Th1")
    P = instantiate(fam, {"c1": 1, "c2": 0, "c3": 0, "c4": 0, "c5": 1}, complete=True)[2]
    assert isinstance(P, MatrixDiffOp) and P.order() == 1
    assert isinstance(P[0, 0], ScalarDiffOp)
    assert is_flat(metric_of(P))
