import pytest

from hamtrio.catalog import EXAMPLES, scalar_trio
from hamtrio.errors import NotACasimir, Undecided
from hamtrio.hierarchy import (
    Flow,
    Functional,
    casimir_check,
    commutator,
    first_flows,
    flows_commute,
    is_hamiltonian_flow,
)
from hamtrio.jetcalc import Dx, parse_expression, sqrt, u


def _flows(name, eps=1):
    ex = EXAMPLES[name]
    cas = [Functional(ex.casimir(n), 2, n) for n in ex.casimirs]
    return {f.name: f for f in first_flows(ex.trio(), cas, eps=eps)}


def test_casimir_of_the_kdv_operator():
    _, Q, _ = scalar_trio()
    assert casimir_check(Functional(sqrt(u(1)), 1), Q)
    assert not casimir_check(Functional(u(1), 1), Q)


def test_kdv_flow_from_the_scalar_trio():
    P, Q, R = scalar_trio()
    flow = first_flows((P, Q, R), [Functional(2 * sqrt(u(1)), 1, "C")])[0]
    # (D + eps^2 D^3) u^{-1/2}
    target = Dx(1 / sqrt(u(1)))
    assert flow.eps_part(0)[0] == target
    assert flow.eps_part(2)[0] == Dx(1 / sqrt(u(1)), 3)
    assert flow.at(1) == Flow([target + Dx(1 / sqrt(u(1)), 3)])


def test_non_casimir_is_rejected():
    with pytest.raises(NotACasimir):
        first_flows(scalar_trio(), [Functional(u(1), 1, "u")])


@pytest.mark.parametrize("name", sorted(EXAMPLES))
def test_casimirs_of_the_new_trios(name):
    ex = EXAMPLES[name]
    Q1 = ex.trio()[1]
    for n in ex.casimirs:
        assert casimir_check(Functional(ex.casimir(n), 2, n), Q1)


def test_example45_first_flow_as_printed():
    flows = _flows("example45")
    printed = [parse_expression(t) for t in EXAMPLES["example45"].printed_flows["C1"]]
    assert flows["C1"] == Flow(printed)


def test_example46_printed_flows_are_the_two_casimir_flows():
    flows = _flows("example46")
    printed = EXAMPLES["example46"].printed_flows
    assert flows["C2"] == Flow([parse_expression(t) for t in printed["C1"]])
    assert flows["C1"] == Flow([parse_expression(t) for t in printed["C2"]])


@pytest.mark.parametrize("name", ["example45", "example46"])
def test_rational_flows_commute_exactly(name):
    f = _flows(name, eps=None)
    assert all(c.is_zero() for c in commutator(f["C1"], f["C2"]))


def test_radical_flows_commute_numerically():
    f = _flows("example47")
    assert f["C2"].components[0].has_radicals()
    assert flows_commute(f["C1"], f["C2"], numeric=True, samples=10, seed=0)


def test_non_commuting_flows():
    # Burgers against heat: [F, G] = -2 u_x u_xx
    F = Flow([u(1) * u(1, 1)])
    G = Flow([u(1, 2)])
    assert commutator(F, G) == [-2 * u(1, 1) * u(1, 2)]
    assert not flows_commute(F, G)
    assert flows_commute(F, Flow([u(1, 1)]))


def test_kdv_is_hamiltonian_for_dx():
    P = scalar_trio()[0]
    F = Flow([u(1) * u(1, 1) + u(1, 3)])
    verdict = is_hamiltonian_flow(F, P)
    assert verdict
    H = verdict.density
    assert Functional(H, 1).equivalent(Functional(u(1) ** 3 / 6 - u(1, 1) ** 2 / 2, 1))


def test_casimir_obstruction():
    P = scalar_trio()[0]
    verdict = is_hamiltonian_flow(Flow([u(1) * u(1, 2)]), P)
    assert not verdict and verdict.reason == "Casimir obstruction"


def test_bounded_search_is_undecided_beyond_its_degree():
    P = scalar_trio()[0]
    with pytest.raises(Undecided):
        is_hamiltonian_flow(Flow([Dx(u(1) ** 5)]), P, degree=2)


def test_numeric_commutation_on_rational_flows():
    f = _flows("example46")
    assert flows_commute(f["C1"], f["C2"], numeric=True, samples=10, seed=3, domain=(2.0, 3.0))
    burgers, heat = Flow([u(1) * u(1, 1)]), Flow([u(1, 2)])
    assert not flows_commute(burgers, heat, numeric=True, seed=3)
