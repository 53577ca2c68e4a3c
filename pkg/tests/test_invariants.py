import math
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from hamtrio.catalog import EXAMPLES, scalar_pencils
from hamtrio.diffop import Pencil, point_transform
from hamtrio.errors import SemisimplicityFailure
from hamtrio.invariants import (
    canonical_coordinates,
    central_invariants,
    depends_only_on_own,
    exact_sqrt,
    matches_printed,
    pencil_chart,
    sample_points,
    triviality_verdict,
    trio_pencil,
)
from hamtrio.jetcalc import param, parse_expression, sqrt, u

u1, u2 = u(1), u(2)


def test_exact_square_roots():
    assert exact_sqrt((u1 + u2) ** 2 / u1 ** 4) == (u1 + u2) / u1 ** 2
    assert exact_sqrt(u1 + 1).has_radicals()


def test_canonical_coordinates_of_a_diagonal_pair():
    chart = canonical_coordinates([[1, 0], [0, 1]], [[u1, 0], [0, u2]], base=(2, 1))
    assert chart.lambdas == [u1, u2]
    assert canonical_coordinates([[1, 0], [0, 1]], [[u1, 0], [0, u2]], base=(1, 2)).lambdas == [u2, u1]
    assert canonical_coordinates([[1, 0], [0, 1]], [[u1, 0], [0, u2]], base=(1, 2), order=(1, 0)).lambdas == [u1, u2]


def test_semisimplicity_failures():
    with pytest.raises(SemisimplicityFailure):
        canonical_coordinates([[1, 0], [0, 1]], [[u1, 0], [0, u1]])
    with pytest.raises(SemisimplicityFailure):
        canonical_coordinates([[u1, u1], [u1, u1]], [[1, 0], [0, 1]])
    with pytest.raises(SemisimplicityFailure):
        canonical_coordinates([[1, 0], [0, 1]], [[u1, 0], [0, u2]], base=(1, 1))
    with pytest.raises(SemisimplicityFailure):  # rotation generator: complex eigenvalues
        canonical_coordinates([[1, 0], [0, 1]], [[u1, 1], [-1, u1]], base=(1, 1))


def test_scalar_pencils():
    # Magri: lam = 2u, f = 4, A = 4, s = 4/4^2; CH: s = -lam * 4 / 16
    magri, ch = scalar_pencils()
    s = central_invariants(magri, pencil_chart(magri, base=(Fraction(3, 2),)), domain=((1, 2),))
    assert s.constants() == [Fraction(1, 4)]
    s = central_invariants(ch, pencil_chart(ch, base=(Fraction(3, 2),)), domain=((1, 2),))
    assert s.in_fields == [-u1 / 2]


@pytest.mark.parametrize("name", sorted(EXAMPLES))
def test_printed_canonical_coordinates(name):
    ex = EXAMPLES[name]
    chart = ex.canonical_chart()
    assert [l == parse_expression(t) for l, t in zip(chart.lambdas, ex.chart)] == [True, True]


def test_example45_both_routes_give_constants():
    ex = EXAMPLES["example45"]
    s = central_invariants(ex.pencil(), ex.canonical_chart())
    assert s.constants() == [Fraction(1, 2), Fraction(-1, 2)]
    assert s.closed_form() == [Fraction(1, 2), Fraction(-1, 2)]


def test_example46_closed_form_in_the_fields():
    ex = EXAMPLES["example46"]
    s = central_invariants(ex.pencil(), ex.canonical_chart(), samples=12, seed=5, domain=ex.domain)
    assert s.in_fields == [-1 / (8 * (u1 + u2)), 1 / (8 * (u1 - u2))]
    assert matches_printed(s, ex.invariants) == [True, True]
    assert len(s.samples) == 12


def test_example47_samples_match_the_printed_forms():
    ex = EXAMPLES["example47"]
    s = central_invariants(ex.pencil(), ex.canonical_chart(), samples=10, seed=1, domain=ex.domain)
    assert matches_printed(s, ex.invariants) == [True, True]
    w = 2 * u1 - u2
    assert s.in_fields == [-u2 ** 2 / (u2 ** 2 + 1), -w ** 2 / (w ** 2 + 1)]


def test_printed_comparison_can_fail():
    ex = EXAMPLES["example46"]
    s = central_invariants(ex.pencil(), ex.canonical_chart(), domain=ex.domain)
    assert matches_printed(s, ("1/(8*sqrt(l1))", "1/(8*sqrt(l2))")) == [False, True]


@pytest.mark.parametrize("name", sorted(EXAMPLES))
def test_invariants_depend_on_their_own_coordinate(name):
    ex = EXAMPLES[name]
    s = central_invariants(ex.pencil(), ex.canonical_chart(), domain=ex.domain)
    assert all(depends_only_on_own(s, i) for i in range(2))
    assert triviality_verdict(s)[0] == "nontrivial"


def test_sign_conventions_of_the_pencil():
    ex = EXAMPLES["example45"]
    P1, Q1, R = ex.trio()
    eps2 = param("eps") ** 2
    flipped = Pencil.from_sides(P1 + R.scale(eps2), Q1)  # overall sign changes s -> -s
    s = central_invariants(flipped, pencil_chart(flipped, base=(Fraction(3, 2), Fraction(5, 2)), order=(1, 0)))
    assert sorted(s.constants()) == [Fraction(-1, 2), Fraction(1, 2)]
    assert trio_pencil(P1, Q1, R).op == (-(P1 + R.scale(eps2)) - Q1.scale(param("lam")))


def test_trivial_deformation():
    ex = EXAMPLES["example46"]
    P1, Q1, _ = ex.trio()
    pen = Pencil.from_sides(-P1, Q1)
    s = central_invariants(pen, pencil_chart(pen, base=(Fraction(5, 2), Fraction(3, 2))), domain=ex.domain)
    assert triviality_verdict(s)[0] == "trivial"


def test_sample_points_are_seeded_and_inside_the_box():
    a = sample_points(2, 10, 4, ((2, 3), (1, 2)))
    assert a == sample_points(2, 10, 4, ((2, 3), (1, 2)))
    assert all(2 <= p[0] <= 3 and 1 <= p[1] <= 2 for p in a)


SHEARS = st.tuples(st.integers(-2, 2).filter(bool), st.integers(1, 2))


@settings(max_examples=8, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])
@given(SHEARS)
def test_invariants_are_scalars_under_point_transformations(shear):
    # v1 = u1 + a (u2 - 3/2)^b moves points but keeps u2, so the order of the eigenvalues
    a, b = shear
    ex = EXAMPLES["example46"]
    pen = ex.pencil()
    phi = [u1 + a * (u2 - Fraction(3, 2)) ** b, u2]
    inv = [u1 - a * (u2 - Fraction(3, 2)) ** b, u2]
    moved = Pencil(point_transform(pen.op, phi, inv))
    base = (Fraction(5, 2), Fraction(3, 2))  # fixed by the shear
    old = central_invariants(pen, pencil_chart(pen, base), domain=ex.domain)
    new = central_invariants(moved, pencil_chart(moved, base), domain=ex.domain)
    back = {u1: inv[0], u2: inv[1]}
    assert [s.subs(back) for s in old.in_fields] == new.in_fields
    assert [l.subs(back) for l in old.chart.lambdas] == new.chart.lambdas


def test_radical_chart_samples_are_finite():
    ex = EXAMPLES["example47"]
    s = central_invariants(ex.pencil(), ex.canonical_chart(), domain=ex.domain)
    assert all(math.isfinite(v) for smp in s.samples for v in smp.values)
    assert sqrt(u1).has_radicals()
