import pytest

from hamtrio.catalog import (
    EXAMPLES,
    align,
    ansatz_search,
    check_pencil_table,
    family,
    levi_civita_variety,
    match_known_system,
    on_variety,
    pencil_admissible,
    same_quadratic_span,
    scalar_pencils,
    scalar_trio,
)
from hamtrio.catalog import families as fams
from hamtrio.catalog import systems
from hamtrio.catalog.ansatz import EXPECTED_DIMENSION
from hamtrio.errors import NoMatch, NotOnVariety
from hamtrio.geometry import is_flat, levi_civita_residuals
from hamtrio.jetcalc import param, parse_expression

FAMILY_OF = {"R2": "Th1", "R3_1": "Th2", "R3_2": "Th3", "R3_3": "Th4"}


@pytest.mark.parametrize("tag", sorted(EXPECTED_DIMENSION))
def test_ansatz_reproduces_the_family(tag):
    result = ansatz_search(tag)
    fam = family(FAMILY_OF[tag])
    assert result.dimension == EXPECTED_DIMENSION[tag] == fam.nparams
    assert align(result, fam.metric("c").rows(), fam.names("c")).matches


def test_family_lookup_accepts_aliases():
    assert family("theorem3") is family("Th3") is family("R3_2")
    with pytest.raises(KeyError):
        family("Th9")


def test_theorem1_needs_no_variety():
    fam = family("Th1")
    assert levi_civita_residuals(fam.metric("c"), fam.connection("c")) == []
    assert is_flat(fam.metric("c"))


@pytest.mark.parametrize("tag", ["Th2", "Th3", "Th4"])
def test_levi_civita_conditions_span_the_variety(tag):
    fam = family(tag)
    assert same_quadratic_span(levi_civita_variety(fam), fam.variety("c"))


def test_quadratic_span_comparison_is_not_vacuous():
    c = [param(f"c{i}") for i in range(1, 5)]
    assert not same_quadratic_span([c[0] * c[1]], [c[0] * c[2]])
    assert same_quadratic_span([c[0] * c[1], c[2] * c[3]], [c[0] * c[1] + c[2] * c[3], c[2] * c[3]])


@pytest.mark.parametrize("tag,label", [(t, b.label) for t in ("Th2", "Th3", "Th4") for b in family(t).branches])
def test_branches_are_flat_and_on_the_variety(tag, label):
    fam = family(tag)
    assert fams.branch_is_flat(fam, label)
    sub = {n: v for n, v in fam.branch(label).substitutions("c").items()}
    assert all(q.subs(sub).is_zero() for q in fam.variety("c"))


KNOWN_BAD = {("Th4", "g_lambda_13", 0), ("Th4", "g_lambda_14", 0), ("Th4", "g_lambda_33", 0)}
ROWS = [(t, r.label, a) for t in ("Th2", "Th3", "Th4") for r in family(t).pencils for a in range(len(r.alternatives))]


@pytest.mark.parametrize("tag,label,alt", [r for r in ROWS if r not in KNOWN_BAD])
def test_pencil_table_rows(tag, label, alt):
    fam = family(tag)
    rule = next(r for r in fam.pencils if r.label == label)
    assert fams.check_pencil_rule(fam, rule, alt).ok


def test_r33_row_13_holds_with_the_doubled_numerator():
    fam = family("Th4")
    printed = fam.pencil(1, 3)
    doubled = fams.TH4_ROWS_13_14_LITERAL_DOUBLE[0]
    assert not fams.check_pencil_rule(fam, printed).ok
    assert fams.check_pencil_rule(fam, doubled).ok


def test_r33_rows_14_and_33_need_amended_conditions():
    fam = family("Th4")
    assert not fams.check_pencil_rule(fam, fam.pencil(1, 4)).ok
    assert not fams.check_pencil_rule(fam, fams.TH4_ROWS_13_14_LITERAL_DOUBLE[1]).ok
    assert not fams.check_pencil_rule(fam, fam.pencil(3, 3), 0).ok
    assert all(rc.ok for rc in check_pencil_table(fam, fams.TH4_AMENDED_ROWS))


@pytest.mark.parametrize("k,l", family("Th4").excluded)
def test_excluded_pairs_fail_at_a_generic_point(k, l):
    for seed in range(3):
        fails, c, d = fams.excluded_pair_fails(family("Th4"), k, l, seed)
        assert fails, (c, d)


def test_membership_of_points():
    fam = family("Th3")
    assert on_variety(fam, {"c1": -1, "c6": -1}, complete=True)
    assert not on_variety(fam, {"c2": 1, "c5": 1}, complete=True)
    with pytest.raises(NotOnVariety):
        pencil_admissible(fam, {"c2": 1, "c5": 1}, {"d4": 1})


@pytest.mark.parametrize("name,row", [("example45", "g_lambda_13"), ("example46", "g_lambda_23"),
                                      ("example47", "g_lambda_12")])
def test_new_trios_lie_on_listed_pencil_rows(name, row):
    ex = EXAMPLES[name]
    adm = pencil_admissible(family(ex.family), ex.c, ex.d)
    assert adm and row in adm.labels


@pytest.mark.parametrize("name", sorted(EXAMPLES))
def test_new_trio_metrics_match_the_printed_entries(name):
    P1, Q1, _ = EXAMPLES[name].trio()
    for op, texts in zip((P1, Q1), systems.PRINTED_TRIO_METRICS[name]):
        for (i, j), t in zip(((0, 0), (0, 1), (1, 1)), texts):
            assert op.coeff(i, j, 1) == parse_expression(t)


def test_cohomology_family_identification():
    m = match_known_system([systems.cohomology_operator(gamma=1, c=0)], "Th1")
    vals = m.values(0)
    for k, text in {"c1": "2*a", "c2": "alpha", "c4": "epsilon", "c5": "beta"}.items():
        assert vals[k] == parse_expression(text)
    assert m.sides[0].r_scale == 1


def test_kaup_broer_identification():
    m = match_known_system(list(reversed(systems.kaup_broer())), "Th1")
    assert m.values(0)["c2"] == 2 and m.values(0)["c3"] == 2
    assert m.sides[0].r_scale == -1


def test_dww_and_harry_dym_identifications_as_computed():
    dww = match_known_system([systems.dww()[0], systems.dww()[2]], "Th2")
    assert (dww.values(0)["c2"], dww.values(0)["c5"], dww.values(1)["d4"]) == (-1, 1, 1)
    hd = match_known_system([systems.harry_dym()[0], systems.harry_dym()[2]], "Th2")
    assert hd.values(0)["c1"] == -1
    assert hd.values(1)["d5"] == -param("alpha") and hd.values(1)["d6"] == 1
    assert dww.sides[1].r_scale == hd.sides[1].r_scale == parse_expression("1/4")


def test_unmatched_operator():
    with pytest.raises(NoMatch):
        match_known_system([systems.dww()[0]], "Th4")


def test_scalar_pencils():
    P, Q, R = scalar_trio()
    eps2 = param("eps") ** 2
    magri, ch = scalar_pencils()
    assert magri.side(2) == Q + R.scale(eps2) and magri.side(1) == P
    assert ch.side(2) == Q and ch.side(1) == P + R.scale(eps2)
