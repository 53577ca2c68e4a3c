import json

import pytest

from hamtrio.catalog import EXAMPLES, akns_trio, canonical, scalar_trio
from hamtrio.cli import SCHEMA, main, parse
from hamtrio.cli.commands import Library, shipped_documents
from hamtrio.errors import DimensionMismatch, ParseError
from hamtrio.jetcalc import param, u

DOC = """\
# a two-field document
fields u1 u2
params k
expr f = u2/u1
metric g = [[1, 0], [0, f^2]]
op P = [[Dx, 0], [0, k*Dx]]
op R = Dx * [[0, 1], [1, 0]] * Dx^2
op Q = P + R
trio t = P, Q, R
functional H = u1*u2
"""


def test_document_values():
    doc = parse(DOC)
    assert doc.m == 2 and doc.params == ["k"]
    assert doc.names("op") == ["P", "R", "Q"]
    assert doc.operator("R") == canonical("R3_1")
    assert doc.metric("g")[1, 1] == u(2) ** 2 / u(1) ** 2
    assert doc.operator("P").coeff(1, 1, 1) == param("k")
    P, Q, R = doc.trio("t")
    assert Q == P + R
    assert doc.functional("H") == u(1) * u(2)


def test_pretty_printing_is_a_fixed_point():
    text = parse(DOC).pretty()
    assert parse(text).pretty() == text
    assert parse(text).operator("Q") == parse(DOC).operator("Q")


@pytest.mark.parametrize("source,line,col", [
    ("fields u1 u2\nop A = Dx +\n", 2, 12),
    ("fields u1 u2\nop A = [[Dx, w], [0, Dx]]\n", 2, 14),
    ("fields u1 u2\nop A = [[Dx, u3], [0, Dx]]\n", 2, 14),
    ("fields u1\nop A = Dx\nop A = Dx\n", 3, 4),
    ("fields u1\nbogus A = 1\n", 2, 1),
    ("op A = Dx\n", 1, 1),
    ("fields u2 u1\n", 1, 8),
    ("fields u1\ntrio t = A, B, C\n", 2, 10),
])
def test_parse_errors_carry_positions(source, line, col):
    with pytest.raises(ParseError) as info:
        parse(source)
    assert (info.value.line, info.value.column) == (line, col)


def test_operator_of_the_wrong_size():
    with pytest.raises(DimensionMismatch):
        parse("fields u1 u2\nop Bad = [[Dx]]\n")
    with pytest.raises(DimensionMismatch):
        parse("fields u1 u2\nop A = [[Dx, 0], [0, Dx]] + [[Dx]]\n")


def test_metric_must_be_zeroth_order():
    with pytest.raises(ParseError):
        parse("fields u1\nmetric g = [[Dx]]\n")


def test_shipped_corpus_matches_the_catalog():
    docs = {d.source: d for d in shipped_documents()}
    assert {"canonical.ht", "scalar.ht", "known_systems.ht", "example45.ht"} <= set(docs)
    for tag in ("R2", "R3_1", "R3_2", "R3_3"):
        assert docs["canonical.ht"].operator(tag) == canonical(tag)
    assert docs["scalar.ht"].trio("kdv") == (scalar_trio()[1], scalar_trio()[0], scalar_trio()[2])
    for name, ex in EXAMPLES.items():
        assert docs[f"{name}.ht"].trio(name) == ex.trio()


def test_library_resolution(tmp_path):
    f = tmp_path / "mine.ht"
    f.write_text("fields u1 u2\nop P1 = [[0, Dx], [Dx, 0]]\n")
    lib = Library([f])
    doc, P = lib.find("P1", "op")
    assert doc.source == "mine.ht" and P == akns_trio()[0]
    _, P45 = lib.find("example45.P1", "op")
    assert P45 == EXAMPLES["example45"].trio()[0]


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_exit_codes(capsys):
    assert _run(capsys, "check", "hamiltonian", "R3_3")[0] == 0
    assert _run(capsys, "check", "compatible", "example46.P1", "R3_3")[0] == 1
    code, _, err = _run(capsys, "check", "hamiltonian", "nothing")
    assert code == 2 and "no op named" in err
    assert _run(capsys, "verify", "theorem9")[0] == 2
    assert _run(capsys, "frobnicate")[0] == 2


def test_json_report(capsys):
    code, out, _ = _run(capsys, "central-invariants", "example45", "--format", "json", "--seed", "3")
    data = json.loads(out)
    assert code == 0
    assert data["schema"] == SCHEMA and data["verdict"] == "pass"
    assert data["results"]["invariants in the fields"] == ["1/2", "-1/2"]
    assert data["seed"] == 3 and len(data["results"]["samples"]) == 10


def test_user_file_and_flows(capsys, tmp_path):
    f = tmp_path / "kdv.ht"
    f.write_text("fields u1\nop P = Dx\nop Q = 2*u1*Dx + u1x\nop R = Dx^3\ntrio kdv2 = P, Q, R\n"
                 "functional C = 2*sqrt(u1)\n")
    code, out, _ = _run(capsys, "--file", str(f), "flows", "kdv2", "--casimir", "C", "--eps", "0")
    assert code == 0 and "components" in out
    code, out, _ = _run(capsys, "flows", "kdv2", "--casimir", "C", "--file", str(f), "--format", "json")
    assert json.loads(out)["verdict"] == "pass"


def test_verify_example_text_output(capsys):
    code, out, _ = _run(capsys, "verify", "example46")
    assert code == 0
    assert "s1 = -1/(8*sqrt(l1)) at 10 samples" in out


def test_search_ansatz(capsys):
    code, out, _ = _run(capsys, "search", "ansatz", "--operator", "R2")
    assert code == 0 and "5 (expected 5)" in out
