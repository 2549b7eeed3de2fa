"""Spec files, report assembly and the command-line entry point."""
import json
import shutil
from fractions import Fraction
from pathlib import Path

import jsonschema
import pytest
from hypothesis import given
from hypothesis import strategies as st

from solnscope import cli
from solnscope import report as R

SUITE = Path(cli.__file__).parent / "paper_suite"


def rows(doc):
    return {r.criterion: r.value for r in doc.rows}


def test_parse_table_instance():
    spec = cli.parse_spec(b"kind = regularized\nfunction = hinge(x1)\nA = [[0,1]]\nb = [1]\n")
    assert spec.kind == "regularized" and spec.A == ((0, 1),) and spec.b == (1,)


def test_parse_constrained_instance_with_comments():
    text = "# P2\nkind = constrained  # min f s.t. Ax = b\n\nfunction = neglog(x1)\nA = [[1]]\nb = [0]\n"
    spec = cli.parse_spec(text.encode())
    assert spec.kind == "constrained" and spec.function == "neglog(x1)"


def test_parse_rationals():
    spec = cli.parse_spec(b"kind = regularized\nfunction = norm1()\nA = [[1/2, -3], [0, 4/6]]\nb = [-1/3, 2]\n")
    assert spec.A == ((Fraction(1, 2), -3), (0, Fraction(2, 3))) and spec.b == (Fraction(-1, 3), 2)


def test_unclosed_parenthesis_reports_position():
    with pytest.raises(cli.ParseError) as exc:
        cli.parse_spec(b"kind = regularized\nfunction = hinge(x1\nA = [[0,1]]\nb = [1]\n")
    assert (exc.value.line, exc.value.col) == (2, 17)


@pytest.mark.parametrize("text,error", [
    ("kind = regularized\nfunction = hinge(x1)\nA = [[0,1]]\nb = [1,2]\n", cli.DimensionError),
    ("kind = regularized\nfunction = hinge(x3)\nA = [[0,1]]\nb = [1]\n", cli.DimensionError),
    ("kind = regularized\nfunction = hinge(x1)\nA = [[0,1],[1]]\nb = [1,1]\n", cli.DimensionError),
    ("kind = regularized\nfunction = wiggle(x1)\nA = [[0,1]]\nb = [1]\n", cli.UnknownAtom),
    ("kind = sideways\nfunction = hinge(x1)\nA = [[0,1]]\nb = [1]\n", cli.ParseError),
    ("kind = regularized\nfunction = hinge(x1)\nA = [[0,1]\nb = [1]\n", cli.ParseError),
    ("kind = regularized\nfunction = hinge(x1)\nb = [1]\n", cli.ParseError),
    ("kind = regularized\nkind = regularized\n", cli.ParseError),
    ("kind = regularized\nfunction = hinge(x1)\nA = [[0,1]]\nb = [1]\nchecks = speed\n", cli.ParseError),
])
def test_rejects_bad_specs(text, error):
    with pytest.raises(error):
        cli.parse_spec(text.encode())


rational = st.fractions(min_value=-9, max_value=9, max_denominator=6)


@st.composite
def specs(draw):
    m, n = draw(st.integers(1, 3)), draw(st.integers(2, 4))
    A = tuple(tuple(draw(rational) for _ in range(n)) for _ in range(m))
    b = tuple(draw(rational) for _ in range(m))
    function = draw(st.sampled_from(["norm1()", "hinge(x1)", "abs(x2) + quadshift(x1,1/2)", "exp(x2)",
                                     "hinge_expdiff(x1,x2)"]))
    checks = draw(st.none() | st.lists(st.sampled_from(R.SECTIONS), min_size=1, max_size=3, unique=True).map(tuple))
    kind = draw(st.sampled_from(cli.KINDS))
    return cli.ProblemSpec(kind, function, A, b, checks)


@given(specs())
def test_render_parse_roundtrip(spec):
    text = cli.render_spec(spec)
    again = cli.parse_spec(text.encode())
    assert again == spec
    assert cli.render_spec(again) == text


def test_report_is_deterministic():
    spec = cli.parse_spec((SUITE / "reg_ex4.spec").read_bytes())
    a = R.render_text(cli.run(spec, oracle_verify=True, seed=3))
    b = R.render_text(cli.run(spec, oracle_verify=True, seed=3))
    assert a == b


def test_ex4_report_rows():
    doc = cli.run(cli.parse_spec((SUITE / "reg_ex4.spec").read_bytes()))
    got = rows(doc)
    assert got["existence"] == "yes" and got["compactness"] == "yes" and got["uniqueness"] == "no"
    assert got["X"] == "[-1,1] x {1}"


def test_lasso_report_notes_failed_sufficient_test():
    doc = cli.run(cli.parse_spec((SUITE / "reg_lasso.spec").read_bytes()))
    unique = [r for r in doc.rows if r.section == "uniqueness"]
    assert unique[0].value == "yes"
    assert any(r.criterion.startswith("projection test") and r.value.startswith("fails") for r in unique)


def test_constrained_ex3_reason():
    got = rows(cli.run(cli.parse_spec((SUITE / "con_ex3.spec").read_bytes())))
    assert got["existence"] == "no" and got["existence reason"] == "dom(A|>df) = empty"


def test_checks_select_sections():
    spec = cli.parse_spec((SUITE / "reg_ex3.spec").read_bytes())
    doc = cli.run(spec, checks=("uniqueness",))
    assert {r.section for r in doc.rows} == {"uniqueness"}
    assert set(doc.verdicts) == {"uniqueness"}


def test_json_validates_and_certificates_resolve():
    schema = cli.load_schema()
    for path in sorted(SUITE.glob("*.spec")):
        doc = cli.run(cli.parse_spec(path.read_bytes()))
        payload = json.loads(cli.render_json(doc))
        jsonschema.validate(payload, schema)
        refs = [r["certificate"] for r in payload["rows"] if "certificate" in r]
        assert refs and all(ref in payload["verdicts"] for ref in refs)
        assert all(isinstance(v["certificates"], dict) for v in payload["verdicts"].values())


def test_undecidable_rows_are_reported_not_raised():
    # exp mixed with kinks on one coordinate has no exact conjugate
    spec = cli.ProblemSpec("regularized", "2*abs(x1) + exp(x1)", ((Fraction(1),),), (Fraction(1),))
    doc = cli.run(spec)
    assert doc.undecidable
    assert any(r.value.startswith("undecidable: ") for r in doc.rows)


# -- entry point ------------------------------------------------------------


def test_main_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.spec"
    good.write_text("kind = regularized\nfunction = hinge(x1)\nA = [[0,1]]\nb = [1]\n")
    bad = tmp_path / "bad.spec"
    bad.write_text("kind = regularized\nfunction = hinge(x1\nA = [[0,1]]\nb = [1]\n")
    hard = tmp_path / "hard.spec"
    hard.write_text("kind = regularized\nfunction = 2*abs(x1) + exp(x1)\nA = [[1]]\nb = [1]\n")
    assert cli.main(["run", str(good)]) == 0
    assert cli.main(["run", str(good), "--json"]) == 0
    assert cli.main(["run", str(bad)]) == 2
    assert cli.main(["run", str(tmp_path / "missing.spec")]) == 2
    assert cli.main(["run", str(hard)]) == 1
    err = capsys.readouterr().err
    assert "line 2, column 17" in err


def test_paper_suite_matches_goldens(tmp_path):
    out = tmp_path / "fresh" / "reports"
    assert cli.paper_suite(out) == 0
    assert len(list(out.glob("*.txt"))) == 12


def test_paper_suite_names_perturbed_row(tmp_path, monkeypatch, capsys):
    golden_dir = tmp_path / "golden"
    shutil.copytree(SUITE, golden_dir)
    path = golden_dir / "reg_ex3.txt"
    path.write_text(path.read_text().replace("(-inf,0] x {1}", "[0,1] x {1}", 1))
    monkeypatch.setattr(cli, "golden", lambda name: (golden_dir / f"{name}.txt").read_text())
    assert cli.paper_suite(tmp_path / "out") == 3
    assert "reg_ex3: golden row 'X'" in capsys.readouterr().out
