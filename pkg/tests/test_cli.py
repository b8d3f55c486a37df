import io
import json

import pytest

from cohlogic.cli import parse_budget, run
from cohlogic.prover import Budget


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("argv, code", [
    (("prove", "fixture:EQ.th", "A(x,y) |- A(y,x)"), 0),
    (("prove", "fixture:DEQ.th", "A(x,y) |- A(y,x)"), 1),
    (("prove", "fixture:EQ.th", "A(x,y), A(y,z), A(z,w) |- A(w,x)", "--budget", "1,1,1"), 2),
    (("prove", "fixture:EQ.th", "|- B(x)"), 3),
    (("prove", "fixture:EQ.th", "A(x,y) |- A(y,x)", "--budget", "0,1"), 3),
    (("prove", "no_such_file.th", "|- top"), 3),
    (("countermodel", "fixture:DEQ.th", "A(x,y) |- A(y,x)"), 0),
    (("countermodel", "fixture:EQ.th", "A(x,y) |- A(y,x)"), 1),
    (("check-translation", "fixture:P2.th", "fixture:P2.tr", "--translation", "flip"), 1),
    (("check-translation", "fixture:EQ.th", "fixture:EQ.tr", "--translation", "swap"), 0),
])
def test_exit_status_encodes_the_verdict(argv, code):
    assert _run(*argv)[0] == code


def test_input_errors_go_to_stderr():
    code, out, err = _run("prove", "fixture:EQ.th", "|- B(x)")
    assert code == 3 and not out
    assert err.startswith("cohlogic prove: 1:") and "unknown relation B" in err


def test_partial_budget_keeps_default_fields():
    assert parse_budget("5") == Budget(5, 4, 4)
    assert parse_budget("5,2") == Budget(5, 2, 4)
    code, out, _ = _run("prove", "fixture:EQ.th", "A(x,y) |- A(y,x)", "--budget", "5")
    assert code == 0 and "# budget: 5,4,4" in out


def test_structured_output_is_json():
    code, out, _ = _run("prove", "fixture:DEQ.th", "A(x,y) |- A(y,x)", "--format", "structured")
    doc = json.loads(out)
    assert code == 1 and doc["verdict"] == "Failed"
    assert doc["report"]["meta"]["command"] == "prove"


def test_out_writes_the_report(tmp_path):
    target = tmp_path / "report.txt"
    code, out, _ = _run("prove", "fixture:EQ.th", "A(x,y) |- A(y,x)", "--out", str(target))
    assert code == 0 and not out
    assert target.read_text().rstrip().endswith("verdict: Proved")


def test_plain_files_and_fixtures_mix(tmp_path):
    f = tmp_path / "mine.th"
    f.write_text("theory Mine {\n  rel R\n  ax r: |- R\n}\n")
    assert _run("prove", "fixture:EQ.th", str(f), "|- R")[0] == 0


def test_default_theory_is_the_last_loaded():
    assert _run("prove", "fixture:EQ.th", "fixture:P2.th", "P |- Q")[0] == 0
    assert _run("prove", "fixture:EQ.th", "fixture:P2.th", "A(x,y) |- A(y,x)")[0] == 3
    assert _run("prove", "fixture:EQ.th", "fixture:P2.th", "A(x,y) |- A(y,x)", "--theory", "EQ")[0] == 0


def test_extend_prints_the_extended_theory():
    code, out, _ = _run("extend", "fixture:TWO.th", "--spec", "product s s as P via p1 p2")
    assert code == 0
    assert "theory TWO_P {" in out and "fun p1: P -> s" in out


def test_tmap_file_parses_and_verifies():
    code, out, _ = _run("check-tmap", "fixture:EQ.th", "fixture:EQ.tr", "--tmap", "chi")
    assert code == 0 and out.rstrip().endswith("verdict: Proved")


def test_chart_reports_each_standard():
    code, out, _ = _run("classify-equiv", "fixture:EQ.th", "fixture:EQ_quotient.ext", "--left", "EQ",
                        "--right", "EQq", "--retraction", "--claim", "weak")
    assert code == 0
    assert "[verified: Proved]" in out and "[implied]" in out and "[unclaimed]" in out


def test_unknown_level_is_an_input_error():
    code, _, err = _run("classify-equiv", "fixture:EQ.th", "--left", "EQ", "--right", "EQ", "--claim", "strict")
    assert code == 3 and "unknown level strict" in err
