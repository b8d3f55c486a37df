import pytest

from helpers import fixture_workspace

from cohlogic.chart import LEVELS, EquivalenceCertificate, Homotopy, classify_equivalence
from cohlogic.morita import quotient_retraction
from cohlogic.translation import identity_reconstrual


@pytest.fixture(scope="module")
def ws():
    return fixture_workspace("EQ_quotient.ext")


def _retraction_cert(ws, **kw):
    eq, eqq = ws.theory("EQ"), ws.theory("EQq")
    r = quotient_retraction(eq, eqq)
    return EquivalenceCertificate(eq, eqq, Homotopy(r.inclusion, r.retraction, r.chi1, r.chi2), eqq, **kw)


def _verdicts(chart):
    return {lv: chart.nodes[lv].verdict for lv in LEVELS}


def test_quotient_is_weakly_but_not_definitionally_equivalent(ws):
    chart = classify_equivalence(_retraction_cert(ws))
    v = _verdicts(chart)
    assert v["weak"] == "Proved" and v["definitional"] == "Failed"
    assert v["morita"] in ("Proved", "implied")
    assert v["logical"] == "Failed" and chart.nodes["logical"].reason == "the signatures differ"
    assert "equality preserved" in chart.nodes["definitional"].reason


def test_unrelated_theories_fail_every_standard(ws):
    chart = classify_equivalence(EquivalenceCertificate(ws.theory("P2"), ws.theory("FREE1")))
    assert set(_verdicts(chart).values()) == {"Failed"}
    assert chart.verdict == "Failed"


def test_a_theory_is_equivalent_to_itself(ws):
    eq = ws.theory("EQ")
    ident = Homotopy(identity_reconstrual(eq), identity_reconstrual(eq))
    chart = classify_equivalence(EquivalenceCertificate(eq, eq, ident, eq, eq))
    assert set(_verdicts(chart).values()) == {"Proved"}


@pytest.mark.parametrize("claims", [("weak",), ("definitional",), ("logical",), ("weak", "morita")])
def test_implication_only_flows_upwards(ws, claims):
    chart = classify_equivalence(_retraction_cert(ws, claims=claims))
    v = _verdicts(chart)
    lowest = min((LEVELS.index(lv) for lv in LEVELS if v[lv] == "Proved"), default=len(LEVELS))
    for i, lv in enumerate(LEVELS):
        if v[lv] == "implied":
            assert i > lowest
        if i < lowest:
            assert v[lv] in ("Failed", "unclaimed")
        if lv not in claims and i < lowest:
            assert v[lv] == "unclaimed"
    if claims == ("weak",):
        assert v == {"logical": "unclaimed", "definitional": "unclaimed", "weak": "Proved", "morita": "implied"}
