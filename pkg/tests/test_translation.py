import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import fixture_workspace, fo_is_model, fo_truth

from cohlogic.models import FiniteModel
from cohlogic.parser import parse_formula
from cohlogic.prover import Budget
from cohlogic.syntax import LogicError, Var
from cohlogic.translation import (Imager, compose_translations, identity_reconstrual, pullback_model,
                                  show_reconstrual, trivial_tmap, verify_homotopy_equivalence, verify_tmap,
                                  verify_translation)

EXTRA = """
translation pairs : EQ -> EQ {
  sort s => (s,s) with D(x1,x2) := top
  rel A => psi(x1,x2,y1,y2) := A(x1,y1) & A(x2,y2)
}
translation blocks : EQ -> EQ {
  sort s => s
  eq s => E(x,y) := A(x,y)
  rel A => psi(x,y) := A(x,y)
}
"""

FORMULAS = ["A(x,y)", "exists z . A(x,z) & A(z,y)", "x = y | A(y,x)"]
EQ_SIGNATURE = fixture_workspace().theory("EQ").signature


@pytest.fixture(scope="module")
def eq_ws():
    ws = fixture_workspace("EQ.tr", "EQ.mod")
    ws.load(EXTRA)
    return ws


@st.composite
def eq_models(draw, max_size=3):
    """A random equivalence relation, given by a block label for each element."""
    n = draw(st.integers(1, max_size))
    blocks = [draw(st.integers(0, n - 1)) for _ in range(n)]
    labels = tuple(str(i) for i in range(n))
    rel = frozenset((a, b) for a in labels for b in labels if blocks[int(a)] == blocks[int(b)])
    return FiniteModel(EQ_SIGNATURE, {"s": labels}, {"A": rel}, {}, "R")


@pytest.mark.parametrize("name", ["swap", "full", "pairs", "blocks"])
def test_fixture_translations_verify(eq_ws, name):
    tr = verify_translation(eq_ws.translations[name], Budget())
    assert tr.is_translation == "Proved"


def test_flags_separate_the_three_notions(eq_ws):
    flags = {n: verify_translation(eq_ws.translations[n]).flags for n in ("swap", "pairs", "blocks")}
    assert flags["swap"] == {"translation": "Proved", "equality_preserving": "Proved", "strong": "Proved"}
    assert flags["pairs"]["equality_preserving"] == "Proved" and flags["pairs"]["strong"] == "Failed"
    assert flags["blocks"]["equality_preserving"] == "Failed"


@settings(max_examples=60, deadline=None)
@given(eq_models(), st.sampled_from(["swap", "full", "pairs", "blocks"]))
def test_pullback_of_a_model_is_a_model(eq_ws, m, name):
    F = eq_ws.translations[name]
    assert fo_is_model(m, F.target)
    assert fo_is_model(pullback_model(F, m), F.source)


@settings(max_examples=60, deadline=None)
@given(eq_models(), st.sampled_from(["swap", "pairs"]), st.sampled_from(FORMULAS))
def test_pullback_interprets_formulas_by_their_images(eq_ws, m, name, text):
    """``M`` satisfies ``F(phi)`` at a tuple exactly when the pullback satisfies ``phi`` there."""
    F = eq_ws.translations[name]
    x, y = Var("x", "s"), Var("y", "s")
    phi = parse_formula(text, F.source.signature, {"x": "s", "y": "s"})
    im = Imager(F)
    xs, ys = im.var(x), im.var(y)
    img = im.formula(phi)
    p = pullback_model(F, m)
    for a in p.carriers["s"]:
        for b in p.carriers["s"]:
            env_m = dict(zip(xs + ys, a.split("_") + b.split("_")))
            assert fo_truth(p, phi, {x: a, y: b}) == fo_truth(m, img, env_m)


def test_pair_pullback_has_square_carrier(eq_ws):
    m = eq_ws.model("blocks")
    p = pullback_model(eq_ws.translations["pairs"], m)
    assert len(p.carriers["s"]) == len(m.carriers["s"]) ** 2


def test_quotienting_pullback_counts_blocks(eq_ws):
    m = eq_ws.model("blocks")
    p = pullback_model(eq_ws.translations["blocks"], m)
    assert p.carriers["s"] == ("0", "2")


def test_composition_of_swap_with_itself_is_homotopic_to_identity(eq_ws):
    F = eq_ws.translations["swap"]
    FF = compose_translations(F, F)
    assert verify_translation(FF).is_translation == "Proved"
    ident = identity_reconstrual(F.source)
    chi = trivial_tmap(FF, ident, "chi")
    assert verify_tmap(chi, budget=Budget(), iso=True).proved


def test_identity_homotopy_equivalence(eq_ws):
    I = identity_reconstrual(eq_ws.theory("EQ"))
    II = compose_translations(I, I)
    unit, counit = trivial_tmap(II, I, "unit"), trivial_tmap(II, I, "counit")
    assert verify_homotopy_equivalence(I, I, unit, counit, Budget()).proved


def test_fixture_tmap_verifies(eq_ws):
    assert verify_tmap(eq_ws.tmaps["chi"], budget=Budget()).proved


def test_converse_is_not_isomorphic_to_identity_on_preorders():
    ws = fixture_workspace("DEQ.tr")
    rep = verify_tmap(ws.tmaps["chi"], budget=Budget(), iso=True)
    assert rep.verdict == "Failed"


def test_flip_is_not_a_translation():
    ws = fixture_workspace("P2.tr")
    tr = verify_translation(ws.translations["flip"])
    assert tr.is_translation == "Failed"
    failed = [e for e in tr.report.entries if e.verdict == "Failed"]
    assert [e.name for e in failed] == ["axiom pq"]
    assert "rel P = false" in failed[0].evidence and "rel Q = true" in failed[0].evidence


def test_show_then_load_round_trips(eq_ws):
    F = eq_ws.translations["pairs"]
    text = show_reconstrual(F).replace("translation pairs", "translation pairs_again")
    eq_ws.load(text)
    again = eq_ws.translations["pairs_again"]
    assert show_reconstrual(again) == show_reconstrual(F).replace("pairs", "pairs_again", 1)


def test_translation_with_wrong_arity_is_rejected():
    ws = fixture_workspace()
    with pytest.raises(LogicError):
        ws.load("translation bad : EQ -> EQ {\n  rel A => psi(x1) := top\n}")
