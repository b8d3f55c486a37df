import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import fixture_workspace, fo_is_model, random_equivalence_theory

from cohlogic.models import FiniteModel, enumerate_models
from cohlogic.morita import (Coproduct, Product, Quotient, Subsort, Terminal, classify_extension,
                             exact_completion_slice, expand_model, extend_chain, extend_morita,
                             find_proper_realization, make_equality_preserving, quotient_retraction,
                             transport_properness, verify_extension)
from cohlogic.parser import parse_formula, parse_sequent
from cohlogic.prover import Budget, bi_entails
from cohlogic.syntax import Axiom, Eq, LogicError, Var
from cohlogic.translation import Image, verify_translation

SPECS = {
    "product": "extend TWO with product s s as P via p1 p2",
    "terminal": "extend TWO with terminal as one",
    "coproduct": "extend TWO with coproduct s s as S via r1 r2",
    "subsort": "extend TWO with subsort s by [x | x = a] as Sa via i",
    "definition": "extend TWO with define rel Both(x:s, y:s) := x = a & y = b",
}


@pytest.fixture(scope="module")
def ws():
    return fixture_workspace("EQ.mod", "TWO.mod", "EQ_quotient.ext", "TWO.tr")


def _extend(text, *extra):
    ws = fixture_workspace(*extra)
    ws.load(text)
    return ws.last("extension")


@pytest.mark.parametrize("kind", sorted(SPECS))
def test_extensions_verify_and_are_recognised(ws, kind):
    res = _extend(SPECS[kind])
    assert verify_extension(res.base, res.theory).proved
    cls = classify_extension(res.base, res.theory)
    assert cls.specs == list(res.specs)
    assert not cls.unmatched_symbols and not cls.unmatched_axioms


@pytest.mark.parametrize("kind, size", [("product", 4), ("terminal", 1), ("coproduct", 4), ("subsort", 1)])
def test_expanded_canonical_model_has_expected_carrier(ws, kind, size):
    res = _extend(SPECS[kind])
    big = expand_model(ws.model("canonical"), res)
    new = res.specs[0].name
    assert len(big.carriers[new]) == size
    assert fo_is_model(big, res.theory)


@st.composite
def eq_models(draw):
    n = draw(st.integers(1, 4))
    blocks = [draw(st.integers(0, n - 1)) for _ in range(n)]
    return n, blocks


@settings(max_examples=60, deadline=None)
@given(eq_models())
def test_quotient_carrier_counts_classes(ws, data):
    """Expanding any model of EQ by s/A gives one element per equivalence class."""
    n, blocks = data
    eq = ws.theory("EQ")
    labels = tuple(str(i) for i in range(n))
    rel = frozenset((a, b) for a in labels for b in labels if blocks[int(a)] == blocks[int(b)])
    m = FiniteModel(eq.signature, {"s": labels}, {"A": rel}, {})
    res = ws.extensions["EQq"]
    big = expand_model(m, res)
    assert len(big.carriers["sA"]) == len(set(blocks))
    assert fo_is_model(big, res.theory)


def test_every_small_model_expands_along_a_chain(ws):
    two = ws.theory("TWO")
    x = Var("x", "s")
    chain = extend_chain(two, [Subsort("s", Image((x,), parse_formula("x = a", two.signature)), "Sa", "i"),
                               Product(("s", "Sa"), "P", ("p1", "p2")), Terminal("one")], "TWO_chain")
    assert verify_extension(two, chain.theory).proved
    for m in enumerate_models(two, 3):
        big = expand_model(m, chain)
        assert fo_is_model(big, chain.theory)
        assert len(big.carriers["P"]) == len(m.carriers["s"]) * len(big.carriers["Sa"])


def test_quotient_by_a_preorder_leaves_symmetry_open():
    res = _extend("extend DEQ with quotient s by A as sA via p")
    rep = res.discharge(Budget())
    verdicts = {e.name: e.verdict for e in rep.entries}
    assert verdicts == {"sA reflexive": "Proved", "sA symmetric": "Failed", "sA transitive": "Proved"}
    assert not verify_extension(res.base, res.theory).proved


def test_name_clash_and_bad_class_are_rejected(ws):
    two = ws.theory("TWO")
    x, y = Var("x", "s"), Var("y", "s")
    with pytest.raises(LogicError):
        extend_morita(two, Product(("s", "s"), "a", ("p1", "p2")))
    with pytest.raises(LogicError):
        extend_morita(two, Quotient("s", Image((x,), parse_formula("x = a", two.signature)), "Q", "q"))
    with pytest.raises(LogicError):
        extend_morita(two, Coproduct(("s", "s"), "S", ("r1",)))
    with pytest.raises(LogicError):
        extend_morita(two, Subsort("s", Image((x,), Eq(x, y)), "T", "i"))


def test_non_conservative_addition_is_not_an_extension(ws):
    eq = ws.theory("EQ")
    bad = eq.with_axioms([Axiom("discrete", parse_sequent("A(x,y) |- x = y", eq.signature))], name="EQd")
    assert not verify_extension(eq, bad).proved


@settings(max_examples=25, deadline=None)
@given(st.randoms(use_true_random=False))
def test_quotient_retraction_is_a_homotopy_equivalence(rng):
    t, cls = random_equivalence_theory(rng, "R")
    res = extend_morita(t, Quotient("s", cls, "sE", "q"))
    assert res.discharge(Budget()).proved
    rep = quotient_retraction(t, res.theory).verify(Budget(10, 4, 4))
    assert rep.count("Unknown") == 0 and rep.proved


def test_quotient_retraction_sends_surjection_to_the_class(ws):
    r = quotient_retraction(ws.theory("EQ"), ws.theory("EQq"))
    img = r.retraction.functions["p"]
    assert img.formula == img.at(img.params)
    assert str(img.formula) == "A(x1,x2)"
    assert r.retraction.sorts["sA"].sorts == ("s",)


def test_quotient_retraction_rejects_other_schemas(ws):
    res = _extend(SPECS["product"])
    with pytest.raises(LogicError):
        quotient_retraction(res.base, res.theory)


def test_exact_slice_is_idempotent_up_to_homotopy(ws):
    eq = ws.theory("EQ")
    once = exact_completion_slice(eq, 1, Budget())
    names = {s.name for s in once.specs}
    assert all(isinstance(s, Quotient) and s.base == "s" for s in once.specs) and len(names) == 2
    twice = exact_completion_slice(once.theory, 1, Budget())
    new_sorts = set(once.theory.signature.sorts) - set(eq.signature.sorts)
    for q in twice.specs:
        assert isinstance(q, Quotient) and q.base in new_sorts
        assert q.cls.formula == Eq(*q.cls.params)
    assert quotient_retraction(once.theory, twice.theory).verify(Budget()).proved


def test_proper_realization_of_two_and_its_transport(ws):
    two = ws.theory("TWO")
    r = find_proper_realization(two, 2, Budget())
    assert (str(r.phi.formula), str(r.psi.formula)) == ("x = a", "x = b")
    moved = transport_properness(verify_translation(ws.translations["swap"]), r)
    x = Var("x", "s")
    for cls, text in ((moved.phi, "x = b"), (moved.psi, "x = a")):
        plain = parse_formula(text, two.signature)
        assert [q.status for q in bi_entails(two, cls.at((x,)), plain)] == ["Proved", "Proved"]


def test_eq_has_no_proper_realization_at_small_depth(ws):
    log: list = []
    assert find_proper_realization(ws.theory("EQ"), 2, Budget(), log) is None
    assert log and all("fails in a finite model" in line for line in log)


def test_equality_preserving_replacement():
    ws = fixture_workspace()
    ws.load("translation blocks : EQ -> EQ {\n  sort s => s\n  eq s => E(x,y) := A(x,y)\n"
            "  rel A => psi(x,y) := A(x,y)\n}")
    F = verify_translation(ws.translations["blocks"])
    assert F.is_equality_preserving == "Failed"
    hat = make_equality_preserving(F)
    assert hat.is_equality_preserving == "Proved"
    assert hat.reconstrual.sorts["s"].sorts[0] != "s"
