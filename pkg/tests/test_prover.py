import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (TWO_SORTED, coherent_formulas, fixture_workspace, fo_is_model, fo_sequent_holds,
                     random_prop_sequent, random_prop_theory, two_sorted_models, valid_by_valuations)

from cohlogic.parser import parse_sequent
from cohlogic.prover import Budget, bi_entails, prove_sequent, replay_trace
from cohlogic.syntax import LogicError, Sequent, Theory

EMPTY = Theory("Empty", TWO_SORTED)


@pytest.fixture(scope="module")
def ws():
    return fixture_workspace()


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_propositional_agrees_with_valuations(rng):
    t = random_prop_theory(rng)
    s = random_prop_sequent(rng, len(t.signature.relations))
    got = prove_sequent(t, s, Budget(10, 4, 4))
    assert got.status == ("Proved" if valid_by_valuations(t, s) else "Refuted")


@settings(max_examples=150, deadline=None)
@given(st.lists(coherent_formulas(4), max_size=2), coherent_formulas(4), two_sorted_models())
def test_first_order_verdicts_are_sound(ante, succ, m):
    s = Sequent(tuple(ante), succ)
    got = prove_sequent(EMPTY, s, Budget(6, 3, 3))
    if got.status == "Proved":
        assert fo_sequent_holds(m, s)
        assert replay_trace(got.trace)
    elif got.status == "Refuted":
        assert fo_is_model(got.model, EMPTY)
        assert not fo_sequent_holds(got.model, s)


@pytest.mark.parametrize("text", [
    "A(x,y), A(z,y) |- A(x,z)",
    "A(x,y) |- exists z:s . A(x,z) & A(z,y)",
    "|- exists z:s . A(x,z)",
    "A(x,y), A(y,z), A(z,w) |- A(w,x)",
])
def test_eq_consequences(ws, text):
    eq = ws.theory("EQ")
    got = prove_sequent(eq, parse_sequent(text, eq.signature), Budget())
    assert got.status == "Proved"
    assert replay_trace(got.trace)


def test_symmetry_fails_for_preorders_with_a_model(ws):
    deq = ws.theory("DEQ")
    s = parse_sequent("A(x,y) |- A(y,x)", deq.signature)
    got = prove_sequent(deq, s, Budget())
    assert got.status == "Refuted"
    assert fo_is_model(got.model, deq) and not fo_sequent_holds(got.model, s)


def test_equality_congruence_and_witnesses():
    eq = parse_sequent("x = y |- f(x) = f(y)", TWO_SORTED)
    wit = parse_sequent("|- exists v:s . v = c", TWO_SORTED)
    img = parse_sequent("U(f(c)) |- exists v:s . U(f(v))", TWO_SORTED)
    for s in (eq, wit, img):
        assert prove_sequent(EMPTY, s).status == "Proved"


def test_two_constants_cover_the_sort(ws):
    two = ws.theory("TWO")
    s = parse_sequent("|- exists v . v = a | v = b", two.signature)
    assert prove_sequent(two, s).status == "Proved"
    three = parse_sequent("|- x = a", two.signature)
    assert prove_sequent(two, three).status == "Refuted"


@pytest.mark.parametrize("w", [1, 2, 3])
def test_more_witnesses_never_lose_a_proof(ws, w):
    eq = ws.theory("EQ")
    rng = random.Random(w)
    texts = ["A(x,y) |- exists z:s . A(z,x) & A(z,y)", "|- exists z:s . A(z,z)", "A(x,y), A(y,z) |- A(z,x)"]
    rng.shuffle(texts)
    for text in texts:
        s = parse_sequent(text, eq.signature)
        small = prove_sequent(eq, s, Budget(10, w, 4)).status
        large = prove_sequent(eq, s, Budget(10, w + 2, 4)).status
        if small == "Proved":
            assert large == "Proved"


def test_bi_entails_reports_both_directions(ws):
    eq = ws.theory("EQ")
    a = parse_sequent("|- A(x,y)", eq.signature).succedent
    b = parse_sequent("|- A(y,x)", eq.signature).succedent
    assert [r.status for r in bi_entails(eq, a, b)] == ["Proved", "Proved"]


def test_budget_validation_and_printing():
    assert str(Budget()) == "10,4,4"
    assert Budget.parse("5,2,1") == Budget(5, 2, 1)
    assert Budget(3, 1, 2).scaled(2) == Budget(6, 2, 4)
    with pytest.raises(ValueError):
        Budget(0, 4, 4)


def test_foreign_sequent_is_rejected(ws):
    eq = ws.theory("EQ")
    with pytest.raises(LogicError):
        prove_sequent(eq, parse_sequent("|- U(u)", TWO_SORTED))


def test_trace_steps_only_cite_earlier_steps(ws):
    eq = ws.theory("EQ")
    got = prove_sequent(eq, parse_sequent("A(x,y), A(z,y) |- A(x,z)", eq.signature))
    for step in got.trace:
        assert all(p < step.index for p in step.premises)
    assert got.render().splitlines()[0].startswith("0.")
