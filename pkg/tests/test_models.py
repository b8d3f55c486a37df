import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import TWO_SORTED, coherent_formulas, fixture_workspace, fo_is_model, fo_truth, two_sorted_models

from cohlogic.models import (FiniteModel, check_model, enumerate_models, evaluate, find_countermodel,
                             parse_model, show_model)
from cohlogic.parser import parse_sequent
from cohlogic.syntax import Axiom, LogicError, Sequent, Theory, Var


ALL_VARS = tuple(Var(n, "s") for n in "xyz") + tuple(Var(n, "t") for n in "uw")


@pytest.fixture(scope="module")
def ws():
    return fixture_workspace("EQ.mod", "TWO.mod")


@settings(max_examples=300, deadline=None)
@given(coherent_formulas(), two_sorted_models(), st.data())
def test_evaluator_matches_oracle(phi, m, data):
    env = {v: data.draw(st.sampled_from(m.carriers[v.sort])) for v in ALL_VARS}
    assert evaluate(m, phi, env) == fo_truth(m, phi, env)


@settings(max_examples=100, deadline=None)
@given(st.lists(coherent_formulas(4), min_size=1, max_size=3), two_sorted_models())
def test_check_model_matches_oracle(succs, m):
    axioms = [Axiom(f"a{i}", Sequent((), f)) for i, f in enumerate(succs)]
    t = Theory("T", TWO_SORTED, axioms)
    ok, violations = check_model(m, t)
    assert ok == fo_is_model(m, t)
    assert ok == (not violations)


def _preorders(n):
    """Reflexive transitive relations on ``range(n)``, by brute force."""
    labels = [str(i) for i in range(n)]
    pairs = [(a, b) for a in labels for b in labels if a != b]
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        rel = {(a, a) for a in labels} | {p for p, b in zip(pairs, bits) if b}
        if all((a, c) in rel for a, b in rel for b2, c in rel if b == b2):
            yield rel


def test_enumeration_is_complete_for_preorders(ws):
    deq = ws.theory("DEQ")
    got = list(enumerate_models(deq, 3))
    expected = sum(1 for n in (1, 2, 3) for _ in _preorders(n))
    assert len(got) == expected == 1 + 4 + 29
    assert all(fo_is_model(m, deq) for m in got)
    assert len({(m.carriers["s"], m.relations["A"]) for m in got}) == len(got)


def test_enumeration_visits_smaller_carriers_first(ws):
    sizes = [len(m.carriers["s"]) for m in enumerate_models(ws.theory("EQ"), 3)]
    assert sizes == sorted(sizes)


def test_countermodel_to_discreteness_has_two_elements(ws):
    eq = ws.theory("EQ")
    m = find_countermodel(eq, parse_sequent("|- x = y", eq.signature), 3)
    assert m is not None and len(m.carriers["s"]) == 2 and fo_is_model(m, eq)


def test_no_countermodel_for_a_consequence(ws):
    eq = ws.theory("EQ")
    assert find_countermodel(eq, parse_sequent("A(x,y) |- A(y,x)", eq.signature), 3) is None


def test_fixture_models_satisfy_their_theories(ws):
    for name, m in ws.models.items():
        t = ws.theory(ws.model_theory[name])
        assert check_model(m, t)[0] and fo_is_model(m, t)


def test_show_then_parse_round_trips(ws):
    for name, m in ws.models.items():
        tname = ws.model_theory[name]
        again = parse_model(show_model(m, tname), ws.theories)
        assert again == m


def test_violations_name_axiom_and_assignment(ws):
    eq = ws.theory("EQ")
    bad = FiniteModel(eq.signature, {"s": ("0", "1")}, {"A": frozenset({("0", "0"), ("1", "1"), ("0", "1")})},
                      {}, "bad")
    ok, violations = check_model(bad, eq)
    assert not ok
    assert str(violations[0]) == "sym at x=0, y=1"


def test_malformed_tables_are_rejected():
    with pytest.raises(LogicError):
        FiniteModel(TWO_SORTED, {"s": ("0",), "t": ("0",)}, {}, {"f": {}, "c": {(): "0"}})
    with pytest.raises(LogicError):
        FiniteModel(TWO_SORTED, {"s": ("0",), "t": ("0",)}, {"A": frozenset({("0", "9")})},
                    {"f": {("0",): "0"}, "c": {(): "0"}})
