import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import fixture_workspace, random_prop_theory, seq_holds, truth, valuations

from cohlogic.catlogic import (canonical_round_trip, classify_propositionality, existential_reflector,
                               internal_logic, lattice_category, lattice_from_order, lattice_isomorphism,
                               lindenbaum, parse_category, parse_lattice, show_category, syntactic_slice,
                               validate_coherent_presentation)
from cohlogic.parser import parse_formula
from cohlogic.prover import Budget


@pytest.fixture(scope="module")
def ws():
    return fixture_workspace("L2.cat", "chain2.lat", "diamond.lat", "free2.lat")


def _models(t):
    return [v for v in valuations(t.signature) if all(seq_holds(ax.sequent, v) for ax in t.axioms)]


def _truth_set(f, models):
    return frozenset(i for i, v in enumerate(models) if truth(f, v))


def _generated(t, models):
    """Truth sets of the lattice generated by the atoms, top and bottom: the oracle for L_T."""
    sets = {frozenset(), frozenset(range(len(models)))}
    sets |= {frozenset(i for i, v in enumerate(models) if v[n]) for n, _ in t.signature.relations}
    while True:
        more = {a | b for a in sets for b in sets} | {a & b for a in sets for b in sets}
        if more <= sets:
            return sets
        sets |= more


@settings(max_examples=40, deadline=None)
@given(st.randoms(use_true_random=False))
def test_lindenbaum_matches_truth_set_oracle(rng):
    t = random_prop_theory(rng)
    lb = lindenbaum(t, 3, Budget())
    models = _models(t)
    sets = {e: _truth_set(lb.representatives[e], models) for e in lb.elements}
    assert len(set(sets.values())) == len(lb.elements)
    for a, b in itertools.product(lb.elements, repeat=2):
        assert lb.le(a, b) == (sets[a] <= sets[b])
    if lb.exact:
        assert set(sets.values()) == _generated(t, models)
        assert not lb.laws()


@pytest.mark.parametrize("name, size", [("P2", 4), ("FREE1", 3), ("FREE2", 6)])
def test_lindenbaum_of_fixtures(ws, name, size):
    lb = lindenbaum(ws.theory(name), 3, Budget())
    assert lb.exact and len(lb.elements) == size and not lb.laws()


@pytest.mark.parametrize("name", ["chain2", "diamond", "free2"])
def test_lattice_round_trip(ws, name):
    lat = ws.lattices[name]
    back = lindenbaum(internal_logic(lattice_category(lat, name)), 2, Budget())
    iso = lattice_isomorphism(back, lat)
    assert iso is not None
    assert sorted(iso.values()) == sorted(lat.elements)


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(6)))
def test_isomorphism_survives_relabelling(perm):
    _, lat = parse_lattice("lattice f {\n  elements 0 pq p q p_or_q 1\n"
                           "  order 0 pq, pq p, pq q, p p_or_q, q p_or_q, p_or_q 1\n}")
    names = [f"e{i}" for i in perm]
    ren = dict(zip(lat.elements, names))
    copy = lattice_from_order(names, [(ren[a], ren[b]) for a, b in lat.leq])
    iso = lattice_isomorphism(lat, copy)
    assert iso is not None
    for a, b in itertools.product(lat.elements, repeat=2):
        assert lat.le(a, b) == copy.le(iso[a], iso[b])


def test_non_isomorphic_lattices(ws):
    assert lattice_isomorphism(ws.lattices["chain2"], ws.lattices["diamond"]) is None
    chain4 = lattice_from_order("abcd", [("a", "b"), ("b", "c"), ("c", "d")])
    assert lattice_isomorphism(chain4, ws.lattices["diamond"]) is None


def test_lattice_laws_flag_the_pentagon():
    n5 = lattice_from_order(["0", "a", "b", "c", "1"], [("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")])
    assert any("distributive" in law for law in n5.laws())


def test_category_fixture_validates_and_round_trips(ws):
    c = ws.categories["L2"]
    assert validate_coherent_presentation(c).proved
    again = parse_category(show_category(c))
    assert show_category(again) == show_category(c)
    t = internal_logic(c)
    assert t.signature.sorts and t.axioms


def test_false_terminal_claim_fails():
    c = parse_category("category bad {\n  ob zero one\n  mor u: zero -> one\n  terminal zero\n}")
    assert validate_coherent_presentation(c).verdict == "Failed"


def test_existential_reflector_closes_the_context(ws):
    eq = ws.theory("EQ")
    phi = parse_formula("A(x,y)", eq.signature)
    assert str(existential_reflector(eq, phi)) == "exists x:s . exists y:s . A(x,y)"


def test_syntactic_slice_thinness(ws):
    assert syntactic_slice(ws.theory("P2"), 2, Budget()).thin() == "Proved"
    assert syntactic_slice(ws.theory("EQ"), 1, Budget()).thin() == "Failed"


def test_round_trip_on_p2(ws):
    rep = canonical_round_trip(ws.theory("P2"), 2, Budget())
    assert rep.proved and rep.count("Proved") == len(rep.entries) > 0


def test_classifier_on_free_theories(ws):
    for name in ("FREE1", "FREE2"):
        pr = classify_propositionality(ws.theory(name), 2, Budget())
        assert pr.propositional == "Proved" and pr.parapropositional == "Proved"
