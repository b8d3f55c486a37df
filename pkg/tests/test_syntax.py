import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (S_VARS, TWO_SORTED, coherent_formulas, fixture_workspace, fo_truth, s_terms,
                     two_sorted_models)

from cohlogic.parser import ParseError, parse_formula, parse_sequent, parse_theory
from cohlogic.printer import show_formula, show_theory
from cohlogic.syntax import (BOT, TOP, And, App, Axiom, Eq, Exists, LogicError, Or, Rel, Sequent, Signature, Theory,
                             Var, alpha_equal, check_formula, conj, disj, free_context, fresh_name, is_coherent,
                             rename_free, size, substitute)

x, y, z = S_VARS
FIXED = {"x": "s", "y": "s", "z": "s", "u": "t", "w": "t"}
ALL_VARS = S_VARS + (Var("u", "t"), Var("w", "t"))


@settings(max_examples=300, deadline=None)
@given(coherent_formulas())
def test_print_then_parse_is_alpha_equal(phi):
    back = parse_formula(show_formula(phi), TWO_SORTED, FIXED)
    assert alpha_equal(phi, back)


@settings(max_examples=200, deadline=None)
@given(coherent_formulas())
def test_generated_formulas_are_coherent_and_well_typed(phi):
    check_formula(TWO_SORTED, phi)
    assert is_coherent(phi)
    assert size(phi) >= 1


@settings(max_examples=200, deadline=None)
@given(coherent_formulas(), s_terms(), two_sorted_models(), st.data())
def test_substitution_lemma(phi, t, m, data):
    """Truth of ``phi[x := t]`` equals truth of ``phi`` with ``x`` sent to the value of ``t``."""
    env = {v: data.draw(st.sampled_from(m.carriers[v.sort])) for v in ALL_VARS}
    value = env[t] if isinstance(t, Var) else m.functions[t.fn][()]
    assert fo_truth(m, substitute(phi, [x], [t]), env) == fo_truth(m, phi, {**env, x: value})


@settings(max_examples=200, deadline=None)
@given(coherent_formulas())
def test_renaming_free_variables_apart_is_alpha_equal_under_context(phi):
    ctx = free_context(phi)
    fresh = [Var(f"v{i}", v.sort) for i, v in enumerate(ctx)]
    renamed = rename_free(phi, dict(zip(ctx, fresh)))
    assert alpha_equal(phi, renamed, ctx, fresh)


def test_substitution_avoids_capture():
    phi = Exists(y, Rel("A", (x, y)))
    out = substitute(phi, [x], [y])
    assert isinstance(out, Exists) and out.var != y
    assert free_context(out) == [y]


def test_alpha_equal_distinguishes_bound_structure():
    a = Exists(y, Rel("A", (x, y)))
    b = Exists(z, Rel("A", (x, z)))
    c = Exists(y, Rel("A", (y, x)))
    assert alpha_equal(a, b)
    assert not alpha_equal(a, c)


def test_size_counts_formula_nodes():
    phi = Exists(y, And(Rel("A", (x, y)), Or(TOP, Eq(x, y))))
    assert size(phi) == 6


def test_conj_and_disj_units():
    assert conj([]) == TOP
    assert disj([]) == BOT
    assert conj([TOP, Rel("A", (x, x))]) == Rel("A", (x, x))


def test_fresh_name_uses_smallest_suffix():
    assert fresh_name("x", {"y"}) == "x"
    assert fresh_name("x", {"x", "x1"}) == "x2"
    assert fresh_name("x3", {"x3"}) == "x1"


def test_sort_mismatch_is_rejected():
    u = Var("u", "t")
    with pytest.raises(LogicError):
        check_formula(TWO_SORTED, Rel("A", (x, u)))
    with pytest.raises(ParseError):
        parse_formula("A(x, f(x))", TWO_SORTED)


def test_sort_inference_through_function_arguments():
    phi = parse_formula("exists v . U(f(v)) & A(v, c)", TWO_SORTED)
    assert phi.var.sort == "s"


def test_undetermined_sort_is_an_error():
    with pytest.raises(ParseError):
        parse_formula("exists v . v = v", TWO_SORTED)


def test_universal_rejected_in_coherent_mode():
    with pytest.raises(LogicError):
        parse_sequent("|- forall v:s . A(v, v)", TWO_SORTED)
    seq = parse_sequent("|- forall v:s . A(v, v)", TWO_SORTED, mode="classical")
    assert not is_coherent(seq.succedent)


def test_duplicate_symbols_rejected():
    with pytest.raises(LogicError):
        Signature(("s",), (("s", ()),))
    with pytest.raises(LogicError):
        Signature(("s",), (("R", ("q",)),))


def test_fixture_eq_round_trips_through_printer():
    eq = fixture_workspace().theory("EQ")
    assert [a.name for a in eq.axioms] == ["refl", "sym", "trans"]
    again = parse_theory(show_theory(eq))
    assert again == eq


def test_theory_rejects_ill_typed_axiom():
    sig = Signature(("s",), (("R", ("s",)),), (("k", (), "s"),))
    bad = Sequent((), Rel("R", (App("k", (), "s"), App("k", (), "s"))))
    with pytest.raises(LogicError):
        Theory("Bad", sig, (Axiom("a", bad),))


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse_theory("theory T {\n  sort s\n  rel R: s\n  ax a: |- R(x,\n}")
    assert re.match(r"5:\d+: ", str(info.value))
