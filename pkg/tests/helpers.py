"""Shared generators and brute-force oracles for the test suite.

The oracles here evaluate formulas straight from the AST and never call
the package's own evaluator, so they can be used to check it.
"""

from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from cohlogic.models import FiniteModel
from cohlogic.syntax import (BOT, TOP, And, App, Axiom, Bot, Eq, Exists, Forall, Not, Or, Rel, Sequent,
                             Signature, Theory, Top, Var)
from cohlogic.translation import Image
from cohlogic.workspace import fixture_path, load_workspace

FIXTURES = ("EQ.th", "DEQ.th", "P2.th", "TWO.th", "FREE1.th", "FREE2.th")


def fixture_workspace(*extra):
    return load_workspace([fixture_path(n) for n in FIXTURES + extra])


# ---------------------------------------------------------------- propositional


def prop_signature(n_atoms: int) -> Signature:
    return Signature((), tuple((f"P{i}", ()) for i in range(n_atoms)), ())


def random_prop_formula(rng: random.Random, n_atoms: int, depth: int = 2):
    roll = rng.random()
    if depth == 0 or roll < 0.35:
        pick = rng.randrange(n_atoms + 2)
        if pick == n_atoms:
            return TOP if rng.random() < 0.5 else BOT
        return Rel(f"P{min(pick, n_atoms - 1)}", ())
    left = random_prop_formula(rng, n_atoms, depth - 1)
    right = random_prop_formula(rng, n_atoms, depth - 1)
    return And(left, right) if roll < 0.7 else Or(left, right)


def random_prop_sequent(rng: random.Random, n_atoms: int) -> Sequent:
    ante = tuple(random_prop_formula(rng, n_atoms) for _ in range(rng.randrange(3)))
    return Sequent(ante, random_prop_formula(rng, n_atoms))


def random_prop_theory(rng: random.Random, name: str = "R") -> Theory:
    n_atoms = rng.randint(1, 4)
    axioms = [Axiom(f"a{i}", random_prop_sequent(rng, n_atoms)) for i in range(rng.randint(0, 6))]
    return Theory(name, prop_signature(n_atoms), axioms)


def truth(f, valuation: dict) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Rel):
        return valuation[f.name]
    if isinstance(f, And):
        return truth(f.left, valuation) and truth(f.right, valuation)
    if isinstance(f, Or):
        return truth(f.left, valuation) or truth(f.right, valuation)
    raise TypeError(f"not propositional: {f!r}")


def valuations(sig: Signature):
    names = [n for n, _ in sig.relations]
    for bits in itertools.product((False, True), repeat=len(names)):
        yield dict(zip(names, bits))


def seq_holds(s: Sequent, v: dict) -> bool:
    return not all(truth(a, v) for a in s.antecedent) or truth(s.succedent, v)


def valid_by_valuations(t: Theory, s: Sequent) -> bool:
    return all(seq_holds(s, v) for v in valuations(t.signature)
               if all(seq_holds(ax.sequent, v) for ax in t.axioms))


# ---------------------------------------------------------------- first order


def eval_term(model, t, env):
    if isinstance(t, Var):
        return env[t]
    return model.functions[t.fn][tuple(eval_term(model, a, env) for a in t.args)]


def fo_truth(model, f, env) -> bool:
    """Tarskian truth computed directly from carriers and tables."""
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Rel):
        return tuple(eval_term(model, a, env) for a in f.args) in model.relations.get(f.name, frozenset())
    if isinstance(f, Eq):
        return eval_term(model, f.left, env) == eval_term(model, f.right, env)
    if isinstance(f, And):
        return fo_truth(model, f.left, env) and fo_truth(model, f.right, env)
    if isinstance(f, Or):
        return fo_truth(model, f.left, env) or fo_truth(model, f.right, env)
    if isinstance(f, Not):
        return not fo_truth(model, f.body, env)
    if isinstance(f, Exists):
        return any(fo_truth(model, f.body, {**env, f.var: a}) for a in model.carriers[f.var.sort])
    if isinstance(f, Forall):
        return all(fo_truth(model, f.body, {**env, f.var: a}) for a in model.carriers[f.var.sort])
    raise TypeError(f"unknown formula {f!r}")


def fo_sequent_holds(model, s: Sequent) -> bool:
    ctx = s.context()
    for vals in itertools.product(*(model.carriers[v.sort] for v in ctx)):
        env = dict(zip(ctx, vals))
        if all(fo_truth(model, a, env) for a in s.antecedent) and not fo_truth(model, s.succedent, env):
            return False
    return True


def fo_is_model(model, t: Theory) -> bool:
    return all(fo_sequent_holds(model, ax.sequent) for ax in t.axioms)


# ---------------------------------------------------------------- theories with an equivalence relation


def random_equivalence_theory(rng: random.Random, name: str) -> tuple:
    """A one-sorted theory with a provable equivalence relation; returns ``(theory, class)``.

    Either ``E`` is axiomatised as an equivalence, or the class is the
    partition induced by two covering, disjoint predicates, so that
    reflexivity, symmetry and transitivity have to be derived by cases.
    Extra unary predicates are closed under the class.
    """
    s = "s"
    x, y, z = Var("x", s), Var("y", s), Var("z", s)
    axiomatised = rng.random() < 0.5
    unary = [f"U{i}" for i in range(rng.randint(1, 2) if axiomatised else 2)]
    rels = tuple((u, (s,)) for u in unary) + ((("E", (s, s)),) if axiomatised else ())
    sig = Signature((s,), rels, ())

    def U(i, v):
        return Rel(unary[i], (v,))

    if axiomatised:
        cls = Image((x, y), Rel("E", (x, y)))
        axioms = [Axiom("refl", Sequent((), cls.at((x, x)))),
                  Axiom("sym", Sequent((cls.at((x, y)),), cls.at((y, x)))),
                  Axiom("trans", Sequent((cls.at((x, y)), cls.at((y, z))), cls.at((x, z))))]
    else:
        cls = Image((x, y), Or(And(U(0, x), U(0, y)), And(U(1, x), U(1, y))))
        axioms = [Axiom("cover", Sequent((), Or(U(0, x), U(1, x)))),
                  Axiom("disjoint", Sequent((U(0, x), U(1, x)), BOT))]
    for i, u in enumerate(unary):
        if axiomatised:
            axioms.append(Axiom(f"{u}_closed", Sequent((U(i, x), cls.at((x, y))), U(i, y))))
    if rng.random() < 0.5:
        axioms.append(Axiom("inhabited", Sequent((), Exists(y, U(0, y)))))
    return Theory(name, sig, axioms), cls


# ---------------------------------------------------------------- hypothesis strategies

# two sorts so that sort inference and sort checking both get exercised
TWO_SORTED = Signature(("s", "t"), (("A", ("s", "s")), ("U", ("t",))), (("f", ("s",), "t"), ("c", (), "s")))
S_VARS = tuple(Var(n, "s") for n in ("x", "y", "z"))
T_VARS = tuple(Var(n, "t") for n in ("u", "w"))


def s_terms():
    return st.sampled_from(S_VARS + (App("c", (), "s"),))


def t_terms():
    return st.one_of(st.sampled_from(T_VARS), s_terms().map(lambda a: App("f", (a,), "t")))


def atoms_two_sorted():
    return st.one_of(
        st.just(TOP), st.just(BOT),
        st.tuples(s_terms(), s_terms()).map(lambda p: Rel("A", p)),
        t_terms().map(lambda a: Rel("U", (a,))),
        st.tuples(s_terms(), s_terms()).map(lambda p: Eq(*p)),
        st.tuples(t_terms(), t_terms()).map(lambda p: Eq(*p)),
    )


def coherent_formulas(max_leaves: int = 6):
    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda p: And(*p)),
            st.tuples(children, children).map(lambda p: Or(*p)),
            st.tuples(st.sampled_from(S_VARS + T_VARS), children).map(lambda p: Exists(*p)),
        )
    return st.recursive(atoms_two_sorted(), extend, max_leaves=max_leaves)


@st.composite
def two_sorted_models(draw, max_size: int = 3):
    """A random structure for ``TWO_SORTED``; it has no axioms to satisfy."""
    cs = tuple(str(i) for i in range(draw(st.integers(1, max_size))))
    ct = tuple(str(i) for i in range(draw(st.integers(1, max_size))))
    pairs = [(a, b) for a in cs for b in cs]
    A = frozenset(p for p in pairs if draw(st.booleans()))
    U = frozenset((b,) for b in ct if draw(st.booleans()))
    f = {(a,): draw(st.sampled_from(ct)) for a in cs}
    c = {(): draw(st.sampled_from(cs))}
    return FiniteModel(TWO_SORTED, {"s": cs, "t": ct}, {"A": A, "U": U}, {"f": f, "c": c})
