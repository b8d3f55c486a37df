"""Finite Set-models: evaluation, model checking, exhaustive model search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .parser import ParseError, Stream, tokenize
from .syntax import (And, Bot, Eq, Exists, Forall, Formula, LogicError, Not, Or, Rel,
                     Sequent, Signature, Theory, Top, Var, symbols)


def label_key(label: str):
    return (0, int(label), "") if label.isdigit() else (1, 0, label)


@dataclass(frozen=True)
class FiniteModel:
    """Carriers are tuples of string labels; tables use those labels."""

    signature: Signature
    carriers: dict
    relations: dict
    functions: dict
    name: str = "M"

    def __post_init__(self):
        sig = self.signature
        for s in sig.sorts:
            if s not in self.carriers:
                raise LogicError(f"model has no carrier for sort {s}")
            if len(set(self.carriers[s])) != len(self.carriers[s]):
                raise LogicError(f"carrier of {s} has repeated labels")
        for n, dom in sig.relations:
            rows = self.relations.get(n, frozenset())
            for row in rows:
                if len(row) != len(dom) or any(x not in self.carriers[s] for x, s in zip(row, dom)):
                    raise LogicError(f"tuple {row} does not fit relation {n}")
        for n, dom, cod in sig.functions:
            table = self.functions.get(n)
            if table is None:
                raise LogicError(f"model has no table for function {n}")
            for args in itertools.product(*(self.carriers[s] for s in dom)):
                if args not in table:
                    raise LogicError(f"function {n} undefined at {args}")
                if table[args] not in self.carriers[cod]:
                    raise LogicError(f"function {n} leaves sort {cod} at {args}")

    def size(self) -> int:
        return sum(len(c) for c in self.carriers.values())

    def holds(self, f: Formula, env: dict | None = None) -> bool:
        return evaluate(self, f, env or {})

    def show(self, theory_name: str = "T") -> str:
        return show_model(self, theory_name)


def evaluate_term(m: FiniteModel, t, env: dict):
    if isinstance(t, Var):
        try:
            return env[t]
        except KeyError:
            raise LogicError(f"unassigned variable {t.name}") from None
    return m.functions[t.fn][tuple(evaluate_term(m, a, env) for a in t.args)]


def evaluate(m: FiniteModel, f: Formula, env: dict) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Rel):
        return tuple(evaluate_term(m, a, env) for a in f.args) in m.relations.get(f.name, ())
    if isinstance(f, Eq):
        return evaluate_term(m, f.left, env) == evaluate_term(m, f.right, env)
    if isinstance(f, And):
        return evaluate(m, f.left, env) and evaluate(m, f.right, env)
    if isinstance(f, Or):
        return evaluate(m, f.left, env) or evaluate(m, f.right, env)
    if isinstance(f, Exists):
        return any(evaluate(m, f.body, {**env, f.var: a}) for a in m.carriers[f.var.sort])
    if isinstance(f, Forall):
        return all(evaluate(m, f.body, {**env, f.var: a}) for a in m.carriers[f.var.sort])
    if isinstance(f, Not):
        return not evaluate(m, f.body, env)
    raise LogicError(f"not a formula: {f!r}")


def assignments(m: FiniteModel, ctx) -> Iterator[dict]:
    for vals in itertools.product(*(m.carriers[v.sort] for v in ctx)):
        yield dict(zip(ctx, vals))


def sequent_violation(m: FiniteModel, s: Sequent) -> dict | None:
    """First assignment (in canonical order) making the antecedent true and succedent false."""
    ctx = s.context()
    for env in assignments(m, ctx):
        if all(evaluate(m, a, env) for a in s.antecedent) and not evaluate(m, s.succedent, env):
            return env
    return None


@dataclass(frozen=True)
class Violation:
    axiom: str
    assignment: tuple   # ((var name, label), ...)

    def __str__(self) -> str:
        where = ", ".join(f"{n}={v}" for n, v in self.assignment)
        return f"{self.axiom} at {where}" if where else self.axiom


def check_model(m: FiniteModel, t: Theory, first_only: bool = False) -> tuple:
    """Return ``(ok, violations)``; every axiom is checked under every assignment."""
    if not m.signature.contains(t.signature):
        raise LogicError("model signature does not cover theory signature")
    out = []
    for ax in t.axioms:
        s = ax.sequent
        for env in assignments(m, s.context()):
            if all(evaluate(m, a, env) for a in s.antecedent) and not evaluate(m, s.succedent, env):
                out.append(Violation(ax.name, tuple((v.name, env[v]) for v in s.context())))
                if first_only:
                    return False, out
    return not out, out


# ---------------------------------------------------------------- model search


def _size_vectors(sorts, max_size: int):
    vecs = list(itertools.product(range(1, max_size + 1), repeat=len(sorts)))
    vecs.sort(key=lambda v: (sum(v), v))
    return vecs


def enumerate_models(t: Theory, max_size: int, extra_check=None, limit: int | None = None) -> Iterator:
    """Models of ``t`` with every carrier of size 1..max_size, in canonical order.

    Symbols are assigned in declaration order; after each symbol the axioms
    whose symbols are all assigned are checked, which prunes early.  ``limit``
    bounds the number of search nodes visited, complete or partial.
    """
    sig = t.signature
    order = [("rel", n, d) for n, d in sig.relations] + [("fun", n, (d, c)) for n, d, c in sig.functions]
    pos = {entry[1]: i for i, entry in enumerate(order)}
    staged = [[] for _ in range(len(order) + 1)]
    for ax in t.axioms:
        syms = set()
        for f in (*ax.sequent.antecedent, ax.sequent.succedent):
            syms |= symbols(f)
        stage = max((pos[s] + 1 for s in syms), default=0)
        staged[stage].append(ax.sequent)
    seen = [0]

    for sizes in _size_vectors(sig.sorts, max_size):
        carriers = {s: tuple(str(i) for i in range(n)) for s, n in zip(sig.sorts, sizes)}
        rels, funs = {}, {}

        def ok_stage(k):
            m = _Partial(sig, carriers, rels, funs)
            return all(sequent_violation(m, s) is None for s in staged[k])

        def rec(k):
            if limit is not None and seen[0] >= limit:
                return
            seen[0] += 1
            if k == len(order):
                m = FiniteModel(sig, dict(carriers), dict(rels), dict(funs), t.name + "_model")
                if extra_check is None or extra_check(m):
                    yield m
                return
            kind, name, shape = order[k]
            if kind == "rel":
                rows = list(itertools.product(*(carriers[s] for s in shape)))
                for mask in range(1 << len(rows)):
                    rels[name] = frozenset(r for i, r in enumerate(rows) if mask >> i & 1)
                    if ok_stage(k + 1):
                        yield from rec(k + 1)
                del rels[name]
            else:
                dom, cod = shape
                args = list(itertools.product(*(carriers[s] for s in dom)))
                for vals in itertools.product(carriers[cod], repeat=len(args)):
                    funs[name] = dict(zip(args, vals))
                    if ok_stage(k + 1):
                        yield from rec(k + 1)
                del funs[name]

        if ok_stage(0):
            yield from rec(0)


class _Partial:
    """Duck-typed model used while some symbols are still unassigned."""

    def __init__(self, sig, carriers, rels, funs):
        self.signature, self.carriers, self.relations, self.functions = sig, carriers, rels, funs


def find_countermodel(t: Theory, s: Sequent, max_size: int, limit: int | None = None):
    """First model of ``t`` (carriers up to ``max_size``) violating ``s``, or None."""
    for m in enumerate_models(t, max_size, lambda m: sequent_violation(m, s) is not None, limit):
        return m
    return None


def propositional_model(sig: Signature, true_props) -> FiniteModel:
    true_props = set(true_props)
    rels = {n: frozenset({()}) if n in true_props else frozenset() for n, _ in sig.relations}
    return FiniteModel(sig, {}, rels, {}, "valuation")


# ---------------------------------------------------------------- model DSL


def read_model(st: Stream, theories: dict) -> tuple:
    """Parse ``model M : T { sort s = {0,1}  rel A = {(0,0)}  fun f = {0->1} }``."""
    st.expect("model")
    name = st.ident("model name").text
    st.expect(":")
    ttok = st.ident("theory name")
    if ttok.text not in theories:
        raise ParseError(f"unknown theory {ttok.text}", ttok.line, ttok.col)
    theory = theories[ttok.text]
    sig = theory.signature
    st.expect("{")
    carriers, rels, funs = {}, {}, {}

    def tuple_or_label():
        if st.accept("("):
            items = []
            if not st.at(")"):
                items.append(st.label().text)
                while st.accept(","):
                    items.append(st.label().text)
            st.expect(")")
            return tuple(items)
        return (st.label().text,)

    while not st.at("}"):
        if st.accept("sort"):
            s = st.ident("sort")
            if s.text not in sig.sorts:
                raise ParseError(f"unknown sort {s.text}", s.line, s.col)
            st.expect("=")
            st.expect("{")
            labels = []
            if not st.at("}"):
                labels.append(st.label().text)
                while st.accept(","):
                    labels.append(st.label().text)
            st.expect("}")
            carriers[s.text] = tuple(labels)
        elif st.accept("rel"):
            r = st.ident("relation")
            if not sig.has_relation(r.text):
                raise ParseError(f"unknown relation {r.text}", r.line, r.col)
            st.expect("=")
            if st.accept("true"):
                rels[r.text] = frozenset({()})
                continue
            if st.accept("false"):
                rels[r.text] = frozenset()
                continue
            st.expect("{")
            rows = []
            if not st.at("}"):
                rows.append(tuple_or_label())
                while st.accept(","):
                    rows.append(tuple_or_label())
            st.expect("}")
            rels[r.text] = frozenset(rows)
        elif st.accept("fun"):
            f = st.ident("function")
            if not sig.has_function(f.text):
                raise ParseError(f"unknown function {f.text}", f.line, f.col)
            st.expect("=")
            table = {}
            if st.accept("{"):
                while not st.at("}"):
                    if st.accept("->"):
                        args = ()
                    else:
                        args = tuple_or_label()
                        st.expect("->")
                    table[args] = st.label().text
                    st.accept(",")
                st.expect("}")
            else:
                table[()] = st.label().text
            funs[f.text] = table
        else:
            raise st.error(f"unexpected {st.peek.text!r} in model {name}")
    st.expect("}")
    try:
        model = FiniteModel(sig, carriers, rels, funs, name)
    except LogicError as e:
        raise ParseError(f"model {name}: {e}") from None
    return model, ttok.text


def parse_model(text: str, theories: dict) -> FiniteModel:
    st = Stream(tokenize(text))
    m, _ = read_model(st, theories)
    return m


def _show_row(row) -> str:
    return row[0] if len(row) == 1 else "(" + ",".join(row) + ")"


def show_model(m: FiniteModel, theory_name: str = "T") -> str:
    sig = m.signature
    lines = [f"model {m.name} : {theory_name} {{"]
    for s in sig.sorts:
        lines.append(f"  sort {s} = {{{','.join(m.carriers[s])}}}")
    for n, dom in sig.relations:
        rows = m.relations.get(n, frozenset())
        if not dom:
            lines.append(f"  rel {n} = {'true' if rows else 'false'}")
            continue
        keyed = sorted(rows, key=lambda r: tuple(label_key(x) for x in r))
        lines.append(f"  rel {n} = {{{', '.join(_show_row(r) for r in keyed)}}}")
    for n, dom, _ in sig.functions:
        table = m.functions[n]
        if not dom:
            lines.append(f"  fun {n} = {table[()]}")
            continue
        keyed = sorted(table, key=lambda r: tuple(label_key(x) for x in r))
        lines.append(f"  fun {n} = {{{', '.join(f'{_show_row(a)}->{table[a]}' for a in keyed)}}}")
    lines.append("}")
    return "\n".join(lines) + "\n"
