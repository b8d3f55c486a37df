"""Concrete syntax for formulas, sequents and theories.

The output of ``show_theory`` parses back to an alpha-equivalent theory.
"""

from __future__ import annotations

from .syntax import (And, App, Axiom, Bot, Eq, Exists, Forall, Not, Or, Rel, Sequent,
                     Theory, Top, Var)

_OR, _AND, _ATOM = 1, 2, 4


def show_term(t, annotate: frozenset = frozenset(), seen: set | None = None) -> str:
    if isinstance(t, Var):
        if t in annotate and seen is not None and t not in seen:
            seen.add(t)
            return f"{t.name}:{t.sort}"
        if seen is not None:
            seen.add(t)
        return t.name
    if not t.args:
        return t.fn
    return f"{t.fn}({','.join(show_term(a, annotate, seen) for a in t.args)})"


def show_formula(f, annotate: frozenset = frozenset(), seen: set | None = None, prec: int = 0) -> str:
    """Render ``f``.  Variables in ``annotate`` get ``:sort`` at first occurrence."""
    if seen is None:
        seen = set()

    def go(g, p):
        if isinstance(g, Top):
            return "top"
        if isinstance(g, Bot):
            return "bot"
        if isinstance(g, Rel):
            if not g.args:
                return g.name
            return f"{g.name}({','.join(show_term(a, annotate, seen) for a in g.args)})"
        if isinstance(g, Eq):
            return f"{show_term(g.left, annotate, seen)} = {show_term(g.right, annotate, seen)}"
        if isinstance(g, And):
            s = f"{go(g.left, _AND + 1)} & {go(g.right, _AND)}"
            return f"({s})" if p > _AND else s
        if isinstance(g, Or):
            s = f"{go(g.left, _OR + 1)} | {go(g.right, _OR)}"
            return f"({s})" if p > _OR else s
        if isinstance(g, Not):
            return f"~{go(g.body, _ATOM)}"
        if isinstance(g, (Exists, Forall)):
            kw = "exists" if isinstance(g, Exists) else "forall"
            s = f"{kw} {g.var.name}:{g.var.sort} . {go(g.body, 0)}"
            return f"({s})" if p > 0 else s
        raise TypeError(f"not a formula: {g!r}")

    return go(f, prec)


def _needs_annotation(s: Sequent) -> frozenset:
    """Free variables never placed directly under a relation or function."""
    placed = set()

    def term(t):
        if isinstance(t, App):
            for a in t.args:
                if isinstance(a, Var):
                    placed.add(a)
                term(a)

    def walk(g):
        if isinstance(g, Rel):
            for a in g.args:
                if isinstance(a, Var):
                    placed.add(a)
                term(a)
        elif isinstance(g, Eq):
            term(g.left)
            term(g.right)
            for x, y in ((g.left, g.right), (g.right, g.left)):
                if isinstance(x, Var) and isinstance(y, App):
                    placed.add(x)
        elif isinstance(g, (And, Or)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Exists, Forall, Not)):
            walk(g.body)

    for f in (*s.antecedent, s.succedent):
        walk(f)
    return frozenset(v for v in s.context() if v not in placed)


def show_sequent(s: Sequent, annotate: bool = False) -> str:
    ann = _needs_annotation(s) if annotate else frozenset()
    seen: set = set()
    left = ", ".join(show_formula(f, ann, seen) for f in s.antecedent)
    right = show_formula(s.succedent, ann, seen)
    return f"{left} |- {right}" if left else f"|- {right}"


def show_axiom(ax: Axiom) -> str:
    return f"ax {ax.name}: {show_sequent(ax.sequent, annotate=True)}"


def show_theory(t: Theory) -> str:
    sig = t.signature
    head = f"theory {t.name}" + (" classical" if t.mode == "classical" else "") + " {"
    lines = [head]
    if sig.sorts:
        lines.append("  sort " + " ".join(sig.sorts))
    for n, d in sig.relations:
        lines.append(f"  rel {n}: {' '.join(d)}" if d else f"  rel {n}")
    for n, d, c in sig.functions:
        lines.append(f"  fun {n}: {' '.join(d)} -> {c}" if d else f"  fun {n}: -> {c}")
    for ax in t.axioms:
        lines.append("  " + show_axiom(ax))
    lines.append("}")
    return "\n".join(lines) + "\n"
