"""Deterministic enumeration of formulas up to a size bound.

Size counts formula nodes (``top``, ``bot``, atoms, ``&``, ``|``,
``exists``); terms inside an atom are free.  Output order is by size, then by
printed form, so every search built on top is reproducible.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .models import FiniteModel, assignments, enumerate_models, evaluate
from .printer import show_formula
from .prover import Budget, prove_sequent
from .syntax import (BOT, TOP, And, App, Bot, Eq, Exists, Or, Rel, Sequent, Signature, Theory, Top, Var,
                     free_context, fresh_name, size)


def formula_key(f) -> tuple:
    return (size(f), show_formula(f))


def _terms(sig: Signature, scope: tuple) -> dict:
    """Variables, constants and one-level applications, grouped by sort."""
    base = {s: [] for s in sig.sorts}
    for v in scope:
        base[v.sort].append(v)
    for f, dom, cod in sig.functions:
        if not dom:
            base[cod].append(App(f, (), cod))
    out = {s: list(ts) for s, ts in base.items()}
    for f, dom, cod in sig.functions:
        if dom:
            for args in itertools.product(*(base[s] for s in dom)):
                out[cod].append(App(f, tuple(args), cod))
    return out


def _term_key(t) -> tuple:
    return (0 if isinstance(t, Var) else 1, str(t))


def atoms(sig: Signature, scope) -> list:
    scope = tuple(scope)
    terms = _terms(sig, scope)
    out = []
    for r, dom in sig.relations:
        for args in itertools.product(*(terms[s] for s in dom)):
            out.append(Rel(r, tuple(args)))
    for s in sig.sorts:
        ts = sorted(terms[s], key=_term_key)
        for a, b in itertools.combinations(ts, 2):
            out.append(Eq(a, b))
    return out


class FormulaEnumerator:
    """Formulas over ``sig`` whose free variables lie in a given context."""

    def __init__(self, sig: Signature, quantify: bool = True):
        self.sig = sig
        self.quantify = quantify
        self._exact = lru_cache(maxsize=None)(self._exact_uncached)

    def _exact_uncached(self, scope: tuple, n: int) -> tuple:
        if n == 1:
            return tuple(sorted([TOP, BOT] + atoms(self.sig, scope), key=formula_key))
        out = []
        if self.quantify:
            names = {v.name for v in scope}
            for s in self.sig.sorts:
                v = Var(fresh_name("z", names), s)
                for body in self._exact(scope + (v,), n - 1):
                    if isinstance(body, Top) or v in free_context(body):
                        out.append(Exists(v, body))
        for k in range(1, n - 1):
            if k > n - 1 - k:
                break
            lefts = [f for f in self._exact(scope, k) if not isinstance(f, (Top, Bot))]
            rights = [f for f in self._exact(scope, n - 1 - k) if not isinstance(f, (Top, Bot))]
            for a in lefts:
                ka = formula_key(a)
                for b in rights:
                    if k == n - 1 - k and not ka < formula_key(b):
                        continue
                    out.append(And(a, b))
                    out.append(Or(a, b))
        return tuple(sorted(set(out), key=formula_key))

    def up_to(self, ctx, depth: int, require=()) -> list:
        """All formulas of size at most ``depth``; ``require`` lists variables that must occur."""
        ctx = tuple(ctx)
        need = set(require)
        out = []
        for n in range(1, depth + 1):
            for f in self._exact(ctx, n):
                if need <= set(free_context(f)):
                    out.append(f)
        return out


def enumerate_formulas(sig: Signature, ctx, depth: int, require=(), quantify: bool = True) -> list:
    return FormulaEnumerator(sig, quantify).up_to(ctx, depth, require)


class Sieve:
    """Separates formulas by their truth tables in a few finite models.

    Two formulas with different tables are certainly not equivalent, so only
    formulas with equal tables need a proof attempt.
    """

    def __init__(self, theory: Theory, max_size: int = 2, count: int = 12, limit: int = 2000):
        self.models: list[FiniteModel] = []
        if theory.signature.sorts or theory.signature.relations:
            for m in enumerate_models(theory, max_size, limit=limit):
                self.models.append(m)
                if len(self.models) >= count:
                    break

    def table(self, f, ctx) -> tuple:
        ctx = tuple(ctx)
        return tuple(tuple(evaluate(m, f, env) for env in assignments(m, ctx)) for m in self.models)

    def may_entail(self, a, b, ctx) -> bool:
        ctx = tuple(ctx)
        for m in self.models:
            for env in assignments(m, ctx):
                if evaluate(m, a, env) and not evaluate(m, b, env):
                    return False
        return True


class EntailmentCache:
    """Memoised ``a |- b`` verdicts inside one theory at one budget."""

    def __init__(self, theory: Theory, budget: Budget, sieve: Sieve | None = None):
        self.theory, self.budget = theory, budget
        self.sieve = sieve if sieve is not None else Sieve(theory)
        self._memo: dict = {}
        self.unknown: list = []

    def entails(self, a, b, ctx=None) -> str:
        """Return the prover status of ``a |- b``: Proved, Refuted or Unknown."""
        key = (a, b)
        if key in self._memo:
            return self._memo[key]
        if isinstance(b, Top) or isinstance(a, Bot) or a == b:
            status = "Proved"
        elif ctx is not None and not self.sieve.may_entail(a, b, ctx):
            status = "Refuted"
        else:
            seq = Sequent(() if isinstance(a, Top) else (a,), b)
            status = prove_sequent(self.theory, seq, self.budget).status
            if status == "Unknown":
                self.unknown.append(seq)
        self._memo[key] = status
        return status

    def equivalent(self, a, b, ctx=None) -> str:
        one = self.entails(a, b, ctx)
        if one == "Refuted":
            return "Refuted"
        two = self.entails(b, a, ctx)
        if one == two == "Proved":
            return "Proved"
        return "Refuted" if two == "Refuted" else "Unknown"
