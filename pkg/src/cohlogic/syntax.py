"""Abstract syntax for many-sorted coherent logic.

Terms, formulas, sequents and theories are immutable values.  Variables carry
their sort, so ``Var("x", "s")`` and ``Var("x", "t")`` are different variables.
Binary ``And``/``Or`` nodes are the only connectives; the n-ary helpers
``conj``/``disj`` right-nest and map the empty cases to ``TOP``/``BOT``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union


class LogicError(Exception):
    """Raised for ill-typed or unresolvable syntax."""


# ---------------------------------------------------------------- terms


@dataclass(frozen=True, order=True)
class Var:
    name: str
    sort: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple
    sort: str

    def __str__(self) -> str:
        if not self.args:
            return self.fn
        return f"{self.fn}({','.join(str(a) for a in self.args)})"


Term = Union[Var, App]


def term_sort(t: Term) -> str:
    return t.sort


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from term_vars(a)


def term_subst(t: Term, mapping: Mapping[Var, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t, t)
    return App(t.fn, tuple(term_subst(a, mapping) for a in t.args), t.sort)


# ---------------------------------------------------------------- formulas


class Formula:
    """Base class of formula nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        from .printer import show_formula

        return show_formula(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


TOP = Top()
BOT = Bot()


@dataclass(frozen=True)
class Rel(Formula):
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term

    @property
    def sort(self) -> str:
        return self.left.sort


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula


def conj(items: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; drops ``TOP`` operands, empty gives ``TOP``."""
    parts = [f for f in items if not isinstance(f, Top)]
    if not parts:
        return TOP
    out = parts[-1]
    for f in reversed(parts[:-1]):
        out = And(f, out)
    return out


def disj(items: Iterable[Formula]) -> Formula:
    """Right-nested disjunction; drops ``BOT`` operands, empty gives ``BOT``."""
    parts = [f for f in items if not isinstance(f, Bot)]
    if not parts:
        return BOT
    out = parts[-1]
    for f in reversed(parts[:-1]):
        out = Or(f, out)
    return out


def exists_many(vs: Sequence[Var], body: Formula) -> Formula:
    for v in reversed(list(vs)):
        body = Exists(v, body)
    return body


def eqs(xs: Sequence[Term], ys: Sequence[Term]) -> Formula:
    """Componentwise equality of two equally typed term lists."""
    if len(xs) != len(ys):
        raise LogicError("equality between contexts of different length")
    return conj(Eq(a, b) for a, b in zip(xs, ys))


def conjuncts(f: Formula) -> list:
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    if isinstance(f, Top):
        return []
    return [f]


def disjuncts(f: Formula) -> list:
    if isinstance(f, Or):
        return disjuncts(f.left) + disjuncts(f.right)
    if isinstance(f, Bot):
        return []
    return [f]


# ---------------------------------------------------------------- traversal


def _unique(vs: Iterable[Var]) -> list:
    seen, out = set(), []
    for v in vs:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def _free_iter(f: Formula, bound: frozenset) -> Iterator[Var]:
    if isinstance(f, (Top, Bot)):
        return
    if isinstance(f, Rel):
        for a in f.args:
            for v in term_vars(a):
                if v not in bound:
                    yield v
    elif isinstance(f, Eq):
        for t in (f.left, f.right):
            for v in term_vars(t):
                if v not in bound:
                    yield v
    elif isinstance(f, (And, Or)):
        yield from _free_iter(f.left, bound)
        yield from _free_iter(f.right, bound)
    elif isinstance(f, (Exists, Forall)):
        yield from _free_iter(f.body, bound | {f.var})
    elif isinstance(f, Not):
        yield from _free_iter(f.body, bound)
    else:
        raise LogicError(f"not a formula: {f!r}")


def free_context(phi: Formula) -> list:
    """Free variables of ``phi`` in order of first occurrence."""
    return _unique(_free_iter(phi, frozenset()))


def all_var_names(f: Formula) -> set:
    """Names of every variable occurring in ``f``, free or bound."""
    names = set()

    def walk(g):
        if isinstance(g, Rel):
            for a in g.args:
                names.update(v.name for v in term_vars(a))
        elif isinstance(g, Eq):
            names.update(v.name for v in term_vars(g.left))
            names.update(v.name for v in term_vars(g.right))
        elif isinstance(g, (And, Or)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Exists, Forall)):
            names.add(g.var.name)
            walk(g.body)
        elif isinstance(g, Not):
            walk(g.body)

    walk(f)
    return names


def symbols(f: Formula) -> set:
    """Relation and function names used by ``f``."""
    out = set()

    def term(t):
        if isinstance(t, App):
            out.add(t.fn)
            for a in t.args:
                term(a)

    def walk(g):
        if isinstance(g, Rel):
            out.add(g.name)
            for a in g.args:
                term(a)
        elif isinstance(g, Eq):
            term(g.left)
            term(g.right)
        elif isinstance(g, (And, Or)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Exists, Forall, Not)):
            walk(g.body)

    walk(f)
    return out


def size(f: Formula) -> int:
    """Number of formula nodes; an atom counts once whatever its terms."""
    if isinstance(f, (And, Or)):
        return 1 + size(f.left) + size(f.right)
    if isinstance(f, (Exists, Forall, Not)):
        return 1 + size(f.body)
    return 1


def is_coherent(f: Formula) -> bool:
    if isinstance(f, (Not, Forall)):
        return False
    if isinstance(f, (And, Or)):
        return is_coherent(f.left) and is_coherent(f.right)
    if isinstance(f, Exists):
        return is_coherent(f.body)
    return True


# ---------------------------------------------------------------- fresh names

_TRAILING_DIGITS = re.compile(r"\d+$")


def fresh_name(base: str, used: set) -> str:
    """``base`` itself if unused, else ``base`` with the smallest free numeric suffix."""
    if base not in used:
        return base
    stem = _TRAILING_DIGITS.sub("", base) or base
    n = 1
    while f"{stem}{n}" in used:
        n += 1
    return f"{stem}{n}"


def fresh_var(base: str, sort: str, used: set) -> Var:
    name = fresh_name(base, used)
    used.add(name)
    return Var(name, sort)


# ---------------------------------------------------------------- substitution


def substitute(phi: Formula, ctx: Sequence[Var], terms: Sequence[Term]) -> Formula:
    """Simultaneous capture-avoiding substitution ``phi[ctx/terms]``."""
    ctx, terms = list(ctx), list(terms)
    if len(ctx) != len(terms):
        raise LogicError(f"substitution arity mismatch: {len(ctx)} variables, {len(terms)} terms")
    for v, t in zip(ctx, terms):
        if v.sort != t.sort:
            raise LogicError(f"type mismatch substituting {t} : {t.sort} for {v.name} : {v.sort}")
    return _subst(phi, dict(zip(ctx, terms)))


def _subst(f: Formula, mapping: dict) -> Formula:
    if not mapping or isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Rel):
        return Rel(f.name, tuple(term_subst(a, mapping) for a in f.args))
    if isinstance(f, Eq):
        return Eq(term_subst(f.left, mapping), term_subst(f.right, mapping))
    if isinstance(f, (And, Or)):
        return type(f)(_subst(f.left, mapping), _subst(f.right, mapping))
    if isinstance(f, Not):
        return Not(_subst(f.body, mapping))
    if isinstance(f, (Exists, Forall)):
        inner = {k: t for k, t in mapping.items() if k != f.var}
        free_body = set(free_context(f.body))
        inner = {k: t for k, t in inner.items() if k in free_body}
        if not inner:
            return f
        incoming = {v for t in inner.values() for v in term_vars(t)}
        if any(v.name == f.var.name for v in incoming):
            used = all_var_names(f.body) | {v.name for v in incoming} | {k.name for k in inner}
            nv = fresh_var(f.var.name, f.var.sort, used)
            body = _subst(f.body, {f.var: nv})
            return type(f)(nv, _subst(body, inner))
        return type(f)(f.var, _subst(f.body, inner))
    raise LogicError(f"not a formula: {f!r}")


def rename_free(phi: Formula, mapping: Mapping[Var, Var]) -> Formula:
    """Rename free variables (capture-avoiding)."""
    keys = list(mapping)
    return substitute(phi, keys, [mapping[k] for k in keys])


# ---------------------------------------------------------------- alpha equivalence


def alpha_equal(a: Formula, b: Formula, ctx_a: Sequence[Var] | None = None,
                ctx_b: Sequence[Var] | None = None) -> bool:
    """True iff ``b`` is a type-preserving bijective renaming of ``a``.

    Free variables are matched positionally along the given contexts, which
    default to each formula's own first-occurrence context.  Free variables
    outside the supplied contexts must coincide.
    """
    ca = list(free_context(a) if ctx_a is None else ctx_a)
    cb = list(free_context(b) if ctx_b is None else ctx_b)
    if len(ca) != len(cb) or any(x.sort != y.sort for x, y in zip(ca, cb)):
        return False
    env_a = {v: ("f", i) for i, v in enumerate(ca)}
    env_b = {v: ("f", i) for i, v in enumerate(cb)}
    return _alpha(a, b, env_a, env_b, 0)


def _alpha_term(s, t, ea, eb) -> bool:
    if isinstance(s, Var) and isinstance(t, Var):
        ka, kb = ea.get(s), eb.get(t)
        if ka is None and kb is None:
            return s == t
        return ka == kb and s.sort == t.sort
    if isinstance(s, App) and isinstance(t, App):
        return (s.fn == t.fn and len(s.args) == len(t.args)
                and all(_alpha_term(x, y, ea, eb) for x, y in zip(s.args, t.args)))
    return False


def _alpha(a, b, ea, eb, depth) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, (Top, Bot)):
        return True
    if isinstance(a, Rel):
        return (a.name == b.name and len(a.args) == len(b.args)
                and all(_alpha_term(x, y, ea, eb) for x, y in zip(a.args, b.args)))
    if isinstance(a, Eq):
        return _alpha_term(a.left, b.left, ea, eb) and _alpha_term(a.right, b.right, ea, eb)
    if isinstance(a, (And, Or)):
        return _alpha(a.left, b.left, ea, eb, depth) and _alpha(a.right, b.right, ea, eb, depth)
    if isinstance(a, Not):
        return _alpha(a.body, b.body, ea, eb, depth)
    if isinstance(a, (Exists, Forall)):
        if a.var.sort != b.var.sort:
            return False
        key = ("b", depth)
        return _alpha(a.body, b.body, {**ea, a.var: key}, {**eb, b.var: key}, depth + 1)
    raise LogicError(f"not a formula: {a!r}")


# ---------------------------------------------------------------- function graphs


def is_graph_atom(f: Formula) -> bool:
    """``f(x1..xn) = y`` with variable arguments and a variable on the right."""
    return (isinstance(f, Eq) and isinstance(f.left, App) and isinstance(f.right, Var)
            and all(isinstance(a, Var) for a in f.left.args))


def _first_flat_app(t: Term):
    """Leftmost innermost application whose arguments are all variables."""
    if isinstance(t, Var):
        return None
    for a in t.args:
        hit = _first_flat_app(a)
        if hit is not None:
            return hit
    return t


def _replace_once(t: Term, target: App, v: Var, done: list) -> Term:
    if done[0] or isinstance(t, Var):
        return t
    if t == target and _first_flat_app(t) is t:
        done[0] = True
        return v
    new_args = []
    for a in t.args:
        new_args.append(_replace_once(a, target, v, done))
    return App(t.fn, tuple(new_args), t.sort)


def _unfold_atom(f: Formula, used: set) -> Formula:
    if isinstance(f, Eq) and is_graph_atom(f):
        return f
    terms = list(f.args) if isinstance(f, Rel) else [f.left, f.right]
    target = None
    for t in terms:
        target = _first_flat_app(t)
        if target is not None:
            break
    if target is None:
        return f
    y = fresh_var("y", target.sort, used)
    done = [False]
    new_terms = [_replace_once(t, target, y, done) for t in terms]
    atom = Rel(f.name, tuple(new_terms)) if isinstance(f, Rel) else Eq(*new_terms)
    return Exists(y, And(Eq(target, y), _unfold_atom(atom, used)))


def unfold_function_graphs(phi: Formula) -> Formula:
    """Replace nested applications by existentially bound graph atoms."""
    used = all_var_names(phi)

    def go(f):
        if isinstance(f, (Rel, Eq)):
            return _unfold_atom(f, used)
        if isinstance(f, (And, Or)):
            return type(f)(go(f.left), go(f.right))
        if isinstance(f, (Exists, Forall)):
            return type(f)(f.var, go(f.body))
        if isinstance(f, Not):
            return Not(go(f.body))
        return f

    return go(phi)


# ---------------------------------------------------------------- signatures


@dataclass(frozen=True)
class Signature:
    sorts: tuple = ()
    relations: tuple = ()   # (name, domain tuple)
    functions: tuple = ()   # (name, domain tuple, codomain)
    _rel: dict = field(default=None, compare=False, repr=False, hash=False)
    _fun: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "sorts", tuple(self.sorts))
        object.__setattr__(self, "relations", tuple((n, tuple(d)) for n, d in self.relations))
        object.__setattr__(self, "functions", tuple((n, tuple(d), c) for n, d, c in self.functions))
        object.__setattr__(self, "_rel", {n: d for n, d in self.relations})
        object.__setattr__(self, "_fun", {n: (d, c) for n, d, c in self.functions})
        names = list(self.sorts) + [n for n, _ in self.relations] + [n for n, _, _ in self.functions]
        seen = set()
        for n in names:
            if n in seen:
                raise LogicError(f"duplicate name {n}")
            seen.add(n)
        for n, d in self.relations:
            for s in d:
                if s not in self.sorts:
                    raise LogicError(f"relation {n} mentions undeclared sort {s}")
        for n, d, c in self.functions:
            for s in (*d, c):
                if s not in self.sorts:
                    raise LogicError(f"function {n} mentions undeclared sort {s}")

    def has_relation(self, name: str) -> bool:
        return name in self._rel

    def has_function(self, name: str) -> bool:
        return name in self._fun

    def rel_domain(self, name: str) -> tuple:
        try:
            return self._rel[name]
        except KeyError:
            raise LogicError(f"unknown relation {name}") from None

    def fun_type(self, name: str) -> tuple:
        try:
            return self._fun[name]
        except KeyError:
            raise LogicError(f"unknown function {name}") from None

    def names(self) -> set:
        return set(self.sorts) | set(self._rel) | set(self._fun)

    def is_propositional(self) -> bool:
        return not self.sorts and not self.functions

    def extend(self, sorts=(), relations=(), functions=()) -> "Signature":
        return Signature(self.sorts + tuple(sorts), self.relations + tuple(relations),
                         self.functions + tuple(functions))

    def contains(self, other: "Signature") -> bool:
        return (set(other.sorts) <= set(self.sorts)
                and all(self._rel.get(n) == d for n, d in other.relations)
                and all(self._fun.get(n) == (d, c) for n, d, c in other.functions))


# ---------------------------------------------------------------- sequents and theories


@dataclass(frozen=True)
class Sequent:
    antecedent: tuple
    succedent: Formula

    def __post_init__(self):
        object.__setattr__(self, "antecedent", tuple(self.antecedent))

    def context(self) -> list:
        return _unique(v for f in (*self.antecedent, self.succedent) for v in free_context(f))

    def __str__(self) -> str:
        from .printer import show_sequent

        return show_sequent(self)


@dataclass(frozen=True)
class Axiom:
    name: str
    sequent: Sequent


@dataclass(frozen=True)
class Theory:
    name: str
    signature: Signature
    axioms: tuple = ()
    mode: str = "coherent"

    def __post_init__(self):
        object.__setattr__(self, "axioms", tuple(self.axioms))
        names = [a.name for a in self.axioms]
        if len(set(names)) != len(names):
            raise LogicError("duplicate axiom name")
        for ax in self.axioms:
            check_sequent(self.signature, ax.sequent, self.mode)

    def axiom(self, name: str) -> Axiom:
        for a in self.axioms:
            if a.name == name:
                return a
        raise LogicError(f"unknown axiom {name}")

    def with_axioms(self, extra: Iterable[Axiom], signature: Signature | None = None,
                    name: str | None = None) -> "Theory":
        return Theory(name or self.name, signature or self.signature, self.axioms + tuple(extra), self.mode)


# ---------------------------------------------------------------- type checking


def check_term(sig: Signature, t: Term) -> str:
    if isinstance(t, Var):
        if t.sort not in sig.sorts:
            raise LogicError(f"variable {t.name} has undeclared sort {t.sort}")
        return t.sort
    dom, cod = sig.fun_type(t.fn)
    if len(dom) != len(t.args):
        raise LogicError(f"function {t.fn} expects {len(dom)} arguments, got {len(t.args)}")
    for s, a in zip(dom, t.args):
        if check_term(sig, a) != s:
            raise LogicError(f"argument {a} of {t.fn} should have sort {s}")
    if cod != t.sort:
        raise LogicError(f"application {t} tagged with wrong sort {t.sort}")
    return cod


def check_formula(sig: Signature, f: Formula, mode: str = "coherent") -> None:
    """Raise ``LogicError`` unless ``f`` is well typed over ``sig``."""
    if isinstance(f, (Top, Bot)):
        return
    if isinstance(f, Rel):
        dom = sig.rel_domain(f.name)
        if len(dom) != len(f.args):
            raise LogicError(f"relation {f.name} expects {len(dom)} arguments, got {len(f.args)}")
        for s, a in zip(dom, f.args):
            if check_term(sig, a) != s:
                raise LogicError(f"argument {a} of {f.name} should have sort {s}")
    elif isinstance(f, Eq):
        if check_term(sig, f.left) != check_term(sig, f.right):
            raise LogicError(f"equality between sorts {f.left.sort} and {f.right.sort}")
    elif isinstance(f, (And, Or)):
        check_formula(sig, f.left, mode)
        check_formula(sig, f.right, mode)
    elif isinstance(f, (Exists, Forall, Not)):
        if not isinstance(f, Exists) and mode != "classical":
            raise LogicError("negation and universal quantification need classical mode")
        if isinstance(f, (Exists, Forall)) and f.var.sort not in sig.sorts:
            raise LogicError(f"variable {f.var.name} has undeclared sort {f.var.sort}")
        check_formula(sig, f.body, mode)
    else:
        raise LogicError(f"not a formula: {f!r}")


def check_sequent(sig: Signature, s: Sequent, mode: str = "coherent") -> None:
    for f in (*s.antecedent, s.succedent):
        check_formula(sig, f, mode)
    names = {}
    for v in s.context():
        if names.setdefault(v.name, v.sort) != v.sort:
            raise LogicError(f"variable {v.name} used at two sorts")
