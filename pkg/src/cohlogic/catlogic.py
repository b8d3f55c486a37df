"""Finite coherent categories, their internal logic, and bounded pieces of syntactic categories."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .corpus import EntailmentCache, FormulaEnumerator, Sieve, enumerate_formulas
from .models import FiniteModel, assignments, evaluate, find_countermodel, sequent_violation, show_model
from .morita import class_code
from .parser import KEYWORDS, ParseError, Stream, tokenize
from .printer import show_formula, show_sequent
from .prover import Budget, prove_sequent
from .report import FAILED, PROVED, UNKNOWN, VerificationReport, combine, verdict_of
from .syntax import (BOT, TOP, And, App, Axiom, Bot, Eq, Exists, Formula, LogicError, Or, Rel, Sequent,
                     Signature, Theory, Top, Var, check_formula, conj, disj, eqs, exists_many, free_context,
                     fresh_name, rename_free, substitute)
from .translation import (Image, Reconstrual, SortImage, apply_reconstrual, compose_translations,
                          identity_reconstrual, make_reconstrual, translation_obligations, trivial_tmap,
                          verify_tmap, verify_translation)

# ---------------------------------------------------------------- presentations


@dataclass
class FinCatPresentation:
    """A finite category with designated finite limits, subobject joins and covers.

    ``composition`` maps ``(g, f)`` to the name of ``g . f``.
    """

    name: str
    objects: tuple
    morphisms: dict                      # name -> (dom, cod)
    identities: dict                     # object -> morphism name
    composition: dict
    terminal: str | None = None
    products: tuple = ()                 # (P, A, B, p1, p2)
    equalizers: tuple = ()               # (E, f, g, e)
    joins: tuple = ()                    # (B, m1, m2, m3)
    bottoms: tuple = ()                  # (B, m0)
    covers: tuple = ()

    def dom(self, f: str) -> str:
        return self.morphisms[f][0]

    def cod(self, f: str) -> str:
        return self.morphisms[f][1]

    def hom(self, a: str, b: str) -> list:
        return [f for f, (d, c) in self.morphisms.items() if d == a and c == b]

    def comp(self, g: str, f: str) -> str | None:
        return self.composition.get((g, f))

    def composable(self):
        for f, (_, b) in self.morphisms.items():
            for g, (b2, _) in self.morphisms.items():
                if b == b2:
                    yield g, f


def make_presentation(name: str, objects, morphisms: dict, composition: dict | None = None,
                      identities: dict | None = None, **structure) -> FinCatPresentation:
    """Add identity morphisms ``id_A`` where missing and fill in the unit laws."""
    objects = tuple(objects)
    morphisms = dict(morphisms)
    identities = dict(identities or {})
    for a in objects:
        if a not in identities:
            default = f"id_{a}"
            if morphisms.get(default, (a, a)) != (a, a):
                default = fresh_name(default, set(morphisms) | set(objects))
            identities[a] = default
        morphisms.setdefault(identities[a], (a, a))
    comp = dict(composition or {})
    for f, (a, b) in morphisms.items():
        comp.setdefault((identities[b], f), f)
        comp.setdefault((f, identities[a]), f)
    for key in ("products", "equalizers", "joins", "bottoms", "covers"):
        if key in structure:
            structure[key] = tuple(structure[key])
    return FinCatPresentation(name, objects, morphisms, identities, comp, **structure)


_STATEMENTS = {"ob", "mor", "id", "comp", "terminal", "product", "equalizer", "join", "bottom", "cover"}


def read_category(st: Stream) -> FinCatPresentation:
    st.expect("category")
    name = st.ident("category name").text
    st.expect("{")
    objects, morphisms, comp, ids = [], {}, {}, {}
    structure = {"products": [], "equalizers": [], "joins": [], "bottoms": [], "covers": []}

    def names():
        out = []
        while st.peek.kind == "ident" and st.peek.text not in _STATEMENTS:
            out.append(st.ident())
        return out

    def obj(tok):
        if tok.text not in objects:
            raise ParseError(f"unknown object {tok.text}", tok.line, tok.col)
        return tok.text

    def mor(tok):
        implicit = tok.text.startswith("id_") and tok.text[3:] in objects
        if tok.text not in morphisms and not implicit:
            raise ParseError(f"unknown morphism {tok.text}", tok.line, tok.col)
        return tok.text

    while not st.accept("}"):
        tok = st.next()
        kw = tok.text
        if kw == "ob":
            objects.extend(t.text for t in names())
        elif kw == "mor":
            fs = [st.ident("morphism name").text]
            while st.accept(","):
                fs.append(st.ident("morphism name").text)
            st.expect(":")
            a = obj(st.ident("object"))
            st.expect("->")
            b = obj(st.ident("object"))
            for f in fs:
                if f in morphisms:
                    raise ParseError(f"morphism {f} declared twice", tok.line, tok.col)
                morphisms[f] = (a, b)
        elif kw == "id":
            a = obj(st.ident("object"))
            st.expect("=")
            ids[a] = mor(st.ident("morphism"))
        elif kw == "comp":
            g = mor(st.ident("morphism"))
            st.expect(".")
            f = mor(st.ident("morphism"))
            st.expect("=")
            comp[(g, f)] = mor(st.ident("morphism"))
        elif kw == "terminal":
            structure["terminal"] = obj(st.ident("object"))
        elif kw == "product":
            p = obj(st.ident("object"))
            st.expect("=")
            a = obj(st.ident("object"))
            st.expect("x")
            b = obj(st.ident("object"))
            st.expect("with")
            p1, p2 = mor(st.ident("projection")), mor(st.ident("projection"))
            structure["products"].append((p, a, b, p1, p2))
        elif kw == "equalizer":
            e_ob = obj(st.ident("object"))
            st.expect("=")
            st.expect("eq")
            st.expect("(")
            f = mor(st.ident("morphism"))
            st.expect(",")
            g = mor(st.ident("morphism"))
            st.expect(")")
            st.expect("via")
            structure["equalizers"].append((e_ob, f, g, mor(st.ident("morphism"))))
        elif kw in ("join", "bottom"):
            st.expect("on")
            st.expect("Sub")
            st.expect("(")
            b = obj(st.ident("object"))
            st.expect(")")
            st.expect(":")
            m1 = mor(st.ident("morphism"))
            if kw == "bottom":
                structure["bottoms"].append((b, m1))
            else:
                st.expect("v")
                m2 = mor(st.ident("morphism"))
                st.expect("=")
                structure["joins"].append((b, m1, m2, mor(st.ident("morphism"))))
        elif kw == "cover":
            structure["covers"].extend(mor(t) for t in names())
        else:
            raise ParseError(f"unknown category statement {kw!r}", tok.line, tok.col)
    if "terminal" not in structure:
        structure["terminal"] = None
    return make_presentation(name, objects, morphisms, comp, ids, **structure)


def parse_category(text: str) -> FinCatPresentation:
    st = Stream(tokenize(text))
    c = read_category(st)
    if st.peek.kind != "eof":
        raise st.error(f"unexpected {st.peek.text!r} after category")
    return c


def show_category(c: FinCatPresentation) -> str:
    lines = [f"category {c.name} {{", "  ob " + " ".join(c.objects)]
    for f, (a, b) in c.morphisms.items():
        if f != f"id_{a}" or c.identities.get(a) != f:
            lines.append(f"  mor {f}: {a} -> {b}")
    for a, f in c.identities.items():
        if f != f"id_{a}":
            lines.append(f"  id {a} = {f}")
    ids = set(c.identities.values())
    for (g, f), h in c.composition.items():
        if g in ids or f in ids:
            continue
        lines.append(f"  comp {g}.{f} = {h}")
    if c.terminal:
        lines.append(f"  terminal {c.terminal}")
    for p, a, b, p1, p2 in c.products:
        lines.append(f"  product {p} = {a} x {b} with {p1} {p2}")
    for e_ob, f, g, e in c.equalizers:
        lines.append(f"  equalizer {e_ob} = eq({f},{g}) via {e}")
    for b, m1, m2, m3 in c.joins:
        lines.append(f"  join on Sub({b}): {m1} v {m2} = {m3}")
    for b, m0 in c.bottoms:
        lines.append(f"  bottom on Sub({b}): {m0}")
    if c.covers:
        lines.append("  cover " + " ".join(c.covers))
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- validation


def _is_monic(c: FinCatPresentation, m: str) -> bool:
    a = c.dom(m)
    for x in c.objects:
        hs = c.hom(x, a)
        for u, v in itertools.combinations(hs, 2):
            if c.comp(m, u) == c.comp(m, v):
                return False
    return True


def _is_epic(c: FinCatPresentation, e: str) -> bool:
    b = c.cod(e)
    for y in c.objects:
        for u, v in itertools.combinations(c.hom(b, y), 2):
            if c.comp(u, e) == c.comp(v, e):
                return False
    return True


def _factors(c: FinCatPresentation, m: str, n: str) -> list:
    """Morphisms ``k`` with ``n . k = m``."""
    return [k for k in c.hom(c.dom(m), c.dom(n)) if c.comp(n, k) == m]


class _SubPoset:
    """Monomorphisms into one object, ordered by factorisation, up to isomorphism."""

    def __init__(self, c: FinCatPresentation, b: str):
        self.c = c
        monos = [m for m, (_, cod) in c.morphisms.items() if cod == b and _is_monic(c, m)]
        self.leq = {(m, n) for m in monos for n in monos if _factors(c, m, n)}
        reps, self.rep = [], {}
        for m in monos:
            same = next((r for r in reps if (m, r) in self.leq and (r, m) in self.leq), None)
            if same is None:
                reps.append(m)
                same = m
            self.rep[m] = same
        self.elements = reps

    def le(self, m, n) -> bool:
        return (m, n) in self.leq

    def glb(self, m, n):
        lows = [x for x in self.elements if self.le(x, m) and self.le(x, n)]
        best = [x for x in lows if all(self.le(y, x) for y in lows)]
        return best[0] if best else None

    def lub(self, m, n):
        ups = [x for x in self.elements if self.le(m, x) and self.le(n, x)]
        best = [x for x in ups if all(self.le(x, y) for y in ups)]
        return best[0] if best else None


def validate_coherent_presentation(c: FinCatPresentation) -> VerificationReport:
    """Check the finite data: category laws, limits, subobject lattices and covers."""
    rep = VerificationReport(f"coherent presentation {c.name}")
    rep.meta["objects"] = len(c.objects)
    rep.meta["morphisms"] = len(c.morphisms)

    def fail(name, statement, why=""):
        rep.add(name, statement, FAILED, why)

    total = True
    for g, f in c.composable():
        h = c.comp(g, f)
        if h is None:
            fail("composition total", f"{g}.{f}", "no entry in the composition table")
            total = False
        elif c.morphisms.get(h) != (c.dom(f), c.cod(g)):
            fail("composition typed", f"{g}.{f} = {h}", f"{h} is not a morphism {c.dom(f)} -> {c.cod(g)}")
            total = False
    rep.add("composition table total", f"{sum(1 for _ in c.composable())} composable pairs",
            PROVED if total else FAILED)
    if not total:
        return rep
    unit = True
    for f, (a, b) in c.morphisms.items():
        if c.comp(c.identities[b], f) != f or c.comp(f, c.identities[a]) != f:
            fail("unit law", f, f"identity does not act as a unit on {f}")
            unit = False
    rep.add("unit laws", f"{len(c.morphisms)} morphisms", PROVED if unit else FAILED)
    assoc = True
    for g, f in c.composable():
        for h, g2 in c.composable():
            if g2 != g:
                continue
            left, right = c.comp(h, c.comp(g, f)), c.comp(c.comp(h, g), f)
            if left != right:
                fail("associativity", f"({h}.{g}).{f} = {right} but {h}.({g}.{f}) = {left}")
                assoc = False
    rep.add("associativity", "all composable triples", PROVED if assoc else FAILED)

    if c.terminal is not None:
        bad = [x for x in c.objects if len(c.hom(x, c.terminal)) != 1]
        rep.add(f"terminal {c.terminal}", "exactly one morphism from every object",
                FAILED if bad else PROVED, f"fails from {', '.join(bad)}" if bad else "")
    for p, a, b, p1, p2 in c.products:
        why = []
        if c.morphisms[p1] != (p, a) or c.morphisms[p2] != (p, b):
            why.append("projections have the wrong type")
        else:
            for x in c.objects:
                for f in c.hom(x, a):
                    for g in c.hom(x, b):
                        hs = [h for h in c.hom(x, p) if c.comp(p1, h) == f and c.comp(p2, h) == g]
                        if len(hs) != 1:
                            why.append(f"{len(hs)} mediating morphisms for ({f}, {g})")
        rep.add(f"product {p} = {a} x {b}", "universal property", FAILED if why else PROVED, "; ".join(why))
    for e_ob, f, g, e in c.equalizers:
        why = []
        if c.morphisms[f] != c.morphisms[g] or c.morphisms[e] != (e_ob, c.dom(f)):
            why.append("ill-typed equalizer data")
        else:
            if c.comp(f, e) != c.comp(g, e):
                why.append(f"{f}.{e} differs from {g}.{e}")
            for x in c.objects:
                for h in c.hom(x, c.dom(f)):
                    if c.comp(f, h) == c.comp(g, h):
                        ks = [k for k in c.hom(x, e_ob) if c.comp(e, k) == h]
                        if len(ks) != 1:
                            why.append(f"{len(ks)} factorisations of {h}")
        rep.add(f"equalizer {e_ob} of {f}, {g}", "universal property", FAILED if why else PROVED, "; ".join(why))

    subjects = sorted({b for b, *_ in c.joins} | {b for b, _ in c.bottoms}, key=c.objects.index)
    for b in subjects:
        sub = _SubPoset(c, b)
        why = []
        for b2, m1, m2, m3 in c.joins:
            if b2 != b:
                continue
            if any(m not in sub.rep for m in (m1, m2, m3)):
                why.append(f"{m1} v {m2} = {m3}: not monomorphisms into {b}")
            elif sub.lub(sub.rep[m1], sub.rep[m2]) != sub.rep[m3]:
                why.append(f"{m3} is not the least upper bound of {m1} and {m2}")
        for b2, m0 in c.bottoms:
            if b2 != b:
                continue
            if m0 not in sub.rep:
                why.append(f"{m0} is not a monomorphism into {b}")
            elif not all(sub.le(m0, m) for m in sub.elements):
                why.append(f"{m0} is not below every subobject")
        els = sub.elements
        meet = {(m, n): sub.glb(m, n) for m in els for n in els}
        join = {(m, n): sub.lub(m, n) for m in els for n in els}
        holes = [k for k, v in {**meet, **join}.items() if v is None]
        if holes:
            why.append("subobjects do not form a lattice")
        else:
            for x, y, z in itertools.product(els, repeat=3):
                if meet[(x, join[(y, z)])] != join[(meet[(x, y)], meet[(x, z)])]:
                    why.append(f"distributivity fails at ({x}, {y}, {z})")
                    break
        rep.add(f"Sub({b})", f"{len(els)} subobjects: bounded distributive lattice",
                FAILED if why else PROVED, "; ".join(why))
    for f in c.covers:
        rep.add(f"cover {f}", "epimorphism", PROVED if _is_epic(c, f) else FAILED)
    return rep


# ---------------------------------------------------------------- internal logic


def internal_logic(c: FinCatPresentation, check: bool = True) -> Theory:
    """One sort per object, one unary function per morphism, axioms from the designated structure."""
    if check:
        rep = validate_coherent_presentation(c)
        if not rep.proved:
            bad = "; ".join(f"{e.name}: {e.statement}" for e in rep.failures())
            raise LogicError(f"category {c.name} is not a valid coherent presentation: {bad}")
    sig = Signature(c.objects, (), tuple((f, (a,), b) for f, (a, b) in c.morphisms.items()))
    axioms = []

    def ap(f, t):
        return App(f, (t,), c.cod(f))

    def add(name, ante, succ):
        axioms.append(Axiom(name, Sequent(tuple(ante), succ)))

    for a, i in c.identities.items():
        x = Var("x", a)
        add(f"identity_{a}", (), Eq(ap(i, x), x))
    for (g, f), h in c.composition.items():
        x = Var("x", c.dom(f))
        add(f"comp_{g}_{f}", (), Eq(ap(g, ap(f, x)), ap(h, x)))
    for p, a, b, p1, p2 in c.products:
        u, v = Var("a", p), Var("b", p)
        x, y = Var("x", a), Var("y", b)
        add(f"product_{p}_unique", (And(Eq(ap(p1, u), ap(p1, v)), Eq(ap(p2, u), ap(p2, v))),), Eq(u, v))
        add(f"product_{p}_exists", (), Exists(u, And(Eq(ap(p1, u), x), Eq(ap(p2, u), y))))
    for e_ob, f, g, e in c.equalizers:
        x, x2 = Var("x", e_ob), Var("y", e_ob)
        y = Var("y", c.dom(f))
        add(f"equalizer_{e_ob}_monic", (Eq(ap(e, x), ap(e, x2)),), Eq(x, x2))
        add(f"equalizer_{e_ob}_equalizes", (), Eq(ap(f, ap(e, x)), ap(g, ap(e, x))))
        add(f"equalizer_{e_ob}_universal", (Eq(ap(f, y), ap(g, y)),), Exists(x, Eq(ap(e, x), y)))
    if c.terminal is not None:
        x, y = Var("x", c.terminal), Var("y", c.terminal)
        add(f"terminal_{c.terminal}_unique", (), Eq(x, y))
        add(f"terminal_{c.terminal}_inhabited", (), Exists(x, Eq(x, x)))
    for k, (b, m1, m2, m3) in enumerate(c.joins, 1):
        x = Var("x", b)
        parts = [Exists(Var(n, c.dom(m)), Eq(ap(m, Var(n, c.dom(m))), x)) for n, m in (("a", m1), ("b", m2))]
        whole = Exists(Var("c", c.dom(m3)), Eq(ap(m3, Var("c", c.dom(m3))), x))
        add(f"join_{b}_{k}_below", (Or(*parts),), whole)
        add(f"join_{b}_{k}_covered", (whole,), Or(*parts))
    for k, (b, m0) in enumerate(c.bottoms, 1):
        x, a = Var("x", b), Var("a", c.dom(m0))
        add(f"bottom_{b}_{k}", (Exists(a, Eq(ap(m0, a), x)),), BOT)
    for f in c.covers:
        x, y = Var("x", c.dom(f)), Var("y", c.cod(f))
        add(f"cover_{f}", (), Exists(x, Eq(ap(f, x), y)))
    return Theory(f"T_{c.name}", sig, axioms)


# ---------------------------------------------------------------- lattices


@dataclass
class BDLattice:
    """A finite lattice given by its order; meets and joins are derived."""

    elements: tuple
    leq: frozenset
    meet: dict = field(default_factory=dict)
    join: dict = field(default_factory=dict)
    top: str | None = None
    bottom: str | None = None
    representatives: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    exact: bool = True

    def le(self, a, b) -> bool:
        return (a, b) in self.leq

    def laws(self) -> list:
        """Violated lattice laws; empty when this is a bounded distributive lattice."""
        out = []
        els = self.elements
        for a in els:
            if not self.le(a, a):
                out.append(f"not reflexive at {a}")
        for a, b in itertools.product(els, repeat=2):
            if a != b and self.le(a, b) and self.le(b, a):
                out.append(f"not antisymmetric at {a}, {b}")
            if (a, b) not in self.meet or (a, b) not in self.join:
                out.append(f"no meet or join for {a}, {b}")
        if out:
            return out
        for a, b, c in itertools.product(els, repeat=3):
            if self.le(a, b) and self.le(b, c) and not self.le(a, c):
                out.append(f"not transitive at {a}, {b}, {c}")
            if self.meet[(a, self.join[(b, c)])] != self.join[(self.meet[(a, b)], self.meet[(a, c)])]:
                out.append(f"not distributive at {a}, {b}, {c}")
        if self.top is None or self.bottom is None:
            out.append("not bounded")
        return out

    def show(self, name: str = "L") -> str:
        pairs = [f"{a} {b}" for a in self.elements for b in self.elements if a != b and self.le(a, b)
                 and not any(c not in (a, b) and self.le(a, c) and self.le(c, b) for c in self.elements)]
        return f"lattice {name} {{\n  elements {' '.join(self.elements)}\n  order {', '.join(pairs)}\n}}\n"


def lattice_from_order(elements, pairs, **extra) -> BDLattice:
    """Close ``pairs`` reflexively and transitively and compute meets and joins."""
    els = tuple(elements)
    leq = {(a, a) for a in els} | set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b), (b2, c) in itertools.product(list(leq), repeat=2):
            if b == b2 and (a, c) not in leq:
                leq.add((a, c))
                changed = True
    meet, join = {}, {}
    for a, b in itertools.product(els, repeat=2):
        lows = [x for x in els if (x, a) in leq and (x, b) in leq]
        best = [x for x in lows if all((y, x) in leq for y in lows)]
        if best:
            meet[(a, b)] = best[0]
        ups = [x for x in els if (a, x) in leq and (b, x) in leq]
        best = [x for x in ups if all((x, y) in leq for y in ups)]
        if best:
            join[(a, b)] = best[0]
    tops = [x for x in els if all((y, x) in leq for y in els)]
    bots = [x for x in els if all((x, y) in leq for y in els)]
    return BDLattice(els, frozenset(leq), meet, join, tops[0] if tops else None, bots[0] if bots else None,
                     **extra)


def read_lattice(st: Stream) -> tuple:
    st.expect("lattice")
    name = st.ident("lattice name").text
    st.expect("{")
    st.expect("elements")
    els = []
    while st.peek.kind in ("ident", "num") and st.peek.text != "order":
        els.append(st.label().text)
    pairs = []
    if st.accept("order"):
        while not st.at("}"):
            a, b = st.label().text, st.label().text
            for x in (a, b):
                if x not in els:
                    raise st.error(f"unknown element {x}")
            pairs.append((a, b))
            if not st.accept(","):
                break
    st.expect("}")
    return name, lattice_from_order(els, pairs)


def parse_lattice(text: str) -> tuple:
    st = Stream(tokenize(text))
    out = read_lattice(st)
    if st.peek.kind != "eof":
        raise st.error(f"unexpected {st.peek.text!r} after lattice")
    return out


def lattice_isomorphism(a: BDLattice, b: BDLattice) -> dict | None:
    """An order isomorphism found by exhaustive matching, or None."""
    if len(a.elements) != len(b.elements):
        return None

    def profile(lat, x):
        return (sum(lat.le(y, x) for y in lat.elements), sum(lat.le(x, y) for y in lat.elements))

    pb = {y: profile(b, y) for y in b.elements}
    order = list(a.elements)

    def rec(i, acc):
        if i == len(order):
            return dict(acc)
        x = order[i]
        for y in b.elements:
            if y in acc.values() or pb[y] != profile(a, x):
                continue
            if all(a.le(x, u) == b.le(y, acc[u]) and a.le(u, x) == b.le(acc[u], y) for u in acc):
                acc[x] = y
                found = rec(i + 1, acc)
                if found:
                    return found
                del acc[x]
        return None

    return rec(0, {})


def _object_name(element: str) -> str:
    """Element labels that are numbers or keywords get a prefix so they can name sorts."""
    if element[0].isalpha() and element not in KEYWORDS:
        return element
    return f"el_{element}"


def lattice_category(lat: BDLattice, name: str = "L") -> FinCatPresentation:
    """The lattice as a thin category with its coherent structure designated.

    Products and subobject joins are designated for incomparable pairs only;
    for comparable pairs they are the smaller and the larger element.
    """
    problems = lat.laws()
    if problems:
        raise LogicError(f"not a bounded distributive lattice: {problems[0]}")
    rename = {a: _object_name(a) for a in lat.elements}
    lat = BDLattice(tuple(rename.values()), frozenset((rename[a], rename[b]) for a, b in lat.leq),
                    {(rename[a], rename[b]): rename[v] for (a, b), v in lat.meet.items()},
                    {(rename[a], rename[b]): rename[v] for (a, b), v in lat.join.items()},
                    rename[lat.top], rename[lat.bottom])
    els = lat.elements
    mor, ids = {}, {}
    for a in els:
        ids[a] = f"id_{a}"
        mor[ids[a]] = (a, a)
    arrow = {(a, a): ids[a] for a in els}
    for a, b in itertools.product(els, repeat=2):
        if a != b and lat.le(a, b):
            arrow[(a, b)] = f"le_{a}_{b}"
            mor[arrow[(a, b)]] = (a, b)
    comp = {}
    for (a, b), f in arrow.items():
        for (b2, c), g in arrow.items():
            if b == b2:
                comp[(g, f)] = arrow[(a, c)]
    top, bot = lat.top, lat.bottom
    products, joins = [], []
    for a, b in itertools.combinations(els, 2):
        if lat.le(a, b) or lat.le(b, a):
            continue
        m = lat.meet[(a, b)]
        products.append((m, a, b, arrow[(m, a)], arrow[(m, b)]))
        j = lat.join[(a, b)]
        joins.append((top, arrow[(a, top)], arrow[(b, top)], arrow[(j, top)]))
    bottoms = [(top, arrow[(bot, top)])]
    return make_presentation(name, els, mor, comp, ids, terminal=top, products=products, joins=joins,
                             bottoms=bottoms)


# ---------------------------------------------------------------- classes of formulas


def standard_context(sorts, base: str = "x") -> tuple:
    return tuple(Var(f"{base}{i + 1}", s) for i, s in enumerate(sorts))


def _prefer_constants(cls: list) -> list:
    for special in (TOP, BOT):
        if special in cls and cls[0] != special:
            return [special] + [f for f in cls if f != special]
    return cls


def formula_classes(cache: EntailmentCache, formulas, ctx) -> tuple:
    """Group formulas by Proved bi-entailment in context ``ctx``.

    Returns ``(classes, unknown)``: each class lists its members with the
    representative first, and ``unknown`` names the pairs that stayed apart
    only because the prover gave up.
    """
    ctx = tuple(ctx)
    groups: dict = {}
    classes, unknown = [], []
    for f in formulas:
        key = cache.sieve.table(f, ctx)
        home = None
        for cls in groups.setdefault(key, []):
            v = cache.equivalent(cls[0], f, ctx)
            if v == "Proved":
                home = cls
                break
            if v == "Unknown":
                unknown.append(f"{show_formula(cls[0])} vs {show_formula(f)}")
        if home is None:
            home = [f]
            groups[key].append(home)
            classes.append(home)
        else:
            home.append(f)
    return [_prefer_constants(c) for c in classes], unknown


def subobject_leq(t: Theory, phi: Formula, psi: Formula, budget: Budget = Budget(), ctx_phi=None,
                  ctx_psi=None):
    """Prover result for ``phi(x) |- psi(x)``, the order on subobjects of one context.

    When ``ctx_psi`` is given it is renamed positionally onto ``ctx_phi``;
    otherwise both formulas are read in the merged context of their free
    variables.
    """
    if ctx_psi is not None:
        ctx_phi = tuple(ctx_phi if ctx_phi is not None else free_context(phi))
        ctx_psi = tuple(ctx_psi)
        if [v.sort for v in ctx_phi] != [v.sort for v in ctx_psi]:
            raise LogicError("subobject_leq: contexts of different sorts")
        psi = rename_free(psi, dict(zip(ctx_psi, ctx_phi)))
    return prove_sequent(t, Sequent((phi,), psi), budget)


def existential_reflector(t: Theory, phi: Formula, ctx=None) -> Formula:
    """The sentence closing ``phi`` existentially over its whole context."""
    check_formula(t.signature, phi)
    ctx = tuple(free_context(phi) if ctx is None else ctx)
    return exists_many(ctx, phi)


# ---------------------------------------------------------------- Lindenbaum lattice


def lindenbaum(t: Theory, depth: int, budget: Budget = Budget(), sieve: Sieve | None = None) -> BDLattice:
    """Sentences up to ``depth`` modulo Proved bi-entailment, ordered by entailment."""
    cache = EntailmentCache(t, budget, sieve)
    sentences = enumerate_formulas(t.signature, (), depth)
    classes, unknown = formula_classes(cache, sentences, ())
    reps = [c[0] for c in classes]
    labels = tuple(show_formula(r) for r in reps)
    pairs, open_pairs = [], []
    for (i, a), (j, b) in itertools.product(enumerate(reps), repeat=2):
        if i == j:
            continue
        v = cache.entails(a, b, ())
        if v == "Proved":
            pairs.append((labels[i], labels[j]))
        elif v == "Unknown":
            open_pairs.append(f"{labels[i]} |- {labels[j]}")
    notes = [f"depth {depth} (formula nodes)", f"budget {budget}", f"{len(sentences)} sentences"]
    lat = lattice_from_order(labels, pairs, representatives=dict(zip(labels, reps)), notes=notes)
    exact = not unknown and not open_pairs
    for a, b in itertools.product(labels, repeat=2):
        m, j = lat.meet.get((a, b)), lat.join.get((a, b))
        ra, rb = lat.representatives[a], lat.representatives[b]
        if m is None or cache.equivalent(And(ra, rb), lat.representatives[m], ()) != "Proved":
            exact = False
            notes.append(f"meet of {a} and {b} is not among the classes up to depth {depth}")
        if j is None or cache.equivalent(Or(ra, rb), lat.representatives[j], ()) != "Proved":
            exact = False
            notes.append(f"join of {a} and {b} is not among the classes up to depth {depth}")
    if unknown or open_pairs:
        notes.append("incomplete: some comparisons were Unknown")
        notes.extend(unknown + open_pairs)
    if not exact:
        notes.append("depth-bounded approximation")
    lat.exact = exact
    return lat


# ---------------------------------------------------------------- syntactic slice


@dataclass(frozen=True)
class SliceObject:
    context: tuple
    formula: Formula
    members: int = 1

    def __str__(self) -> str:
        ctx = ", ".join(f"{v.name}:{v.sort}" for v in self.context)
        return f"[{show_formula(self.formula)} | {ctx}]"


def slice_contexts(t: Theory) -> list:
    """The empty context, one variable of each sort, and two variables of each sort."""
    sorts = t.signature.sorts
    return [()] + [(s,) for s in sorts] + [(s, s) for s in sorts]


def morphism_sequents(dom: SliceObject, cod: SliceObject, theta: Image) -> list:
    """The three sequents making ``theta`` a morphism ``dom -> cod``."""
    n = len(dom.context)
    xs, ys = theta.params[:n], theta.params[n:]
    used = {v.name for v in theta.params}
    zs = []
    for y in ys:
        z = Var(fresh_name("z", used), y.sort)
        used.add(z.name)
        zs.append(z)
    zs = tuple(zs)
    phi = substitute(dom.formula, dom.context, xs)
    psi = substitute(cod.formula, cod.context, ys)
    body = theta.formula
    return [
        ("total", Sequent((phi,), exists_many(ys, body))),
        ("functional", Sequent((body, substitute(body, ys, zs)), eqs(ys, zs))),
        ("typed", Sequent((body,), conj([phi, psi]))),
    ]


def compose_morphisms(theta: Image, eta: Image, n: int) -> Image:
    """``exists y (theta(x,y) & eta(y,z))``; ``n`` is the length of the domain context."""
    m = len(theta.params) - n
    xs, ys = theta.params[:n], theta.params[n:]
    used = {v.name for v in theta.params}
    zs = []
    for v in eta.params[m:]:
        z = Var(fresh_name("z", used), v.sort)
        used.add(z.name)
        zs.append(z)
    body = And(theta.formula, eta.at(ys + tuple(zs)))
    return Image(xs + tuple(zs), exists_many(ys, body))


@dataclass
class SyntacticSlice:
    theory: Theory
    depth: int
    budget: Budget
    objects: list
    homs: dict                                  # (i, j) -> list of Image
    unknown: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def hom(self, i: int, j: int) -> list:
        return self.homs.get((i, j), [])

    def compose(self, i: int, theta: Image, eta: Image) -> Image:
        return compose_morphisms(theta, eta, len(self.objects[i].context))

    def thin(self) -> str:
        """Proved when every hom-set has at most one element, Failed otherwise."""
        if any(len(v) > 1 for v in self.homs.values()):
            return FAILED
        return UNKNOWN if self.unknown else PROVED

    def render(self) -> str:
        lines = [f"# syntactic slice of {self.theory.name}", f"# depth: {self.depth}", f"# budget: {self.budget}"]
        for i, o in enumerate(self.objects):
            lines.append(f"object {i}: {o}")
        for (i, j), hs in sorted(self.homs.items()):
            for h in hs:
                lines.append(f"hom {i} -> {j}: {show_formula(h.formula)}")
        for u in self.unknown:
            lines.append(f"unknown: {u}")
        for n in self.notes:
            lines.append(f"note: {n}")
        return "\n".join(lines) + "\n"


def _sieve_holds(sieve: Sieve, seq: Sequent) -> bool:
    return all(sequent_violation(m, seq) is None for m in sieve.models)


def slice_objects(t: Theory, depth: int, cache: EntailmentCache, contexts=None) -> tuple:
    objects, unknown = [], []
    enum = FormulaEnumerator(t.signature)
    for sorts in contexts if contexts is not None else slice_contexts(t):
        ctx = standard_context(sorts)
        formulas = enum.up_to(ctx, depth)
        classes, unk = formula_classes(cache, formulas, ctx)
        unknown += unk
        objects += [SliceObject(ctx, c[0], len(c)) for c in classes]
    return objects, unknown


def syntactic_slice(t: Theory, depth: int, budget: Budget = Budget(), contexts=None) -> SyntacticSlice:
    """Objects up to ``depth`` in the given contexts, with every morphism formula up to ``depth``."""
    cache = EntailmentCache(t, budget)
    objects, unknown = slice_objects(t, depth, cache, contexts)
    enum = FormulaEnumerator(t.signature)
    homs = {}
    for (i, a), (j, b) in itertools.product(enumerate(objects), repeat=2):
        xs = standard_context([v.sort for v in a.context], "x")
        ys = standard_context([v.sort for v in b.context], "y")
        src, dst = SliceObject(xs, substitute(a.formula, a.context, xs)), \
            SliceObject(ys, substitute(b.formula, b.context, ys))
        found = []
        for theta in enum.up_to(xs + ys, depth):
            img = Image(xs + ys, theta)
            seqs = morphism_sequents(src, dst, img)
            if not all(_sieve_holds(cache.sieve, s) for _, s in seqs):
                continue
            status = [prove_sequent(t, s, budget).status for _, s in seqs]
            if "Refuted" in status:
                continue
            if "Unknown" in status:
                unknown.append(f"{i} -> {j}: {show_formula(theta)}")
                continue
            same = False
            for other in found:
                v = cache.equivalent(other.formula, theta, xs + ys)
                if v == "Proved":
                    same = True
                    break
                if v == "Unknown":
                    unknown.append(f"{i} -> {j}: {show_formula(other.formula)} vs {show_formula(theta)}")
            if not same:
                found.append(img)
        if found:
            homs[(i, j)] = found
    notes = [f"contexts: {', '.join('(' + ','.join(c) + ')' for c in (contexts or slice_contexts(t)))}"]
    if unknown:
        notes.append("incomplete: some candidates were Unknown")
    return SyntacticSlice(t, depth, budget, objects, homs, unknown, notes)


# ---------------------------------------------------------------- propositionality


@dataclass
class PropositionalityReport:
    report: VerificationReport
    propositional: str
    parapropositional: str
    thin: str
    countermodels: dict = field(default_factory=dict)      # sort -> FiniteModel
    decompositions: dict = field(default_factory=dict)     # object label -> list of (summand, sentence)

    @property
    def verdict(self) -> str:
        return self.report.verdict

    def render_text(self, evidence: bool = True) -> str:
        return self.report.render_text(evidence)

    def render_structured(self) -> str:
        return self.report.render_structured()


def _rename_apart(phi: Formula, ctx: tuple, base: str) -> tuple:
    used = {v.name for v in ctx}
    new = []
    for v in ctx:
        n = fresh_name(base, used)
        used.add(n)
        new.append(Var(n, v.sort))
    return tuple(new), substitute(phi, ctx, new)


def _extension(m: FiniteModel, phi: Formula, ctx: tuple) -> frozenset:
    return frozenset(tuple(env[v] for v in ctx) for env in assignments(m, ctx) if evaluate(m, phi, env))


def _not_a_sentence(sieve: Sieve, phi: Formula, ctx: tuple):
    """A model where ``phi`` holds of some but not all tuples; sentences never do that."""
    for m in sieve.models:
        ext = _extension(m, phi, ctx)
        full = sum(1 for _ in assignments(m, ctx))
        if 0 < len(ext) < full:
            return m
    return None


def _decompose(t: Theory, obj: SliceObject, depth: int, budget: Budget, cache: EntailmentCache,
               enum: FormulaEnumerator, max_summands: int = 4) -> tuple:
    """Search summands ``theta_i`` with ``obj`` their disjoint union and each a subterminal.

    Returns ``(summands, unknown)``; ``summands`` is None when the bounded
    search found nothing.
    """
    ctx, alpha = obj.context, obj.formula
    if not ctx:
        return ([] if isinstance(alpha, Bot) else [alpha]), []
    sieve = cache.sieve
    ys, _ = _rename_apart(TOP, ctx, "y")
    pool, tables = [], set()
    for theta in enum.up_to(ctx, depth):
        if isinstance(theta, Bot):
            continue
        exts = [(_extension(m, theta, ctx), _extension(m, alpha, ctx)) for m in sieve.models]
        if any(len(e) > 1 or not e <= a for e, a in exts):
            continue
        if exts and all(not e for e, _ in exts):
            continue
        key = tuple(e for e, _ in exts)
        if key in tables:
            continue
        tables.add(key)
        pool.append((theta, [e for e, _ in exts]))
    alphas = [_extension(m, alpha, ctx) for m in sieve.models]
    unknown = []
    for n in range(0, max_summands + 1):
        for combo in itertools.combinations(pool, n):
            ok = True
            for k, a in enumerate(alphas):
                parts = [c[1][k] for c in combo]
                if sum(len(p) for p in parts) != len(a) or frozenset().union(*parts) != a:
                    ok = False
                    break
            if not ok:
                continue
            thetas = [c[0] for c in combo]
            seqs = [("exhaustive", Sequent((alpha,), disj(thetas)))]
            for i, j in itertools.combinations(range(n), 2):
                seqs.append((f"disjoint {i + 1},{j + 1}", Sequent((thetas[i], thetas[j]), BOT)))
            for i, th in enumerate(thetas):
                seqs.append((f"inside {i + 1}", Sequent((th,), alpha)))
                seqs.append((f"subterminal {i + 1}", Sequent((th, substitute(th, ctx, ys)), eqs(ctx, ys))))
            status = [prove_sequent(t, s, budget).status for _, s in seqs]
            if all(s == "Proved" for s in status):
                return thetas, unknown
            if "Unknown" in status and "Refuted" not in status:
                unknown.append(" + ".join(show_formula(th) for th in thetas))
    return None, unknown


def classify_propositionality(t: Theory, depth: int, budget: Budget = Budget(),
                              contexts=None) -> PropositionalityReport:
    """Evaluate the propositionality conditions and search coproduct decompositions."""
    rep = VerificationReport(f"propositionality of {t.name}")
    rep.meta.update({"depth": depth, "budget": str(budget)})
    sl = syntactic_slice(t, depth, budget, contexts)
    cache = EntailmentCache(t, budget)
    lat = lindenbaum(t, depth, budget, cache.sieve)
    countermodels = {}

    singletons = []
    for s in t.signature.sorts:
        x, y = Var("x", s), Var("y", s)
        seq = Sequent((), Eq(x, y))
        res = prove_sequent(t, seq, budget)
        rep.add_result(f"subsingleton: |- x = y on {s}", seq, res, t.name)
        singletons.append(verdict_of(res))
        if res.status == "Refuted":
            m = res.model if res.model is not None else find_countermodel(t, seq, 2)
            if m is not None:
                countermodels[s] = m
                rep.notes.append(f"countermodel to |- x = y on {s}:\n{show_model(m, t.name).rstrip()}")
            else:
                rep.add(f"subsingleton: countermodel on {s}", show_sequent(seq), UNKNOWN, "no countermodel up to size 2")
    propositional = combine(singletons)

    objects = [o for o in sl.objects if o.context]
    for o in objects:
        ys, phi_y = _rename_apart(o.formula, o.context, "y")
        seq = Sequent((o.formula, phi_y), eqs(o.context, ys))
        rep.add_result(f"monic to 1: {o}", seq, prove_sequent(t, seq, budget), t.name)
    closed = []
    for o in objects:
        zs, phi_z = _rename_apart(o.formula, o.context, "z")
        seq = Sequent((exists_many(zs, phi_z),), o.formula)
        res = prove_sequent(t, seq, budget)
        rep.add_result(f"existential closure: {o}", seq, res, t.name)
        closed.append(verdict_of(res))
    for o, v_closed in zip(objects, closed):
        name = f"equivalent to a sentence: {o}"
        if v_closed == PROVED:
            rep.add(name, show_formula(existential_reflector(t, o.formula, o.context)), PROVED, "by its existential closure")
            continue
        m = _not_a_sentence(cache.sieve, o.formula, o.context)
        if m is not None:
            rep.add(name, show_formula(o.formula), FAILED,
                    "holds of some but not all tuples in\n" + show_model(m, t.name))
            continue
        hit = next((lab for lab, r in lat.representatives.items()
                    if cache.equivalent(o.formula, r, o.context) == "Proved"), None)
        rep.add(name, show_formula(o.formula), PROVED if hit else UNKNOWN,
                f"equivalent to {hit}" if hit else f"no sentence up to depth {depth} found")
    thin = sl.thin()
    multi = [(i, j, hs) for (i, j), hs in sorted(sl.homs.items()) if len(hs) > 1]
    ev = ""
    if multi:
        i, j, hs = multi[0]
        ev = f"{len(hs)} morphisms {sl.objects[i]} -> {sl.objects[j]}: " + \
             "; ".join(show_formula(h.formula) for h in hs)
    rep.add("syntactic slice is thin", f"{len(sl.objects)} objects, depth {depth}", thin, ev)
    for cond in ("weakly intertranslatable with a propositional theory",
                 "syntactic category equivalent to its subterminals"):
        rep.add(cond, "equivalent to every sort being a subsingleton", propositional)

    decompositions = {}
    para = []
    enum = FormulaEnumerator(t.signature)
    for o in sl.objects:
        if len(o.context) > 1:
            continue
        thetas, unknown = _decompose(t, o, depth, budget, cache, enum)
        name = f"parapropositional: {o}"
        if thetas is None:
            why = f"no decomposition with at most 4 summands up to depth {depth}"
            if unknown:
                why += "; Unknown: " + ", ".join(unknown)
            rep.add(name, "coproduct of subterminals", UNKNOWN, why)
            para.append(UNKNOWN)
            continue
        sentences = []
        for th in thetas:
            sent = exists_many(o.context, th)
            label = next((lab for lab, r in lat.representatives.items()
                          if cache.equivalent(sent, r, ()) == "Proved"), show_formula(sent))
            sentences.append((th, label))
        decompositions[str(o)] = sentences
        stmt = " + ".join(f"[{show_formula(th)}] ~ {lab}" for th, lab in sentences) or "empty coproduct"
        rep.add(name, stmt, PROVED)
        para.append(PROVED)
    if propositional == PROVED:
        parapropositional = PROVED
    else:
        parapropositional = combine(para)
    rep.meta["propositional"] = propositional
    rep.meta["parapropositional"] = parapropositional
    rep.meta["thin"] = thin
    rep.notes.append("parapropositional search covers objects in contexts of at most one variable")
    if sl.unknown:
        rep.notes.append("slice incomplete: " + "; ".join(sl.unknown))
    return PropositionalityReport(rep, propositional, parapropositional, thin, countermodels, decompositions)


# ---------------------------------------------------------------- canonical round trip


def _apart(ctx: tuple, base: str) -> tuple:
    """Fresh variables of the sorts of ``ctx``, named ``base1, base2, ...`` and disjoint from it."""
    used = {v.name for v in ctx}
    out = []
    for k, v in enumerate(ctx, 1):
        n = fresh_name(f"{base}{k}", used)
        used.add(n)
        out.append(Var(n, v.sort))
    return tuple(out)


@dataclass
class _Object:
    sort: str
    context: tuple
    formula: Formula
    inclusion: str | None      # function into the top sort of the context; None for a top object


class _CanonicalBuilder:
    """Internal logic of a bounded piece of the syntactic category of ``t``.

    Sorts are objects ``[phi | x]``; the top object of a context is the
    product of its sorts, with projections, and the empty context gives the
    terminal sort.  Every other object comes with an inclusion into its top
    object, and two axioms tie membership along the inclusion to the
    translated formula.
    """

    def __init__(self, t: Theory):
        self.t = t
        self.sorts: list = []
        self.functions: list = []
        self.axioms: list = []
        self.tags: dict = {}         # axiom name -> tags: base, source axiom names, support, slice
        self.comprehended: dict = {}  # object sort -> names of its two comprehension axioms
        self.theta_sorts: dict = {}
        self.theta_funs: dict = {}
        self.objects: list = []
        self.taken = set()
        self.tops: dict = {}
        self.projections: dict = {}  # product sort -> projection names
        self.arrows: dict = {}       # (source sort, target sort) -> triangle axiom name
        self.terminal = self._fresh("unit")
        self._add_sort(self.terminal, (), TOP)
        x, y = Var("x", self.terminal), Var("y", self.terminal)
        self._axiom("terminal_unique", (), Eq(x, y))
        self._axiom("terminal_inhabited", (), Exists(x, Eq(x, x)))
        self.tops[()] = self.terminal
        for s in t.signature.sorts:
            self.taken.add(s)
            self.sorts.append(s)
            self.theta_sorts[s] = SortImage((s,), (Var("x1", s),), TOP)
            self.tops[(s,)] = s

    def _fresh(self, base: str) -> str:
        n = fresh_name(base, self.taken | set(self.t.signature.names()))
        self.taken.add(n)
        return n

    def _add_sort(self, name, sorts, domain, params=None):
        self.sorts.append(name)
        ps = params if params is not None else standard_context(sorts, "x")
        self.theta_sorts[name] = SortImage(tuple(sorts), tuple(ps), domain)

    def _axiom(self, name, ante, succ, tag="base"):
        name = self._fresh(name)
        self.axioms.append(Axiom(name, Sequent(tuple(ante), succ)))
        self.tags[name] = {tag}
        return name

    def _function(self, name, dom, cod, image: Image):
        self.functions.append((name, (dom,), cod))
        self.theta_funs[name] = image

    def top(self, sorts: tuple) -> str:
        """The sort standing for the product of ``sorts``, created with its projections."""
        sorts = tuple(sorts)
        hit = self.tops.get(sorts)
        if hit is not None:
            return hit
        p = self._fresh("prod_" + "_".join(sorts))
        self._add_sort(p, sorts, TOP)
        self.tops[sorts] = p
        xs = standard_context(sorts, "x")
        self.projections[p] = []
        for k, s in enumerate(sorts, 1):
            pi = self._fresh(f"pi{k}_{p}")
            y = Var("y", s)
            self._function(pi, p, s, Image(xs + (y,), Eq(y, xs[k - 1])))
            self.projections[p].append(pi)
        a, b = Var("a", p), Var("b", p)
        self._axiom(f"product_{p}_unique", (conj(Eq(self.proj(p, k, a), self.proj(p, k, b))
                                                 for k in range(len(sorts))),), Eq(a, b))
        ws = standard_context(sorts, "w")
        self._axiom(f"product_{p}_exists", (), Exists(a, eqs([self.proj(p, k, a) for k in range(len(sorts))], ws)))
        return p

    def proj(self, p: str, k: int, term):
        name = self.projections[p][k]
        return App(name, (term,), self.theta_sorts[p].sorts[k])

    def point(self, sorts: tuple, term, xs) -> Formula:
        """``term`` of the top sort of ``sorts`` has components ``xs``."""
        if not sorts:
            return TOP
        if len(sorts) == 1:
            return Eq(term, xs[0])
        p = self.top(sorts)
        return eqs([self.proj(p, k, term) for k in range(len(sorts))], xs)

    def member(self, obj: _Object, xs) -> Formula:
        """``exists z (i(z) = xs)``: the tuple ``xs`` lies in the object."""
        sorts = tuple(v.sort for v in obj.context)
        if obj.inclusion is None:
            return TOP
        z = Var(fresh_name("z", {v.name for v in xs}), obj.sort)
        incl = App(obj.inclusion, (z,), self.top(sorts))
        return Exists(z, self.point(sorts, incl, xs))

    def add_function_graphs(self):
        for f, dom, cod in self.t.signature.functions:
            p = self.top(dom)
            xs = standard_context(dom, "x")
            y = Var("y", cod)
            self._function(f, p, cod, Image(xs + (y,), Eq(App(f, xs, cod), y)))

    def add_object(self, ctx: tuple, phi: Formula, label: str) -> _Object:
        for o in self.objects:
            if [v.sort for v in o.context] == [v.sort for v in ctx] and \
                    substitute(o.formula, o.context, ctx) == phi:
                return o
        sorts = tuple(v.sort for v in ctx)
        top = self.top(sorts)
        if isinstance(phi, Top):
            o = _Object(top, ctx, phi, None)
        else:
            name = self._fresh(label)
            self._add_sort(name, sorts, phi, ctx)
            incl = self._fresh(f"i_{name}")
            ys = _apart(ctx, "y")
            self._function(incl, name, top, Image(ctx + ys, conj([phi, eqs(ctx, ys)])))
            a, b = Var("a", name), Var("b", name)
            self._axiom(f"monic_{incl}", (Eq(App(incl, (a,), top), App(incl, (b,), top)),), Eq(a, b))
            o = _Object(name, ctx, phi, incl)
        self.objects.append(o)
        return o

    def comprehension(self, obj: _Object, H: Reconstrual, tag_in: str, tag_out: str | None = None):
        """``H(phi)(x) -||- exists z (i(z) = x)``, skipped when the two agree verbatim.

        The two directions may carry different tags; an object met again
        only gains tags.
        """
        if obj.inclusion is None:
            return
        tag_out = tag_in if tag_out is None else tag_out
        if obj.sort in self.comprehended:
            names = self.comprehended[obj.sort]
            if names:
                self.tags[names[0]].add(tag_in)
                self.tags[names[1]].add(tag_out)
            return
        mem = self.member(obj, obj.context)
        img = apply_reconstrual(H, obj.formula)
        if img == mem:
            self.comprehended[obj.sort] = ()
            return
        self.comprehended[obj.sort] = (self._axiom(f"image_{obj.sort}_in", (img,), mem, tag_in),
                                       self._axiom(f"image_{obj.sort}_out", (mem,), img, tag_out))

    def inclusion(self, a: _Object, b: _Object, tag: str):
        """A morphism ``a -> b`` over the identity of their common context."""
        if b.inclusion is None or a is b:
            return
        if (a.sort, b.sort) in self.arrows:
            self.tags[self.arrows[(a.sort, b.sort)]].add(tag)
            return
        m = self._fresh(f"m_{a.sort}_{b.sort}")
        ctx = a.context
        ys = _apart(ctx, "y")
        self._function(m, a.sort, b.sort, Image(ctx + ys, conj([a.formula, eqs(ctx, ys)])) if ctx else
                       Image(ctx, a.formula))
        z = Var("z", a.sort)
        top = self.top(tuple(v.sort for v in ctx))
        left = App(b.inclusion, (App(m, (z,), b.sort),), top)
        right = z if a.inclusion is None else App(a.inclusion, (z,), top)
        self.arrows[(a.sort, b.sort)] = self._axiom(f"comp_{m}", (), Eq(left, right), tag)

    def theory(self, name: str, tags=None) -> Theory:
        """All axioms, or those whose tag is in ``tags``."""
        sig = Signature(tuple(self.sorts), (), tuple(self.functions))
        axs = [a for a in self.axioms if tags is None or self.tags[a.name] & set(tags)]
        return Theory(name, sig, axs)


def _relation_image(b: _CanonicalBuilder, obj: _Object) -> Image:
    return Image(obj.context, b.member(obj, obj.context))


def _graph_image(b: _CanonicalBuilder, f: str, dom: tuple, cod: str) -> Image:
    xs = standard_context(dom, "x")
    y = Var("y", cod)
    if not dom:
        p = Var("p", b.terminal)
        return Image((y,), Exists(p, Eq(App(f, (p,), cod), y)))
    if len(dom) == 1:
        return Image(xs + (y,), Eq(App(f, xs, cod), y))
    top = b.top(dom)
    p = Var("p", top)
    return Image(xs + (y,), Exists(p, And(b.point(dom, p, xs), Eq(App(f, (p,), cod), y))))


def canonical_round_trip(t: Theory, depth: int, budget: Budget = Budget(), contexts=None) -> VerificationReport:
    """Build the internal logic of the bounded syntactic category and check both translations.

    ``H`` sends a sort to its top object and a relation to membership in its
    object; ``Theta`` sends an object back to its context with the object's
    formula as domain.  The round trip ``Theta.H`` is checked against the
    identity on every class up to ``depth``.
    """
    b = _CanonicalBuilder(t)
    b.add_function_graphs()
    rel_objects = []
    for r, dom in t.signature.relations:
        ctx = standard_context(dom, "x")
        rel_objects.append(b.add_object(ctx, Rel(r, ctx), f"c_{r}"))

    def reconstrual(target: Theory) -> Reconstrual:
        rels = {r: _relation_image(b, o) for (r, _), o in zip(t.signature.relations, rel_objects)}
        funs = {f: _graph_image(b, f, dom, cod) for f, dom, cod in t.signature.functions}
        return make_reconstrual(f"H_{t.name}", t, target, {s: s for s in t.signature.sorts}, rels, funs)

    provisional = reconstrual(b.theory("TC"))
    for o in rel_objects:
        b.comprehension(o, provisional, "base")
    for ax in t.axioms:
        ctx = tuple(ax.sequent.context())
        ante = b.add_object(ctx, conj(ax.sequent.antecedent), f"c_{ax.name}_ante")
        succ = b.add_object(ctx, ax.sequent.succedent, f"c_{ax.name}_succ")
        # an axiom is discharged through: antecedent in, triangle, succedent out
        b.comprehension(ante, reconstrual(b.theory("TC")), ax.name, "support")
        b.comprehension(succ, reconstrual(b.theory("TC")), "support", ax.name)
        b.inclusion(ante, succ, ax.name)

    cache = EntailmentCache(t, budget)
    classes, unknown = slice_objects(t, depth, cache, contexts)
    slice_objs = []
    for k, c in enumerate(classes):
        o = b.add_object(c.context, c.formula, f"c_{class_code(Image(c.context, c.formula))}")
        slice_objs.append(o)
    for o in slice_objs:
        b.comprehension(o, reconstrual(b.theory("TC")), "slice")
    for a, c in itertools.product(slice_objs, repeat=2):
        if a is c or [v.sort for v in a.context] != [v.sort for v in c.context] or c.inclusion is None:
            continue
        if isinstance(a.formula, Top):
            continue
        if cache.entails(a.formula, substitute(c.formula, c.context, a.context), a.context) == "Proved":
            b.inclusion(a, c, "slice")

    tc_name = f"TC_{t.name}"
    TC = b.theory(tc_name)
    core_tags = {"base", "support"} | {ax.name for ax in t.axioms}
    core = b.theory(tc_name, core_tags)
    H = reconstrual(TC)
    H_core = reconstrual(core)
    Theta = make_reconstrual(f"Theta_{t.name}", TC, t, b.theta_sorts, {}, b.theta_funs)
    R = compose_translations(H, Theta, f"Theta.H_{t.name}")

    rep = VerificationReport(f"canonical round trip for {t.name}")
    rep.meta.update({"depth": depth, "budget": str(budget), "internal theory": f"{tc_name}: "
                     f"{len(TC.signature.sorts)} sorts, {len(TC.signature.functions)} functions, "
                     f"{len(TC.axioms)} axioms ({len(core.axioms)} in the core)"})
    # each source axiom is discharged with the base axioms and its own objects only
    for name, seq in translation_obligations(H_core):
        tags = {"base"}
        if name.startswith("axiom "):
            tags.add(name[len("axiom "):])
        sub = b.theory(tc_name, tags)
        rep.add_result(f"H {name}", seq, prove_sequent(sub, seq, budget), tc_name)
    rep.notes.append(f"H is checked in subtheories of {tc_name}; provability only grows with the axioms")
    t_tr = verify_translation(Theta, budget)
    for e in t_tr.report.entries:
        if e.name.startswith(("axiom", "equality", "congruence", "total", "single")) \
                and not e.name.startswith("equality preserved"):
            rep.entries.append(type(e)(f"Theta {e.name}", e.statement, e.verdict, e.evidence, e.result))
    for c in classes:
        img = apply_reconstrual(R, c.formula)
        for arrow, seq in (("=>", Sequent((img,), c.formula)), ("<=", Sequent((c.formula,), img))):
            rep.add_result(f"round trip {c} ({arrow})", seq, prove_sequent(t, seq, budget), t.name)
    chi = trivial_tmap(R, identity_reconstrual(t), "chi")
    rep.extend(verify_tmap(chi, budget=budget), prefix="t-map ")
    if unknown:
        rep.notes.append("incomplete: some classes stayed apart on Unknown bi-entailment")
    return rep
