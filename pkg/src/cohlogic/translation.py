"""Reconstruals, translations, t-maps, homotopy equivalence and model pullback."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .models import FiniteModel, evaluate, label_key
from .prover import Budget, prove_sequent
from .report import FAILED, PROVED, VerificationReport, combine
from .syntax import (And, App, Bot, Eq, Exists, Formula, LogicError, Or, Rel, Sequent, Theory, Top, Var,
                     all_var_names, alpha_equal, check_formula, conj, eqs, exists_many, free_context,
                     fresh_name, is_graph_atom, substitute, unfold_function_graphs)


@dataclass(frozen=True)
class Image:
    """A substitution class: a formula together with its ordered parameters."""

    params: tuple
    formula: Formula

    def at(self, args) -> Formula:
        return substitute(self.formula, self.params, list(args))


@dataclass(frozen=True)
class SortImage:
    sorts: tuple
    params: tuple
    domain: Formula

    def at(self, args) -> Formula:
        return substitute(self.domain, self.params, list(args))


@dataclass(frozen=True)
class Reconstrual:
    name: str
    source: Theory
    target: Theory
    sorts: dict
    relations: dict
    functions: dict
    equalities: dict

    def sort_list(self, sorts) -> tuple:
        return tuple(s for sigma in sorts for s in self.sorts[sigma].sorts)

    def __str__(self) -> str:
        return show_reconstrual(self)


def param_vars(sorts, base: str, used: set | None = None) -> tuple:
    """Distinct variables ``base1, base2, ...`` of the given sorts."""
    used = set() if used is None else used
    out = []
    for s in sorts:
        name = fresh_name(f"{base}{len(out) + 1}", used)
        used.add(name)
        out.append(Var(name, s))
    return tuple(out)


def make_reconstrual(name: str, source: Theory, target: Theory, sorts=None, relations=None,
                     functions=None, equalities=None) -> Reconstrual:
    """Fill in defaults and check well-formedness.

    ``sorts`` maps a source sort to a ``SortImage``, a target sort list, or a
    single target sort name.  Missing symbols map to the same-named target
    symbol when the types line up; missing equality images are componentwise
    equality.
    """
    sorts, relations = dict(sorts or {}), dict(relations or {})
    functions, equalities = dict(functions or {}), dict(equalities or {})
    tsig, ssig = target.signature, source.signature
    out_sorts = {}
    for s in ssig.sorts:
        img = sorts.get(s)
        if img is None:
            if s not in tsig.sorts:
                raise LogicError(f"reconstrual {name}: no image for sort {s}")
            img = (s,)
        if isinstance(img, str):
            img = (img,)
        if not isinstance(img, SortImage):
            ps = param_vars(img, "x")
            img = SortImage(tuple(img), ps, Top())
        out_sorts[s] = img
    tmp = Reconstrual(name, source, target, out_sorts, {}, {}, {})
    out_rel = {}
    for r, dom in ssig.relations:
        img = relations.get(r)
        if img is None:
            want = tmp.sort_list(dom)
            if tsig.has_relation(r) and tsig.rel_domain(r) == want:
                ps = param_vars(want, "x")
                img = Image(ps, Rel(r, ps))
            else:
                raise LogicError(f"reconstrual {name}: no image for relation {r}")
        out_rel[r] = img
    out_fun = {}
    for f, dom, cod in ssig.functions:
        img = functions.get(f)
        if img is None:
            want_dom, want_cod = tmp.sort_list(dom), tmp.sort_list((cod,))
            if (tsig.has_function(f) and len(want_cod) == 1
                    and tsig.fun_type(f) == (want_dom, want_cod[0])):
                ps = param_vars(want_dom + want_cod, "x")
                img = Image(ps, Eq(App(f, ps[:-1], want_cod[0]), ps[-1]))
            else:
                raise LogicError(f"reconstrual {name}: no image for function {f}")
        out_fun[f] = img
    out_eq = {}
    for s in ssig.sorts:
        img = equalities.get(s)
        if img is None:
            k = len(out_sorts[s].sorts)
            ps = param_vars(out_sorts[s].sorts * 2, "x")
            img = Image(ps, eqs(ps[:k], ps[k:]))
        out_eq[s] = img
    F = Reconstrual(name, source, target, out_sorts, out_rel, out_fun, out_eq)
    check_reconstrual(F)
    return F


def identity_reconstrual(t: Theory, name: str | None = None) -> Reconstrual:
    return make_reconstrual(name or f"id_{t.name}", t, t)


def _check_image(F: Reconstrual, what: str, params, expected, formula) -> None:
    if tuple(p.sort for p in params) != tuple(expected):
        raise LogicError(f"reconstrual {F.name}: {what} has parameters of sorts "
                         f"{[p.sort for p in params]}, expected {list(expected)}")
    if len(set(params)) != len(params):
        raise LogicError(f"reconstrual {F.name}: {what} repeats a parameter")
    try:
        check_formula(F.target.signature, formula)
    except LogicError as e:
        raise LogicError(f"reconstrual {F.name}: {what}: {e}") from None
    extra = [v.name for v in free_context(formula) if v not in params]
    if extra:
        raise LogicError(f"reconstrual {F.name}: {what} has free variables {extra} outside its parameters")


def check_reconstrual(F: Reconstrual) -> None:
    ssig = F.source.signature
    for s in ssig.sorts:
        img = F.sorts[s]
        for t in img.sorts:
            if t not in F.target.signature.sorts:
                raise LogicError(f"reconstrual {F.name}: unknown target sort {t}")
        _check_image(F, f"domain of {s}", img.params, img.sorts, img.domain)
        e = F.equalities[s]
        _check_image(F, f"equality on {s}", e.params, img.sorts * 2, e.formula)
    for r, dom in ssig.relations:
        img = F.relations[r]
        _check_image(F, f"image of {r}", img.params, F.sort_list(dom), img.formula)
    for f, dom, cod in ssig.functions:
        img = F.functions[f]
        _check_image(F, f"image of {f}", img.params, F.sort_list(dom + (cod,)), img.formula)


# ---------------------------------------------------------------- applying a reconstrual


class Imager:
    """Maps source variables to disjoint target contexts and translates formulas."""

    def __init__(self, F: Reconstrual, reserved=(), taken=()):
        self.F = F
        self.env: dict = {}
        self.reserved = set(reserved)
        self.taken = set(taken)

    def var(self, v: Var) -> tuple:
        hit = self.env.get(v)
        if hit is not None:
            return hit
        img = self.F.sorts.get(v.sort)
        if img is None:
            raise LogicError(f"reconstrual {self.F.name} has no image for sort {v.sort}")
        if len(img.sorts) == 1:
            name = v.name if v.name not in self.taken else fresh_name(v.name, self.taken | self.reserved)
            names = [name]
        else:
            names = []
            for i in range(len(img.sorts)):
                n = fresh_name(f"{v.name}{i + 1}", self.taken | self.reserved | set(names))
                names.append(n)
        out = tuple(Var(n, s) for n, s in zip(names, img.sorts))
        self.taken.update(names)
        self.env[v] = out
        return out

    def vars(self, vs) -> tuple:
        return tuple(x for v in vs for x in self.var(v))

    def domain(self, vs) -> Formula:
        return conj(self.F.sorts[v.sort].at(self.var(v)) for v in vs)

    def formula(self, phi: Formula) -> Formula:
        phi = unfold_function_graphs(phi)
        self.reserved |= all_var_names(phi)
        for v in free_context(phi):
            self.var(v)
        return self._go(phi)

    def _go(self, f: Formula) -> Formula:
        F = self.F
        if isinstance(f, (Top, Bot)):
            return f
        if isinstance(f, Rel):
            img = F.relations.get(f.name)
            if img is None:
                raise LogicError(f"reconstrual {F.name}: unmapped relation {f.name}")
            return img.at(self.vars(f.args))
        if isinstance(f, Eq):
            if is_graph_atom(f):
                img = F.functions.get(f.left.fn)
                if img is None:
                    raise LogicError(f"reconstrual {F.name}: unmapped function {f.left.fn}")
                return img.at(self.vars(f.left.args + (f.right,)))
            return F.equalities[f.left.sort].at(self.vars((f.left, f.right)))
        if isinstance(f, And):
            return And(self._go(f.left), self._go(f.right))
        if isinstance(f, Or):
            return Or(self._go(f.left), self._go(f.right))
        if isinstance(f, Exists):
            vs = self.var(f.var)
            body = conj([F.sorts[f.var.sort].at(vs), self._go(f.body)])
            return exists_many(vs, body)
        raise LogicError("reconstruals act on coherent formulas only")


def apply_reconstrual(F: Reconstrual, phi: Formula) -> Formula:
    """Homomorphic image of ``phi``; function terms are unfolded into graphs first."""
    return Imager(F).formula(phi)


def translate_sequent(F: Reconstrual, seq: Sequent, imager: Imager | None = None) -> Sequent:
    """``D(Fx), F(antecedent) |- F(succedent)`` over the sequent's context."""
    im = imager or Imager(F)
    ctx = seq.context()
    for f in (*seq.antecedent, seq.succedent):
        im.reserved |= all_var_names(f)
    im.vars(ctx)
    dom = [F.sorts[v.sort].at(im.var(v)) for v in ctx]
    ante = [d for d in dom if not isinstance(d, Top)] + [im.formula(a) for a in seq.antecedent]
    return Sequent(tuple(ante), im.formula(seq.succedent))


def image_context(F: Reconstrual, ctx) -> tuple:
    return Imager(F).vars(ctx)


# ---------------------------------------------------------------- verification


@dataclass
class Translation:
    reconstrual: Reconstrual
    report: VerificationReport
    flags: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.reconstrual.name

    @property
    def is_translation(self) -> str:
        return self.flags["translation"]

    @property
    def is_equality_preserving(self) -> str:
        return self.flags["equality_preserving"]

    @property
    def is_strong(self) -> str:
        return self.flags["strong"]


def _logical_sequents(sig) -> list:
    """Equality laws of the source signature, which any translation must preserve."""
    out = []
    for s in sig.sorts:
        x, y, z = Var("x", s), Var("y", s), Var("z", s)
        out.append((f"equality reflexive {s}", Sequent((), Eq(x, x))))
        out.append((f"equality symmetric {s}", Sequent((Eq(x, y),), Eq(y, x))))
        out.append((f"equality transitive {s}", Sequent((Eq(x, y), Eq(y, z)), Eq(x, z))))
    for r, dom in sig.relations:
        if not dom:
            continue
        xs = tuple(Var(f"x{i + 1}", s) for i, s in enumerate(dom))
        ys = tuple(Var(f"y{i + 1}", s) for i, s in enumerate(dom))
        out.append((f"congruence {r}", Sequent((eqs(xs, ys), Rel(r, xs)), Rel(r, ys))))
    for f, dom, cod in sig.functions:
        xs = tuple(Var(f"x{i + 1}", s) for i, s in enumerate(dom))
        ys = tuple(Var(f"y{i + 1}", s) for i, s in enumerate(dom))
        u, v = Var("u", cod), Var("v", cod)
        fx = App(f, xs, cod)
        out.append((f"total {f}", Sequent((), Exists(u, Eq(fx, u)))))
        out.append((f"single-valued {f}", Sequent((Eq(fx, u), Eq(fx, v)), Eq(u, v))))
        if dom:
            out.append((f"congruence {f}", Sequent((eqs(xs, ys), Eq(fx, u)), Eq(App(f, ys, cod), u))))
    return out


def translation_obligations(F: Reconstrual, logic: bool = True) -> list:
    out = [(f"axiom {ax.name}", translate_sequent(F, ax.sequent)) for ax in F.source.axioms]
    if logic:
        out += [(name, translate_sequent(F, s)) for name, s in _logical_sequents(F.source.signature)]
    return out


def equality_obligations(F: Reconstrual) -> list:
    out = []
    for s in F.source.signature.sorts:
        im = Imager(F)
        xs, ys = im.var(Var("x", s)), im.var(Var("y", s))
        D = F.sorts[s]
        dx, dy = D.at(xs), D.at(ys)
        E = F.equalities[s].at(xs + ys)
        hyp = tuple(d for d in (dx, dy) if not isinstance(d, Top))
        out.append((f"equality preserved {s} (=>)", Sequent(hyp + (E,), conj([eqs(xs, ys), dx, dy]))))
        out.append((f"equality preserved {s} (<=)", Sequent(hyp + (eqs(xs, ys),), E)))
    return out


def verify_translation(F: Reconstrual, budget: Budget = Budget(), logic: bool = True) -> Translation:
    """Discharge translation, equality-preservation and strongness obligations."""
    report = VerificationReport(f"translation {F.name} : {F.source.name} -> {F.target.name}")
    report.meta["budget"] = str(budget)
    T2 = F.target
    for name, seq in translation_obligations(F, logic):
        report.add_result(name, seq, prove_sequent(T2, seq, budget), T2.name)
    tr = report.verdict
    eq_report = VerificationReport("equality")
    for name, seq in equality_obligations(F):
        eq_report.add_result(name, seq, prove_sequent(T2, seq, budget), T2.name)
    report.extend(eq_report)
    eqp = combine([tr, eq_report.verdict])
    lengths_ok = all(len(img.sorts) == 1 for img in F.sorts.values())
    report.add("strong (sort images of length 1)",
               ", ".join(f"{s} => ({','.join(img.sorts)})" for s, img in F.sorts.items()) or "no sorts",
               PROVED if lengths_ok else FAILED)
    strong = combine([eqp, PROVED if lengths_ok else FAILED])
    for s, img in F.sorts.items():
        if isinstance(img.domain, Top):
            continue
        seq = Sequent((), exists_many(img.params, img.domain))
        if prove_sequent(T2, seq, budget).status != "Proved":
            report.notes.append(f"domain of {s} is not provably inhabited")
    flags = {"translation": tr, "equality_preserving": eqp, "strong": strong}
    report.meta.update({f"flag {k}": v for k, v in flags.items()})
    return Translation(F, report, flags)


# ---------------------------------------------------------------- composition


def compose_translations(F: Reconstrual, G: Reconstrual, name: str | None = None) -> Reconstrual:
    """``G`` after ``F``: sorts concatenate, domains are ``G(D_F) & D_G``."""
    if F.target.name != G.source.name or F.target.signature != G.source.signature:
        raise LogicError(f"cannot compose {F.name} : ... -> {F.target.name} with {G.name} : {G.source.name} -> ...")

    def push(params, formula, with_domain: bool):
        im = Imager(G)
        im.reserved |= all_var_names(formula)
        new_params = im.vars(params)
        body = im.formula(formula)
        if with_domain:
            body = conj([im.domain(params), body])
        return new_params, body

    sorts = {}
    for s, img in F.sorts.items():
        ps, d = push(img.params, img.domain, True)
        sorts[s] = SortImage(G.sort_list(img.sorts), ps, d)
    rels = {r: Image(*push(img.params, img.formula, False)) for r, img in F.relations.items()}
    funs = {f: Image(*push(img.params, img.formula, False)) for f, img in F.functions.items()}
    eqls = {s: Image(*push(img.params, img.formula, False)) for s, img in F.equalities.items()}
    out = Reconstrual(name or f"{G.name}.{F.name}", F.source, G.target, sorts, rels, funs, eqls)
    check_reconstrual(out)
    return out


def same_reconstrual(a: Reconstrual, b: Reconstrual) -> bool:
    """Component-wise alpha-equality of two reconstruals with common endpoints."""
    if a.source.name != b.source.name or a.target.name != b.target.name:
        return False
    for s in a.sorts:
        x, y = a.sorts[s], b.sorts[s]
        if x.sorts != y.sorts or not alpha_equal(x.domain, y.domain, x.params, y.params):
            return False
    for table in ("relations", "functions", "equalities"):
        for k, x in getattr(a, table).items():
            y = getattr(b, table)[k]
            if not alpha_equal(x.formula, y.formula, x.params, y.params):
                return False
    return True


# ---------------------------------------------------------------- t-maps


@dataclass(frozen=True)
class TMap:
    """Components ``chi[s]`` have parameters ``F s`` followed by ``G s``."""

    name: str
    source: Reconstrual
    target: Reconstrual
    components: dict


def make_tmap(name: str, F: Reconstrual, G: Reconstrual, components: dict) -> TMap:
    if F.source.name != G.source.name or F.target.name != G.target.name:
        raise LogicError(f"t-map {name}: translations {F.name} and {G.name} have different endpoints")
    for s in F.source.signature.sorts:
        img = components.get(s)
        if img is None:
            raise LogicError(f"t-map {name}: no component for sort {s}")
        _check_image(F, f"t-map component {s}", img.params,
                     F.sorts[s].sorts + G.sorts[s].sorts, img.formula)
    return TMap(name, F, G, dict(components))


def trivial_tmap(F: Reconstrual, G: Reconstrual, name: str = "chi") -> TMap:
    """``chi(x,y) := (x = y)`` componentwise; needs matching sort images."""
    comps = {}
    for s in F.source.signature.sorts:
        fs, gs = F.sorts[s].sorts, G.sorts[s].sorts
        if fs != gs:
            raise LogicError(f"trivial t-map needs equal sort images for {s}")
        ps = param_vars(fs + gs, "x")
        comps[s] = Image(ps, eqs(ps[:len(fs)], ps[len(fs):]))
    return make_tmap(name, F, G, comps)


class _TwoSided:
    """Disjoint F-side and G-side target contexts for t-map obligations."""

    def __init__(self, chi: TMap):
        self.chi = chi
        self.f = Imager(chi.source)
        self.g = None

    def g_side(self) -> Imager:
        if self.g is None:
            self.g = Imager(self.chi.target, taken=self.f.taken)
        return self.g

    def chi_at(self, s: str, xs, ys) -> Formula:
        return self.chi.components[s].at(tuple(xs) + tuple(ys))


def tmap_obligations(chi: TMap, iso: bool = False, atoms_only: bool = True, formulas=()) -> list:
    F, G = chi.source, chi.target
    out = []
    for s in F.source.signature.sorts:
        sides = _TwoSided(chi)
        x, w = sides.f.var(Var("x", s)), sides.f.var(Var("w", s))
        g = sides.g_side()
        y, z = g.var(Var("y", s)), g.var(Var("z", s))
        DF, DG = F.sorts[s], G.sorts[s]
        EF, EG = F.equalities[s], G.equalities[s]
        c = sides.chi_at
        out.append((f"domain matching {s}", Sequent((c(s, x, y),), conj([DF.at(x), DG.at(y)]))))
        out.append((f"well-defined image {s}",
                    Sequent((EF.at(x + w), EG.at(y + z), c(s, w, z)), c(s, x, y))))
        out.append((f"existence {s}", Sequent(_nontop(DF.at(x)), exists_many(y, conj([DG.at(y), c(s, x, y)])))))
        out.append((f"unique image {s}", Sequent((c(s, x, y), c(s, x, z)), EG.at(y + z))))
        if iso:
            out.append((f"onto {s}", Sequent(_nontop(DG.at(y)), exists_many(x, conj([DF.at(x), c(s, x, y)])))))
            out.append((f"one-to-one {s}", Sequent((c(s, x, y), c(s, w, y)), EF.at(x + w))))
    gens = _generators(F.source)
    if not atoms_only:
        gens += [(f"formula {i + 1}", phi) for i, phi in enumerate(formulas)]
    for name, phi in gens:
        out.append((f"naturality {name}", _naturality(chi, phi, reverse=False)))
        if iso:
            out.append((f"reverse naturality {name}", _naturality(chi, phi, reverse=True)))
    return out


def _nontop(f: Formula) -> tuple:
    return () if isinstance(f, Top) else (f,)


def _generators(t: Theory) -> list:
    out = []
    sig = t.signature
    for r, dom in sig.relations:
        xs = tuple(Var(f"a{i + 1}", s) for i, s in enumerate(dom))
        out.append((r, Rel(r, xs)))
    for f, dom, cod in sig.functions:
        xs = tuple(Var(f"a{i + 1}", s) for i, s in enumerate(dom))
        out.append((f, Eq(App(f, xs, cod), Var("b", cod))))
    for s in sig.sorts:
        out.append((f"={s}", Eq(Var("a1", s), Var("a2", s))))
    return out


def _naturality(chi: TMap, phi: Formula, reverse: bool) -> Sequent:
    ctx = free_context(phi)
    sides = _TwoSided(chi)
    sides.f.reserved |= all_var_names(phi)
    xs = [sides.f.var(v) for v in ctx]
    fphi = sides.f.formula(phi)
    g = sides.g_side()
    g.reserved |= all_var_names(phi)
    ys = [g.var(v) for v in ctx]
    gphi = g.formula(phi)
    link = [sides.chi_at(v.sort, x, y) for v, x, y in zip(ctx, xs, ys)]
    if reverse:
        return Sequent(tuple(link) + (gphi,), fphi)
    return Sequent(tuple(link) + (fphi,), gphi)


def verify_tmap(chi: TMap, atoms_only: bool = True, budget: Budget = Budget(), iso: bool = False,
                formulas=()) -> VerificationReport:
    F, G = chi.source, chi.target
    report = VerificationReport(f"t-map {chi.name} : {F.name} => {G.name}" + (" (iso)" if iso else ""))
    report.meta["budget"] = str(budget)
    T2 = F.target
    for name, seq in tmap_obligations(chi, iso, atoms_only, formulas):
        report.add_result(name, seq, prove_sequent(T2, seq, budget), T2.name)
    return report


def compose_tmaps(chi: TMap, eta: TMap, name: str | None = None) -> TMap:
    """Relational composite ``exists y (D_G(y) & chi(x,y) & eta(y,z))``."""
    if chi.target.name != eta.source.name:
        raise LogicError("t-maps do not compose")
    F, G, H = chi.source, chi.target, eta.target
    comps = {}
    for s in F.source.signature.sorts:
        fs, gs, hs = F.sorts[s].sorts, G.sorts[s].sorts, H.sorts[s].sorts
        used: set = set()
        xs, ys, zs = param_vars(fs, "x", used), param_vars(gs, "y", used), param_vars(hs, "z", used)
        body = conj([G.sorts[s].at(ys), chi.components[s].at(xs + ys), eta.components[s].at(ys + zs)])
        comps[s] = Image(xs + zs, exists_many(ys, body))
    return make_tmap(name or f"{eta.name}.{chi.name}", F, H, comps)


def verify_homotopy_equivalence(F: Reconstrual, G: Reconstrual, chi1: TMap, chi2: TMap,
                                budget: Budget = Budget()) -> VerificationReport:
    """``chi1`` links ``GF`` with 1 and ``chi2`` links ``FG`` with 1; both must be t-map isomorphisms.

    Either orientation is accepted for each t-map, since an invertible t-map
    can be read in both directions.
    """
    T1, T2 = F.source, F.target
    if G.source.name != T2.name or G.target.name != T1.name:
        raise LogicError("homotopy equivalence needs F : T1 -> T2 and G : T2 -> T1")
    gf, fg = compose_translations(F, G), compose_translations(G, F)
    for chi, comp, base in ((chi1, gf, T1), (chi2, fg, T2)):
        one = identity_reconstrual(base)
        forward = same_reconstrual(chi.source, comp) and same_reconstrual(chi.target, one)
        backward = same_reconstrual(chi.source, one) and same_reconstrual(chi.target, comp)
        if not (forward or backward):
            raise LogicError(f"t-map {chi.name} does not connect {comp.name} to the identity on {base.name}")
    report = VerificationReport(f"homotopy equivalence {F.name} / {G.name}")
    report.meta["budget"] = str(budget)
    report.extend(verify_tmap(chi1, True, budget, iso=True), f"{chi1.name}: ")
    report.extend(verify_tmap(chi2, True, budget, iso=True), f"{chi2.name}: ")
    return report


# ---------------------------------------------------------------- pullback of models


def _label(rep: tuple) -> str:
    if len(rep) == 1:
        return rep[0]
    return "_".join(rep) if rep else "*"


def pullback_model(F: Reconstrual, M: FiniteModel, name: str | None = None) -> FiniteModel:
    """Precompose ``M`` with ``F``; carriers are ``D``-tuples modulo ``E_F``."""
    if not M.signature.contains(F.target.signature):
        raise LogicError("model does not interpret the target signature")
    carriers, cls_of = {}, {}
    for s in F.source.signature.sorts:
        img = F.sorts[s]
        tuples = [t for t in itertools.product(*(M.carriers[x] for x in img.sorts))
                  if evaluate(M, img.domain, dict(zip(img.params, t)))]
        tuples.sort(key=lambda t: tuple(label_key(x) for x in t))
        E = F.equalities[s]

        def rel(a, b):
            return evaluate(M, E.formula, dict(zip(E.params, a + b)))

        reps, which = [], {}
        for t in tuples:
            if not rel(t, t):
                raise LogicError(f"image of equality on {s} is not reflexive at {t}")
            for r in reps:
                if rel(t, r):
                    which[t] = r
                    break
            else:
                reps.append(t)
                which[t] = t
        for a in tuples:
            for b in tuples:
                if rel(a, b) != (which[a] == which[b]):
                    raise LogicError(f"image of equality on {s} is not an equivalence relation")
        carriers[s] = tuple(_label(r) for r in reps)
        cls_of[s] = (reps, which)
    rels = {}
    for r, dom in F.source.signature.relations:
        img = F.relations[r]
        rows = set()
        for combo in itertools.product(*(cls_of[s][0] for s in dom)):
            flat = tuple(x for t in combo for x in t)
            if evaluate(M, img.formula, dict(zip(img.params, flat))):
                rows.add(tuple(_label(t) for t in combo))
        rels[r] = frozenset(rows)
    funs = {}
    for f, dom, cod in F.source.signature.functions:
        img = F.functions[f]
        table = {}
        for combo in itertools.product(*(cls_of[s][0] for s in dom)):
            flat = tuple(x for t in combo for x in t)
            hits = [r for r in cls_of[cod][0]
                    if evaluate(M, img.formula, dict(zip(img.params, flat + r)))]
            if len(hits) != 1:
                raise LogicError(f"image of {f} is not functional at {combo}")
            table[tuple(_label(t) for t in combo)] = _label(hits[0])
        funs[f] = table
    return FiniteModel(F.source.signature, carriers, rels, funs, name or f"{F.name}_pullback")


# ---------------------------------------------------------------- printing


def show_reconstrual(F: Reconstrual) -> str:
    from .printer import show_formula

    def params(ps):
        return ",".join(p.name for p in ps)

    lines = [f"translation {F.name} : {F.source.name} -> {F.target.name} {{"]
    for s, img in F.sorts.items():
        lines.append(f"  sort {s} => ({','.join(img.sorts)}) with D({params(img.params)}) := "
                     f"{show_formula(img.domain)}")
    for r, img in F.relations.items():
        lines.append(f"  rel {r} => psi({params(img.params)}) := {show_formula(img.formula)}")
    for f, img in F.functions.items():
        lines.append(f"  fun {f} => theta({params(img.params)}) := {show_formula(img.formula)}")
    for s, img in F.equalities.items():
        lines.append(f"  eq {s} => E({params(img.params)}) := {show_formula(img.formula)}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def show_tmap(chi: TMap) -> str:
    from .printer import show_formula

    lines = [f"tmap {chi.name} : {chi.source.name} => {chi.target.name} {{"]
    for s, img in chi.components.items():
        k = len(chi.source.sorts[s].sorts)
        left = ",".join(p.name for p in img.params[:k])
        right = ",".join(p.name for p in img.params[k:])
        lines.append(f"  sort {s} => chi({left}|{right}) := {show_formula(img.formula)}")
    lines.append("}")
    return "\n".join(lines) + "\n"
