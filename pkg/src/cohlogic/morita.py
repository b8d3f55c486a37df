"""Morita and definitional extensions, quotient retractions, properness.

Every extension carries its defining sequents verbatim, so an extended theory
can be checked later by regenerating the definitions and alpha-matching them
against its new axioms.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .corpus import EntailmentCache, Sieve, enumerate_formulas
from .models import FiniteModel, check_model, evaluate, label_key, sequent_violation
from .printer import show_formula, show_sequent
from .prover import Budget, prove_sequent
from .report import FAILED, PROVED, VerificationReport
from .syntax import (BOT, And, App, Axiom, Eq, Exists, Formula, LogicError, Or, Rel, Sequent,
                     Signature, Theory, Top, Var, alpha_equal, check_formula, conj, disj,
                     exists_many, free_context, fresh_name, substitute)
from .translation import (Image, Imager, Reconstrual, TMap, Translation, compose_translations,
                          identity_reconstrual, make_reconstrual, make_tmap, param_vars, trivial_tmap,
                          verify_homotopy_equivalence, verify_translation)


# ---------------------------------------------------------------- specifications


@dataclass(frozen=True)
class Product:
    factors: tuple
    name: str
    projections: tuple

    kind = "product"


@dataclass(frozen=True)
class Terminal:
    name: str

    kind = "terminal"


@dataclass(frozen=True)
class Coproduct:
    summands: tuple
    name: str
    injections: tuple

    kind = "coproduct"


@dataclass(frozen=True)
class Subsort:
    base: str
    cls: Image
    name: str
    inclusion: str

    kind = "subsort"


@dataclass(frozen=True)
class Quotient:
    base: str
    cls: Image
    name: str
    surjection: str

    kind = "quotient"


@dataclass(frozen=True)
class Definitional:
    """``cls`` has the symbol's argument sorts as parameters, plus the value for functions."""

    symbol: str
    cls: Image
    function: bool = False

    kind = "definitional"

    @property
    def name(self) -> str:
        return self.symbol


@dataclass(frozen=True)
class Obligation:
    name: str
    sequent: Sequent
    theory: Theory


@dataclass
class ExtensionResult:
    base: Theory
    theory: Theory
    definitions: tuple
    obligations: tuple
    specs: tuple = ()
    notes: list = field(default_factory=list)

    def discharge(self, budget: Budget = Budget()) -> VerificationReport:
        report = VerificationReport(f"admissibility {self.base.name} -> {self.theory.name}")
        report.meta["budget"] = str(budget)
        for ob in self.obligations:
            report.add_result(ob.name, ob.sequent, prove_sequent(ob.theory, ob.sequent, budget), ob.theory.name)
        report.notes.extend(self.notes)
        return report


def new_symbols(spec) -> tuple:
    """Sorts and symbols a spec introduces, as ``(sorts, relations, functions)``."""
    if isinstance(spec, Product):
        return (spec.name,), (), tuple((p, (spec.name,), s) for p, s in zip(spec.projections, spec.factors))
    if isinstance(spec, Terminal):
        return (spec.name,), (), ()
    if isinstance(spec, Coproduct):
        return (spec.name,), (), tuple((r, (s,), spec.name) for r, s in zip(spec.injections, spec.summands))
    if isinstance(spec, Subsort):
        return (spec.name,), (), ((spec.inclusion, (spec.name,), spec.base),)
    if isinstance(spec, Quotient):
        return (spec.name,), (), ((spec.surjection, (spec.base,), spec.name),)
    if isinstance(spec, Definitional):
        sorts = tuple(p.sort for p in spec.cls.params)
        if spec.function:
            return (), (), ((spec.symbol, sorts[:-1], sorts[-1]),)
        return (), ((spec.symbol, sorts),), ()
    raise LogicError(f"not an extension spec: {spec!r}")


def _check_spec(sig: Signature, spec) -> None:
    sorts, rels, funs = new_symbols(spec)
    names = list(sorts) + [r for r, _ in rels] + [f for f, _, _ in funs]
    taken = sig.names()
    for n in names:
        if n in taken:
            raise LogicError(f"name clash: {n} is already declared")
    if len(set(names)) != len(names):
        raise LogicError(f"name clash inside the {spec.kind} extension")
    for s in getattr(spec, "factors", ()) + getattr(spec, "summands", ()):
        if s not in sig.sorts:
            raise LogicError(f"unknown sort {s}")
    if isinstance(spec, Product) and len(spec.factors) != len(spec.projections):
        raise LogicError("a product needs one projection per factor")
    if isinstance(spec, Coproduct) and len(spec.summands) != len(spec.injections):
        raise LogicError("a coproduct needs one injection per summand")
    if isinstance(spec, (Subsort, Quotient)):
        if spec.base not in sig.sorts:
            raise LogicError(f"unknown sort {spec.base}")
        want = 1 if isinstance(spec, Subsort) else 2
        if tuple(p.sort for p in spec.cls.params) != (spec.base,) * want:
            raise LogicError(f"the defining class of a {spec.kind} must have domain "
                             + ",".join((spec.base,) * want))
    if isinstance(spec, (Subsort, Quotient, Definitional)):
        extra = set(free_context(spec.cls.formula)) - set(spec.cls.params)
        if extra:
            raise LogicError(f"defining formula has stray free variables {sorted(v.name for v in extra)}")
        if len(set(spec.cls.params)) != len(spec.cls.params):
            raise LogicError("defining class has repeated parameters")
        check_formula(sig, spec.cls.formula)
    if isinstance(spec, Definitional) and spec.function and not spec.cls.params:
        raise LogicError("a defined function needs at least its value parameter")


def _ax_name(stem: str, k: int) -> str:
    return f"def_{re.sub(r'[^A-Za-z0-9_]', '_', stem)}_{k}"


def definitions(spec) -> list:
    """The defining sequents of ``spec`` with their fixed variable names."""
    if isinstance(spec, Product):
        s = spec.name
        xs = [Var(f"x{i + 1}", f) for i, f in enumerate(spec.factors)]
        z, x, y = Var("z", s), Var("x", s), Var("y", s)
        proj = [lambda t, p=p, f=f: App(p, (t,), f) for p, f in zip(spec.projections, spec.factors)]
        return [
            Sequent((), Exists(z, conj(Eq(pi(z), xi) for pi, xi in zip(proj, xs)))),
            Sequent((conj(Eq(pi(x), pi(y)) for pi in proj),), Eq(x, y)),
        ]
    if isinstance(spec, Terminal):
        x, y = Var("x", spec.name), Var("y", spec.name)
        return [Sequent((), Exists(x, Eq(x, x))), Sequent((), Eq(x, y))]
    if isinstance(spec, Coproduct):
        s = spec.name
        z = Var("z", s)
        xs = [Var(f"x{i + 1}", t) for i, t in enumerate(spec.summands)]
        ys = [Var(f"y{i + 1}", t) for i, t in enumerate(spec.summands)]

        def rho(i, t):
            return App(spec.injections[i], (t,), s)

        out = [Sequent((), disj(Exists(xs[i], Eq(z, rho(i, xs[i]))) for i in range(len(xs))))]
        for i in range(len(xs)):
            out.append(Sequent((Eq(rho(i, xs[i]), rho(i, ys[i])),), Eq(xs[i], ys[i])))
        pairs = [(i, j) for i in range(len(xs)) for j in range(len(xs)) if i != j]
        out.append(Sequent((disj(Eq(rho(i, xs[i]), rho(j, xs[j])) for i, j in pairs),), BOT))
        return out
    if isinstance(spec, Subsort):
        x, y = Var("x", spec.base), Var("y", spec.name)
        phi = spec.cls.at((x,))
        image = Exists(y, Eq(App(spec.inclusion, (y,), spec.base), x))
        xn, zn = Var("x", spec.name), Var("z", spec.name)
        i = spec.inclusion
        return [
            Sequent((phi,), image),
            Sequent((image,), phi),
            Sequent((Eq(App(i, (xn,), spec.base), App(i, (zn,), spec.base)),), Eq(xn, zn)),
        ]
    if isinstance(spec, Quotient):
        x, y, z = Var("x", spec.base), Var("y", spec.base), Var("z", spec.name)
        q = spec.surjection
        same = Eq(App(q, (x,), spec.name), App(q, (y,), spec.name))
        return [
            Sequent((), Exists(x, Eq(App(q, (x,), spec.name), z))),
            Sequent((same,), spec.cls.at((x, y))),
            Sequent((spec.cls.at((x, y)),), same),
        ]
    if isinstance(spec, Definitional):
        head = _definitional_head(spec)
        return [Sequent((head,), spec.cls.formula), Sequent((spec.cls.formula,), head)]
    raise LogicError(f"not an extension spec: {spec!r}")


def _definitional_head(spec: Definitional) -> Formula:
    ps = spec.cls.params
    if spec.function:
        return Eq(App(spec.symbol, tuple(ps[:-1]), ps[-1].sort), ps[-1])
    return Rel(spec.symbol, tuple(ps))


def admissibility(spec) -> list:
    """Named sequents that must hold in the base theory."""
    if isinstance(spec, Quotient):
        s = spec.base
        x, y, z = Var("x", s), Var("y", s), Var("z", s)
        phi = spec.cls.at
        return [
            ("reflexive", Sequent((), phi((x, x)))),
            ("symmetric", Sequent((phi((x, y)),), phi((y, x)))),
            ("transitive", Sequent((phi((x, y)), phi((y, z))), phi((x, z)))),
        ]
    if isinstance(spec, Definitional) and spec.function:
        ps = spec.cls.params
        y = ps[-1]
        used = {p.name for p in ps}
        y2 = Var(fresh_name(y.name, used), y.sort)
        other = substitute(spec.cls.formula, (y,), (y2,))
        return [
            ("total", Sequent((), Exists(y, spec.cls.formula))),
            ("single-valued", Sequent((spec.cls.formula, other), Eq(y, y2))),
        ]
    return []


def extend_morita(t: Theory, spec, name: str | None = None) -> ExtensionResult:
    """Extend ``t`` by one sort or defined symbol; obligations are returned, not assumed."""
    _check_spec(t.signature, spec)
    sorts, rels, funs = new_symbols(spec)
    sig = t.signature.extend(sorts, rels, funs)
    defs = tuple(Axiom(_ax_name(spec.name, k + 1), s) for k, s in enumerate(definitions(spec)))
    taken = {a.name for a in t.axioms}
    for a in defs:
        if a.name in taken:
            raise LogicError(f"name clash: axiom {a.name} already exists")
    plus = Theory(name or f"{t.name}_{spec.name}", sig, t.axioms + defs, t.mode)
    obs = tuple(Obligation(f"{spec.name} {n}", s, t) for n, s in admissibility(spec))
    return ExtensionResult(t, plus, defs, obs, (spec,))


def extend_chain(t: Theory, specs, name: str | None = None) -> ExtensionResult:
    """Apply several extensions in order; later specs may use earlier new symbols."""
    cur, defs, obs = t, (), ()
    for spec in specs:
        step = extend_morita(cur, spec)
        cur, defs, obs = step.theory, defs + step.definitions, obs + step.obligations
    final = Theory(name or cur.name, cur.signature, cur.axioms, cur.mode)
    return ExtensionResult(t, final, defs, obs, tuple(specs))


# ---------------------------------------------------------------- recognising extensions


def sequent_alpha_equal(a: Sequent, b: Sequent) -> bool:
    if len(a.antecedent) != len(b.antecedent):
        return False
    ca, cb = a.context(), b.context()
    if len(ca) != len(cb):
        return False
    return all(alpha_equal(f, g, ca, cb) for f, g in
               zip((*a.antecedent, a.succedent), (*b.antecedent, b.succedent)))


def _var_args(args) -> bool:
    return all(isinstance(a, Var) for a in args) and len(set(args)) == len(args)


def _class_for_subsort(incl: str, axioms) -> Image | None:
    for ax in axioms:
        s = ax.sequent
        succ = s.succedent
        if (len(s.antecedent) == 1 and isinstance(succ, Exists) and isinstance(succ.body, Eq)
                and isinstance(succ.body.left, App) and succ.body.left.fn == incl
                and isinstance(succ.body.right, Var)):
            x = succ.body.right
            return Image((x,), s.antecedent[0])
    return None


def _class_for_quotient(q: str, axioms) -> Image | None:
    for ax in axioms:
        s = ax.sequent
        if len(s.antecedent) != 1 or not isinstance(s.antecedent[0], Eq):
            continue
        a, b = s.antecedent[0].left, s.antecedent[0].right
        if (isinstance(a, App) and isinstance(b, App) and a.fn == b.fn == q
                and _var_args(a.args + b.args)):
            return Image((a.args[0], b.args[0]), s.succedent)
    return None


def _class_for_symbol(sym: str, function: bool, axioms) -> Image | None:
    for ax in axioms:
        s = ax.sequent
        if len(s.antecedent) != 1:
            continue
        h = s.antecedent[0]
        if not function and isinstance(h, Rel) and h.name == sym and _var_args(h.args):
            return Image(tuple(h.args), s.succedent)
        if (function and isinstance(h, Eq) and isinstance(h.left, App) and h.left.fn == sym
                and isinstance(h.right, Var) and _var_args(h.left.args + (h.right,))):
            return Image(tuple(h.left.args) + (h.right,), s.succedent)
    return None


def _sort_candidates(sig: Signature, sort: str, new_funs, axioms) -> list:
    outs = [(f, d[0], c) for f, d, c in new_funs if d == (sort,) and c in sig.sorts]
    ins = [(f, d[0], c) for f, d, c in new_funs if c == sort and len(d) == 1 and d[0] in sig.sorts]
    cands = []
    if not outs and not ins:
        cands.append(Terminal(sort))
    if outs:
        cands.append(Product(tuple(c for _, _, c in outs), sort, tuple(f for f, _, _ in outs)))
        for f, _, c in outs:
            cls = _class_for_subsort(f, axioms)
            if cls is not None:
                cands.append(Subsort(c, cls, sort, f))
    if ins:
        cands.append(Coproduct(tuple(d for _, d, _ in ins), sort, tuple(f for f, _, _ in ins)))
        for f, d, _ in ins:
            cls = _class_for_quotient(f, axioms)
            if cls is not None:
                cands.append(Quotient(d, cls, sort, f))
    return cands


def _matches(spec, pool: list) -> list | None:
    """Indices in ``pool`` matching each generated definition, or None."""
    used = []
    for d in definitions(spec):
        hit = next((i for i, ax in enumerate(pool) if i not in used and sequent_alpha_equal(d, ax.sequent)), None)
        if hit is None:
            return None
        used.append(hit)
    return used


@dataclass
class Classification:
    specs: list
    unmatched_symbols: list
    unmatched_axioms: list


def classify_extension(t: Theory, plus: Theory) -> Classification:
    """Recognise every new symbol of ``plus`` as a schema instance, in declaration order."""
    if not plus.signature.contains(t.signature):
        raise LogicError(f"{plus.name} does not contain the signature of {t.name}")
    old = {(a.name, a.sequent) for a in t.axioms}
    missing = [a.name for a in t.axioms if (a.name, a.sequent) not in {(b.name, b.sequent) for b in plus.axioms}]
    if missing:
        raise LogicError(f"{plus.name} drops axioms of {t.name}: {', '.join(missing)}")
    pool = [a for a in plus.axioms if (a.name, a.sequent) not in old]
    psig, sig = plus.signature, t.signature
    new_funs = [f for f in psig.functions if not sig.has_function(f[0])]
    new_rels = [r for r in psig.relations if not sig.has_relation(r[0])]
    claimed: set = set()
    specs, unmatched = [], []
    cur = sig
    for sort in psig.sorts:
        if sort in sig.sorts:
            continue
        pending = [f for f in new_funs if f[0] not in claimed]
        found = None
        for cand in _sort_candidates(cur, sort, pending, pool):
            hits = _matches(cand, pool)
            if hits is not None:
                found = (cand, hits)
                break
        if found is None:
            unmatched.append(sort)
            cur = cur.extend((sort,))
            continue
        cand, hits = found
        pool = [a for i, a in enumerate(pool) if i not in hits]
        s, r, f = new_symbols(cand)
        claimed |= {x[0] for x in f}
        cur = cur.extend(s, r, f)
        specs.append(cand)
    for name, dom in new_rels:
        cls = _class_for_symbol(name, False, pool)
        spec = Definitional(name, cls) if cls is not None else None
        hits = _matches(spec, pool) if spec is not None else None
        if hits is None:
            unmatched.append(name)
            continue
        pool = [a for i, a in enumerate(pool) if i not in hits]
        specs.append(spec)
    for name, dom, cod in new_funs:
        if name in claimed:
            continue
        cls = _class_for_symbol(name, True, pool)
        spec = Definitional(name, cls, True) if cls is not None else None
        hits = _matches(spec, pool) if spec is not None else None
        if hits is None:
            unmatched.append(name)
            continue
        pool = [a for i, a in enumerate(pool) if i not in hits]
        specs.append(spec)
    return Classification(specs, unmatched, [a.name for a in pool])


def verify_extension(t: Theory, plus: Theory, budget: Budget = Budget()) -> VerificationReport:
    """Check that ``plus`` is a Morita extension of ``t`` and discharge admissibility."""
    report = VerificationReport(f"extension {t.name} -> {plus.name}")
    report.meta["budget"] = str(budget)
    try:
        cls = classify_extension(t, plus)
    except LogicError as e:
        report.add("signature", str(e), FAILED)
        return report
    cur = t
    for spec in cls.specs:
        report.add(f"{spec.kind} {spec.name}", _describe(spec), PROVED)
        for n, s in admissibility(spec):
            try:
                report.add_result(f"{spec.name} {n}", s, prove_sequent(cur, s, budget), cur.name)
            except LogicError as e:
                report.add(f"{spec.name} {n}", f"{show_sequent(s)}  ({e})", FAILED)
        s, r, f = new_symbols(spec)
        cur = Theory(cur.name, cur.signature.extend(s, r, f), cur.axioms, cur.mode).with_axioms(
            [Axiom(_ax_name(spec.name, k + 1), d) for k, d in enumerate(definitions(spec))
             if _ax_name(spec.name, k + 1) not in {a.name for a in cur.axioms}])
    for sym in cls.unmatched_symbols:
        report.add(f"unclassified {sym}", "no schema matches the new symbol and its axioms", FAILED)
    for ax in cls.unmatched_axioms:
        report.add(f"axiom {ax}", show_sequent(plus.axiom(ax).sequent) + "  (not a definition)", FAILED)
    if not plus.signature.names() - t.signature.names() and not cls.unmatched_axioms:
        report.notes.append("empty extension")
    return report


def _describe(spec) -> str:
    if isinstance(spec, Product):
        return f"{spec.name} = {' x '.join(spec.factors) or '1'} via {', '.join(spec.projections)}"
    if isinstance(spec, Terminal):
        return f"{spec.name} = 1"
    if isinstance(spec, Coproduct):
        return f"{spec.name} = {' + '.join(spec.summands)} via {', '.join(spec.injections)}"
    if isinstance(spec, Subsort):
        return f"{spec.name} = {spec.base} where {show_formula(spec.cls.formula)} via {spec.inclusion}"
    if isinstance(spec, Quotient):
        return f"{spec.name} = {spec.base} / {show_formula(spec.cls.formula)} via {spec.surjection}"
    params = ",".join(p.name for p in spec.cls.params)
    return f"{spec.symbol}({params}) := {show_formula(spec.cls.formula)}"


# ---------------------------------------------------------------- inclusion and retraction


def inclusion_translation(t: Theory, plus: Theory, budget: Budget = Budget(), check: bool = True) -> Translation:
    """Identity on the old symbols, trivial domains; verified as a translation."""
    if check:
        rep = verify_extension(t, plus, budget)
        if not rep.proved:
            raise LogicError(f"{plus.name} is not a verified extension of {t.name}")
    F = make_reconstrual(f"I_{t.name}", t, plus)
    tr = verify_translation(F, budget)
    for ax in t.axioms:
        r = prove_sequent(plus, ax.sequent, budget)
        tr.report.add_result(f"conservative on axiom {ax.name}", ax.sequent, r, plus.name)
    return tr


@dataclass
class Retraction:
    inclusion: Reconstrual
    retraction: Reconstrual
    chi1: TMap
    chi2: TMap

    def verify(self, budget: Budget = Budget()) -> VerificationReport:
        E, R = self.inclusion, self.retraction
        report = VerificationReport(f"quotient retraction {R.source.name} -> {R.target.name}")
        report.meta["budget"] = str(budget)
        for tr in (verify_translation(E, budget), verify_translation(R, budget)):
            for e in tr.report.entries:
                if not e.name.startswith(("equality preserved", "strong")):
                    report.entries.append(e.__class__(f"{tr.name}: {e.name}", e.statement, e.verdict,
                                                      e.evidence, e.result))
            report.notes.append(f"{tr.name}: translation {tr.is_translation}, "
                                f"equality-preserving {tr.is_equality_preserving}, strong {tr.is_strong}")
        report.extend(verify_homotopy_equivalence(E, R, self.chi1, self.chi2, budget), "homotopy: ")
        return report


def quotient_retraction(t: Theory, plus: Theory) -> Retraction:
    """Send each quotient sort back to its base sort and the surjection to the relation."""
    cls = classify_extension(t, plus)
    if cls.unmatched_symbols or cls.unmatched_axioms:
        raise LogicError(f"{plus.name} is not a recognisable extension of {t.name}")
    bad = [s.name for s in cls.specs if not isinstance(s, Quotient) or s.base not in t.signature.sorts]
    if bad:
        raise LogicError(f"extension has non-quotient new symbols: {', '.join(bad)}")
    E = make_reconstrual(f"E_{t.name}", t, plus)
    sorts, funs, eqls = {}, {}, {}
    for q in cls.specs:
        sorts[q.name] = q.base
        ps = param_vars((q.base, q.base), "x")
        funs[q.surjection] = Image(ps, q.cls.at(ps))
        eqls[q.name] = Image(ps, q.cls.at(ps))
    R = make_reconstrual(f"R_{t.name}", plus, t, sorts, {}, funs, eqls)
    RE, ER = compose_translations(E, R), compose_translations(R, E)
    chi1 = trivial_tmap(RE, identity_reconstrual(t), "chi1")
    comps = {}
    for s in plus.signature.sorts:
        x, y = Var("x", s), Var("y", ER.sorts[s].sorts[0])
        comps[s] = Image((x, y), Eq(x, y))
    for q in cls.specs:
        x, y = Var("x", q.name), Var("y", q.base)
        comps[q.name] = Image((x, y), Eq(App(q.surjection, (y,), q.name), x))
    chi2 = make_tmap("chi2", identity_reconstrual(plus), ER, comps)
    return Retraction(E, R, chi1, chi2)


# ---------------------------------------------------------------- bounded exact completion


_CODE = {"=": "eq", "&": "and", "|": "or"}


def class_code(cls: Image) -> str:
    """Stable identifier fragment for a substitution class."""
    ps = param_vars(tuple(p.sort for p in cls.params), "x", set())
    text = show_formula(cls.at(ps))
    parts = re.findall(r"[A-Za-z0-9_]+|[=&|]", text.replace("'", "p"))
    return "_".join(_CODE.get(p, p) for p in parts)


def _existing_quotients(t: Theory) -> list:
    out = []
    for f, dom, cod in t.signature.functions:
        if len(dom) == 1:
            cls = _class_for_quotient(f, t.axioms)
            if cls is not None and tuple(p.sort for p in cls.params) == (dom[0], dom[0]):
                out.append((dom[0], cls))
    return out


def exact_completion_slice(t: Theory, depth: int, budget: Budget = Budget(),
                           name: str | None = None) -> ExtensionResult:
    """Add a quotient sort for every provable equivalence relation up to ``depth``."""
    sig = t.signature
    sieve = Sieve(t)
    cache = EntailmentCache(t, budget, sieve)
    specs, notes = [], [f"depth {depth} (formula nodes), order: size then printed form", f"budget {budget}"]
    unknown = []
    taken = set(sig.names())
    existing = _existing_quotients(t)
    for s in sig.sorts:
        x, y = Var("x", s), Var("y", s)
        kept = [cls.at((x, y)) for base, cls in existing if base == s]
        for phi in enumerate_formulas(sig, (x, y), depth, require=(x, y)):
            cls = Image((x, y), phi)
            if not _equivalence_in_models(sieve, cls, s):
                continue
            verdicts = []
            for n, seq in admissibility(Quotient(s, cls, "_", "_")):
                r = prove_sequent(t, seq, budget)
                verdicts.append(r.status)
                if r.status == "Unknown":
                    unknown.append(f"{show_formula(phi)}: {n} Unknown")
            if verdicts != ["Proved"] * 3:
                continue
            dup = None
            for other in kept:
                v = cache.equivalent(phi, other, (x, y))
                if v == "Proved":
                    dup = other
                    break
                if v == "Unknown":
                    unknown.append(f"{show_formula(phi)} vs {show_formula(other)}: bi-entailment Unknown")
            if dup is not None:
                continue
            kept.append(phi)
            code = class_code(cls)
            qs = fresh_name(f"{s}_by_{code}", taken)
            taken.add(qs)
            qf = fresh_name(f"q_{qs}", taken)
            taken.add(qf)
            specs.append(Quotient(s, cls, qs, qf))
    result = extend_chain(t, specs, name or f"{t.name}_ex{depth}")
    if unknown:
        notes.append("incomplete: some candidates were Unknown and were not included")
        notes.extend(unknown)
    result.notes = notes
    return result


def _equivalence_in_models(sieve: Sieve, cls: Image, sort: str) -> bool:
    for m in sieve.models:
        xs = m.carriers[sort]
        rel = {(a, b) for a in xs for b in xs if evaluate(m, cls.formula, dict(zip(cls.params, (a, b))))}
        if any((a, a) not in rel for a in xs):
            return False
        if any((b, a) not in rel for a, b in rel):
            return False
        if any((a, c) not in rel for a, b in rel for b2, c in rel if b == b2):
            return False
    return True


# ---------------------------------------------------------------- properness


@dataclass
class Realization:
    theory: Theory
    sort: str
    phi: Image
    psi: Image
    disjoint: object
    inhabited: object

    def sequents(self) -> tuple:
        return realization_sequents(self.sort, self.phi, self.psi)


def realization_sequents(sort: str, phi: Image, psi: Image) -> tuple:
    x, y = Var("x", sort), Var("y", sort)
    disjoint = Sequent((And(phi.at((x,)), psi.at((x,))),), BOT)
    inhabited = Sequent((), And(Exists(x, phi.at((x,))), Exists(y, psi.at((y,)))))
    return disjoint, inhabited


def find_proper_realization(t: Theory, depth: int, budget: Budget = Budget(), log: list | None = None):
    """First pair of formulas (enumeration order) that is provably disjoint and jointly inhabited."""
    log = [] if log is None else log
    sieve = Sieve(t)
    for s in t.signature.sorts:
        x = Var("x", s)
        forms = [f for f in enumerate_formulas(t.signature, (x,), depth, require=(x,))]
        for a, b in itertools.combinations(forms, 2):
            phi, psi = Image((x,), a), Image((x,), b)
            dis, inh = realization_sequents(s, phi, psi)
            refuted = [lab for lab, q in (("disjointness", dis), ("joint inhabitation", inh))
                       if not _holds_everywhere(sieve, q)]
            if refuted:
                log.append(f"{show_formula(a)} / {show_formula(b)}: {refuted[0]} fails in a finite model")
                continue
            r1 = prove_sequent(t, dis, budget)
            if r1.status != "Proved":
                log.append(f"{show_formula(a)} / {show_formula(b)}: disjointness {r1.status}")
                continue
            r2 = prove_sequent(t, inh, budget)
            if r2.status != "Proved":
                log.append(f"{show_formula(a)} / {show_formula(b)}: joint inhabitation {r2.status}")
                continue
            return Realization(t, s, phi, psi, r1, r2)
    return None


def _holds_everywhere(sieve: Sieve, seq: Sequent) -> bool:
    return all(sequent_violation(m, seq) is None for m in sieve.models)


class TransportError(LogicError):
    def __init__(self, obligation: str, sequent: Sequent, result):
        super().__init__(f"transported {obligation} is {result.status}: {show_sequent(sequent)}")
        self.obligation, self.sequent, self.result = obligation, sequent, result


def transport_properness(F: Translation | Reconstrual, r: Realization, budget: Budget = Budget()) -> Realization:
    """Push a realization along a translation and re-prove it in the target."""
    R = F.reconstrual if isinstance(F, Translation) else F
    if isinstance(F, Translation) and F.is_translation != PROVED:
        raise LogicError(f"{F.name} is not a verified translation")
    img = R.sorts[r.sort]
    if len(img.sorts) != 1:
        raise LogicError(f"sort {r.sort} maps to a list of length {len(img.sorts)}; a realization needs one sort")
    s2 = img.sorts[0]
    x2 = Var("x", s2)

    def push(cls: Image) -> Image:
        im = Imager(R, reserved={"x"})
        (xv,) = im.var(cls.params[0])
        body = conj([img.at((xv,)), im.formula(cls.formula)])
        return Image((x2,), substitute(body, (xv,), (x2,)))

    phi, psi = push(r.phi), push(r.psi)
    dis, inh = realization_sequents(s2, phi, psi)
    r1 = prove_sequent(R.target, dis, budget)
    if r1.status != "Proved":
        raise TransportError("disjointness", dis, r1)
    r2 = prove_sequent(R.target, inh, budget)
    if r2.status != "Proved":
        raise TransportError("joint inhabitation", inh, r2)
    return Realization(R.target, s2, phi, psi, r1, r2)


# ---------------------------------------------------------------- coproduct elimination


def eliminate_coproduct(t: Theory, r: Realization, sort1: str, sort2: str, name: str | None = None) -> ExtensionResult:
    """Build ``(sort1 x sort2 x tau) / eps`` with ``tau`` the subsort of ``phi | psi``.

    The coproduct laws for the candidate injections are returned as
    obligations in the final theory rather than asserted.
    """
    sig = t.signature
    for s in (sort1, sort2):
        if s not in sig.sorts:
            raise LogicError(f"unknown sort {s}")
    taken = set(sig.names())

    def fresh(base):
        n = fresh_name(base, taken)
        taken.add(n)
        return n

    s = r.sort
    x = Var("x", s)
    tau, incl = fresh("tau"), fresh("i_tau")
    sub = Subsort(s, Image((x,), Or(r.phi.at((x,)), r.psi.at((x,)))), tau, incl)
    prod = fresh("P")
    pis = (fresh("pi1"), fresh("pi2"), fresh("pi3"))
    pr = Product((sort1, sort2, tau), prod, pis)

    def part(u, k):
        return App(pis[k], (u,), pr.factors[k])

    def at_tau(u, cls):
        return cls.at((App(incl, (part(u, 2),), s),))

    u, v = Var("u", prod), Var("v", prod)
    eps_body = Or(conj([at_tau(u, r.phi), at_tau(v, r.phi), Eq(part(u, 0), part(v, 0))]),
                  conj([at_tau(u, r.psi), at_tau(v, r.psi), Eq(part(u, 1), part(v, 1))]))
    eps = Image((u, v), eps_body)
    quo = fresh("Q")
    qf = fresh("q")
    qt = Quotient(prod, eps, quo, qf)
    injs = []
    for k, (src, cls) in enumerate(((sort1, r.phi), (sort2, r.psi))):
        a, y, w = Var("x", src), Var("y", quo), Var("u", prod)
        body = Exists(w, conj([Eq(part(w, k), a), at_tau(w, cls), Eq(App(qf, (w,), quo), y)]))
        injs.append(Definitional(fresh(f"rho{k + 1}"), Image((a, y), body), True))
    specs = [sub, pr, qt] + injs
    res = extend_chain(t, specs, name or f"{t.name}_elim")
    cop = Coproduct((sort1, sort2), quo, tuple(d.symbol for d in injs))
    laws = definitions(cop)
    labels = ["exhaustive"] + [f"injective {i + 1}" for i in range(2)] + ["disjoint"]
    obs = list(res.obligations) + [Obligation(f"coproduct {lab}", seq, res.theory) for lab, seq in zip(labels, laws)]
    res.obligations = tuple(obs)
    res.notes.append(f"epsilon({u.name},{v.name}) := {show_formula(eps_body)}")
    return res


def expand_model(m: FiniteModel, result: ExtensionResult, name: str | None = None) -> FiniteModel:
    """Interpret every extension step of ``result`` in ``m`` by the evident set construction."""
    sig = m.signature
    carriers, rels = dict(m.carriers), dict(m.relations)
    funs = {k: dict(v) for k, v in m.functions.items()}
    for spec in result.specs:
        sorts, rs, fs = new_symbols(spec)
        sig = sig.extend(sorts, rs, fs)
        if isinstance(spec, (Product, Terminal)):
            factors = getattr(spec, "factors", ())
            elems = list(itertools.product(*(carriers[f] for f in factors)))
            labels = ["_".join(e) if e else "*" for e in elems]
            if len(set(labels)) != len(labels):
                raise LogicError(f"product labels collide in {spec.name}")
            carriers[spec.name] = tuple(labels)
            for k, p in enumerate(getattr(spec, "projections", ())):
                funs[p] = {(lab,): e[k] for lab, e in zip(labels, elems)}
        elif isinstance(spec, Coproduct):
            labels, tables = [], []
            for k, src in enumerate(spec.summands):
                table = {}
                for a in carriers[src]:
                    lab = f"in{k + 1}_{a}"
                    labels.append(lab)
                    table[(a,)] = lab
                tables.append(table)
            carriers[spec.name] = tuple(labels)
            for inj, table in zip(spec.injections, tables):
                funs[inj] = table
        else:
            view = _Partial(carriers, rels, funs)
            if isinstance(spec, Subsort):
                keep = [a for a in carriers[spec.base] if evaluate(view, spec.cls.formula, {spec.cls.params[0]: a})]
                carriers[spec.name] = tuple(keep)
                funs[spec.inclusion] = {(a,): a for a in keep}
            elif isinstance(spec, Quotient):
                elems = sorted(carriers[spec.base], key=label_key)

                def rel(a, b):
                    return evaluate(view, spec.cls.formula, dict(zip(spec.cls.params, (a, b))))

                rep = {}
                for a in elems:
                    rep[a] = next((b for b in elems if b in rep.values() and rel(a, b)), a)
                for a in elems:
                    for b in elems:
                        if rel(a, b) != (rep[a] == rep[b]):
                            raise LogicError(f"{show_formula(spec.cls.formula)} is not an equivalence relation here")
                carriers[spec.name] = tuple(sorted(set(rep.values()), key=label_key))
                funs[spec.surjection] = {(a,): rep[a] for a in elems}
            else:
                ps = spec.cls.params
                dom = ps[:-1] if spec.function else ps
                if spec.function:
                    table = {}
                    for args in itertools.product(*(carriers[p.sort] for p in dom)):
                        hits = [b for b in carriers[ps[-1].sort]
                                if evaluate(view, spec.cls.formula, dict(zip(ps, args + (b,))))]
                        if len(hits) != 1:
                            raise LogicError(f"definition of {spec.symbol} is not functional at {args}")
                        table[args] = hits[0]
                    funs[spec.symbol] = table
                else:
                    rels[spec.symbol] = frozenset(
                        args for args in itertools.product(*(carriers[p.sort] for p in ps))
                        if evaluate(view, spec.cls.formula, dict(zip(ps, args))))
    out = FiniteModel(sig, carriers, rels, funs, name or f"{m.name}_plus")
    ok, bad = check_model(out, result.theory)
    if not ok:
        raise LogicError(f"expanded model violates {bad[0]}")
    return out


class _Partial:
    def __init__(self, carriers, rels, funs):
        self.carriers, self.relations, self.functions = carriers, rels, funs


# ---------------------------------------------------------------- equality elimination


def _find_quotient(t: Theory, base: str, cls: Image, budget: Budget):
    for sort_base, found in _existing_quotients(t):
        if sort_base != base:
            continue
        if alpha_equal(found.formula, cls.formula, found.params, cls.params):
            return found
        a, b = found.formula, substitute(cls.formula, cls.params, found.params)
        if all(prove_sequent(t, Sequent((p,), q), budget).status == "Proved" for p, q in ((a, b), (b, a))):
            return found
    return None


def make_equality_preserving(F: Translation | Reconstrual, budget: Budget = Budget(),
                             auto_extend: bool = True, name: str | None = None) -> Translation:
    """Replace each image sort by its quotient under the image of equality.

    Handles sort images of length one whose domain formula is provably ``top``;
    the target is extended by the needed quotient sorts when ``auto_extend``.
    """
    R = F.reconstrual if isinstance(F, Translation) else F
    if isinstance(F, Translation) and F.is_translation != PROVED:
        raise LogicError(f"{R.name} is not a verified translation")
    target = R.target
    quotient_of = {}
    for s, img in R.sorts.items():
        if len(img.sorts) != 1:
            raise LogicError(f"sort {s} maps to a list of length {len(img.sorts)}; only single sorts are handled")
        if not isinstance(img.domain, Top):
            if prove_sequent(target, Sequent((), img.domain), budget).status != "Proved":
                raise LogicError(f"domain formula of {s} is not provably top")
        cls = R.equalities[s]
        base = img.sorts[0]
        if _is_equality(target, cls, budget):
            quotient_of[s] = None
            continue
        found = _find_quotient(target, base, cls, budget)
        if found is None:
            if not auto_extend:
                raise LogicError(f"target has no quotient of {base} by {show_formula(cls.formula)}")
            taken = target.signature.names()
            qs = fresh_name(f"{base}_by_{class_code(cls)}", taken)
            qf = fresh_name(f"q_{qs}", taken | {qs})
            target = extend_morita(target, Quotient(base, cls, qs, qf), target.name + "ex").theory
            found = _find_quotient(target, base, cls, budget)
        quotient_of[s] = _quotient_symbol(target, base, found)
    hat_name = name or f"{R.name}_hat"

    def lift(img: Image, sorts) -> Image:
        used = {p.name for p in img.params}
        ys, hidden, links = [], [], []
        for k, (s, x) in enumerate(zip(sorts, img.params)):
            if quotient_of[s] is None:
                ys.append(x)
                continue
            n = fresh_name(f"y{k + 1}", used)
            used.add(n)
            y = Var(n, quotient_of[s][1])
            ys.append(y)
            hidden.append(x)
            links.append(Eq(App(quotient_of[s][0], (x,), y.sort), y))
        return Image(tuple(ys), exists_many(hidden, conj([img.formula] + links)))

    ssig = R.source.signature
    rels = {r: lift(R.relations[r], dom) for r, dom in ssig.relations}
    funs = {f: lift(R.functions[f], dom + (cod,)) for f, dom, cod in ssig.functions}
    sorts = {s: R.sorts[s] if quotient_of[s] is None else quotient_of[s][1] for s in ssig.sorts}
    hat = make_reconstrual(hat_name, R.source, target, sorts, rels, funs)
    return verify_translation(hat, budget)


def _is_equality(t: Theory, cls: Image, budget: Budget) -> bool:
    x, y = cls.params
    if alpha_equal(cls.formula, Eq(x, y), cls.params, cls.params):
        return True
    same = Eq(x, y)
    return all(prove_sequent(t, Sequent((a,), b), budget).status == "Proved"
               for a, b in ((cls.formula, same), (same, cls.formula)))


def _quotient_symbol(t: Theory, base: str, cls: Image) -> tuple:
    for f, dom, cod in t.signature.functions:
        if dom == (base,):
            found = _class_for_quotient(f, t.axioms)
            if found is not None and found == cls:
                return f, cod
    raise LogicError(f"no quotient map for {base}")
