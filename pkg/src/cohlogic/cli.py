"""Command-line entry point.

Every command reads one or more workspace files, runs one operation and
prints a report.  The exit status encodes the overall verdict: 0 Proved,
1 Failed, 2 Unknown, 3 for unreadable or ill-formed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .catlogic import (classify_propositionality, internal_logic, lattice_category, lattice_isomorphism,
                       lindenbaum, syntactic_slice, validate_coherent_presentation)
from .chart import LEVELS, EquivalenceCertificate, Homotopy, classify_equivalence
from .models import check_model, enumerate_models, find_countermodel, show_model
from .morita import (TransportError, eliminate_coproduct, exact_completion_slice, expand_model,
                     find_proper_realization, quotient_retraction, transport_properness, verify_extension)
from .parser import ParseError, parse_sequent
from .printer import show_sequent, show_theory
from .prover import Budget, prove_sequent
from .report import FAILED, PROVED, UNKNOWN, VERSION, VerificationReport, combine
from .syntax import LogicError
from .translation import (pullback_model, show_reconstrual, show_tmap, verify_homotopy_equivalence, verify_tmap,
                          verify_translation)
from .workspace import Workspace, load_workspace

EXIT = {PROVED: 0, FAILED: 1, UNKNOWN: 2}
INPUT_ERROR = 3


class InputError(Exception):
    """Bad command-line input; reported with exit status 3."""


@dataclass
class Outcome:
    verdict: str
    report: object                  # VerificationReport or Chart
    artifacts: list = field(default_factory=list)

    def render(self, fmt: str) -> str:
        if fmt == "structured":
            return json.dumps({"artifacts": self.artifacts, "report": self.report.to_dict(),
                               "verdict": self.verdict}, indent=2, sort_keys=True) + "\n"
        parts = [a.rstrip("\n") + "\n" for a in self.artifacts]
        parts.append(self.report.render_text())
        if self.verdict != self.report.verdict:
            parts.append(f"overall: {self.verdict}\n")
        return "\n".join(parts)


def parse_budget(text: str) -> Budget:
    """``R,W,D``; trailing fields may be left out and keep their defaults."""
    default = Budget()
    try:
        vals = [int(x) for x in text.split(",")]
        if not 1 <= len(vals) <= 3:
            raise ValueError
        vals += [default.witnesses, default.splits][len(vals) - 1:]
        return Budget(*vals)
    except ValueError:
        raise argparse.ArgumentTypeError(f"budget must be R[,W[,D]] with positive integers, got {text!r}") from None


def positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        n = 0
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return n


# ---------------------------------------------------------------- helpers


def _theory(ws: Workspace, name):
    return ws.theory(name) if name else ws.last("theory")


def _report(title: str) -> VerificationReport:
    return VerificationReport(title)


def _translations(ws: Workspace, ref):
    return [ws.translation(ref)] if ref else list(ws.translations.values())


def _realization(t, depth, budget):
    log: list = []
    r = find_proper_realization(t, depth, budget, log)
    return r, log


# ---------------------------------------------------------------- commands


def cmd_check_theory(ws: Workspace, a) -> Outcome:
    rep = _report("theories")
    names = [a.theory] if a.theory else list(ws.theories)
    if not names:
        raise InputError("no theory given")
    for n in names:
        t = ws.theory(n)
        sig = t.signature
        rep.add(f"{n} well-typed", f"{len(sig.sorts)} sorts, {len(sig.relations)} relations, "
                f"{len(sig.functions)} functions, {len(t.axioms)} axioms", PROVED)
        m = next(enumerate_models(t, 2, limit=20000), None)
        rep.notes.append(f"{n}: " + ("has a model with carriers of size at most 2" if m is not None
                                     else "no model with carriers of size at most 2 found"))
    return Outcome(rep.verdict, rep, [show_theory(ws.theory(n)) for n in names])


def cmd_prove(ws: Workspace, a) -> Outcome:
    t = _theory(ws, a.theory)
    seq = parse_sequent(a.sequent, t.signature, t.mode)
    res = prove_sequent(t, seq, a.budget)
    rep = _report(f"prove in {t.name}")
    rep.add_result("goal", seq, res, t.name)
    arts = [res.render()] if res.status == "Proved" else []
    return Outcome(rep.verdict, rep, arts)


def cmd_countermodel(ws: Workspace, a) -> Outcome:
    t = _theory(ws, a.theory)
    seq = parse_sequent(a.sequent, t.signature, t.mode)
    m = find_countermodel(t, seq, a.size)
    rep = _report(f"countermodel search in {t.name}")
    rep.meta["max size"] = a.size
    if m is None:
        rep.add("countermodel", show_sequent(seq), FAILED, f"no countermodel with carriers of size at most {a.size}")
        return Outcome(FAILED, rep)
    rep.add("countermodel", show_sequent(seq), PROVED, show_model(m, t.name))
    return Outcome(PROVED, rep, [show_model(m, t.name)])


def cmd_check_model(ws: Workspace, a) -> Outcome:
    names = [a.model] if a.model else list(ws.models)
    if not names:
        raise InputError("no model given")
    rep = _report("models")
    for n in names:
        m, t = ws.model(n), ws.theory(ws.model_theory[n])
        ok, bad = check_model(m, t)
        ev = "\n".join(f"{v.axiom} fails at " + ", ".join(f"{x}={e}" for x, e in v.env) for v in bad[:10])
        rep.add(f"{n} is a model of {t.name}", f"{len(t.axioms)} axioms", PROVED if ok else FAILED, ev)
    return Outcome(rep.verdict, rep)


def _translation_outcome(trs, title) -> Outcome:
    rep = _report(title)
    verdicts = []
    for tr in trs:
        rep.extend(tr.report, f"{tr.name}: " if len(trs) > 1 else "")
        rep.notes.append(f"{tr.name}: translation {tr.is_translation}, equality-preserving "
                         f"{tr.is_equality_preserving}, strong {tr.is_strong}")
        verdicts.append(tr.is_translation)
    return Outcome(combine(verdicts), rep, [show_reconstrual(tr.reconstrual) for tr in trs])


def cmd_check_translation(ws: Workspace, a) -> Outcome:
    Fs = _translations(ws, a.translation)
    if not Fs:
        raise InputError("no translation given")
    return _translation_outcome([verify_translation(F, a.budget) for F in Fs], "translations")


def cmd_compose(ws: Workspace, a) -> Outcome:
    GF = ws.translation(f"{a.then}.{a.first}")
    return _translation_outcome([verify_translation(GF, a.budget)], f"composite {GF.name}")


def cmd_check_tmap(ws: Workspace, a) -> Outcome:
    names = [a.tmap] if a.tmap else list(ws.tmaps)
    if not names:
        raise InputError("no t-map given")
    rep = _report("t-maps")
    for n in names:
        chi = ws.tmap(n)
        rep.extend(verify_tmap(chi, True, a.budget, iso=a.iso), f"{n}: ")
    return Outcome(rep.verdict, rep, [show_tmap(ws.tmap(n)) for n in names])


def _homotopy(ws: Workspace, forward, backward, unit, counit) -> Homotopy:
    return Homotopy(ws.translation(forward), ws.translation(backward),
                    ws.tmap(unit) if unit else None, ws.tmap(counit) if counit else None)


def cmd_check_homotopy(ws: Workspace, a) -> Outcome:
    h = _homotopy(ws, a.forward, a.backward, a.unit, a.counit)
    unit, counit = h.tmaps()
    rep = verify_homotopy_equivalence(h.forward, h.backward, unit, counit, a.budget)
    return Outcome(rep.verdict, rep, [show_tmap(unit), show_tmap(counit)])


def cmd_pullback_model(ws: Workspace, a) -> Outcome:
    F = ws.translation(a.translation)
    m = ws.model(a.model) if a.model else ws.last("model")
    rep = _report(f"pullback of {m.name} along {F.name}")
    tr = verify_translation(F, a.budget)
    rep.add(f"{F.name} is a translation", f"{F.source.name} -> {F.target.name}", tr.is_translation)
    ok, bad = check_model(m, F.target)
    rep.add(f"{m.name} is a model of {F.target.name}", f"{len(F.target.axioms)} axioms", PROVED if ok else FAILED)
    try:
        pb = pullback_model(F, m)
    except LogicError as e:
        rep.add("pullback", f"{m.name} along {F.name}", FAILED, str(e))
        return Outcome(rep.verdict, rep)
    ok, bad = check_model(pb, F.source)
    rep.add(f"pullback is a model of {F.source.name}", f"{len(F.source.axioms)} axioms", PROVED if ok else FAILED,
            "\n".join(v.axiom for v in bad[:10]))
    return Outcome(rep.verdict, rep, [show_model(pb, F.source.name)])


def cmd_extend(ws: Workspace, a) -> Outcome:
    t = _theory(ws, a.theory)
    text = f"extend {t.name} with {a.spec}" + (f" named {a.name}" if a.name else "")
    ws.load(text)
    res = ws.last("extension")
    rep = res.discharge(a.budget)
    for d in res.definitions:
        rep.notes.append(f"definition {d.name}: {show_sequent(d.sequent)}")
    return Outcome(rep.verdict, rep, [show_theory(res.theory)])


def cmd_check_extension(ws: Workspace, a) -> Outcome:
    rep = verify_extension(ws.theory(a.base), ws.theory(a.extended), a.budget)
    return Outcome(rep.verdict, rep)


def cmd_exact_slice(ws: Workspace, a) -> Outcome:
    t = _theory(ws, a.theory)
    res = exact_completion_slice(t, a.depth, a.budget)
    rep = res.discharge(a.budget)
    return Outcome(rep.verdict, rep, [show_theory(res.theory)])


def cmd_quotient_retraction(ws: Workspace, a) -> Outcome:
    r = quotient_retraction(ws.theory(a.base), ws.theory(a.extended))
    rep = r.verify(a.budget)
    return Outcome(rep.verdict, rep, [show_reconstrual(r.retraction), show_tmap(r.chi1), show_tmap(r.chi2)])


def _realization_entries(rep, r, theory_name):
    dis, inh = r.sequents()
    rep.add_result("disjointness", dis, r.disjoint, theory_name)
    rep.add_result("joint inhabitation", inh, r.inhabited, theory_name)


def cmd_find_proper(ws: Workspace, a) -> Outcome:
    t = _theory(ws, a.theory)
    r, log = _realization(t, a.depth, a.budget)
    rep = _report(f"proper realization of {t.name}")
    rep.meta["depth"] = a.depth
    rep.notes.extend(log)
    if r is None:
        rep.add("realization", f"formula pairs up to depth {a.depth}", FAILED, "search exhausted")
        return Outcome(FAILED, rep)
    _realization_entries(rep, r, t.name)
    return Outcome(rep.verdict, rep)


def cmd_transport_proper(ws: Workspace, a) -> Outcome:
    F = ws.translation(a.translation)
    r, log = _realization(F.source, a.depth, a.budget)
    rep = _report(f"transport of properness along {F.name}")
    rep.meta["depth"] = a.depth
    if r is None:
        rep.notes.extend(log)
        rep.add("realization", f"{F.source.name} up to depth {a.depth}", FAILED, "no realization of the source found")
        return Outcome(FAILED, rep)
    _realization_entries(rep, r, F.source.name)
    try:
        r2 = transport_properness(F, r, a.budget)
    except TransportError as e:
        verdict = UNKNOWN if e.result.status == "Unknown" else FAILED
        rep.add(f"transported {e.obligation}", show_sequent(e.sequent), verdict, str(e))
        return Outcome(rep.verdict, rep)
    rep.entries = []
    _realization_entries(rep, r2, F.target.name)
    return Outcome(rep.verdict, rep)


def cmd_eliminate_coproduct(ws: Workspace, a) -> Outcome:
    t = _theory(ws, a.theory)
    r, log = _realization(t, a.depth, a.budget)
    if r is None:
        rep = _report(f"coproduct elimination in {t.name}")
        rep.notes.extend(log)
        rep.add("realization", f"{t.name} up to depth {a.depth}", FAILED, "no realization found")
        return Outcome(FAILED, rep)
    res = eliminate_coproduct(t, r, a.left, a.right)
    rep = res.discharge(a.budget)
    rep.meta["depth"] = a.depth
    if a.model:
        m = ws.model(a.model)
        big = expand_model(m, res)
        ok, _ = check_model(big, res.theory)
        rep.add(f"{m.name} expands to a model of {res.theory.name}", f"{len(res.theory.axioms)} axioms",
                PROVED if ok else FAILED)
        q = res.specs[2].name
        want = len(m.carriers[a.left]) + len(m.carriers[a.right])
        got = len(big.carriers[q])
        rep.add("quotient carrier size", f"|{q}| = {got}, |{a.left}| + |{a.right}| = {want}",
                PROVED if got == want else FAILED)
    return Outcome(rep.verdict, rep, [show_theory(res.theory)])


def _category(ws: Workspace, a):
    if a.lattice:
        return lattice_category(ws.single("lattice", a.lattice), a.lattice)
    return ws.single("category", a.category)


def cmd_internal_logic(ws: Workspace, a) -> Outcome:
    c = _category(ws, a)
    rep = validate_coherent_presentation(c)
    if not rep.proved:
        return Outcome(rep.verdict, rep)
    return Outcome(rep.verdict, rep, [show_theory(internal_logic(c, check=False))])


def cmd_syntactic_slice(ws: Workspace, a) -> Outcome:
    t = _theory(ws, a.theory)
    s = syntactic_slice(t, a.depth, a.budget)
    rep = _report(f"syntactic slice of {t.name}")
    rep.meta["depth"] = a.depth
    nhoms = sum(len(v) for v in s.homs.values())
    rep.add("objects", f"{len(s.objects)} classes up to depth {a.depth}", UNKNOWN if s.unknown else PROVED,
            "\n".join(str(u) for u in s.unknown))
    rep.add("morphisms", f"{nhoms} morphisms with all three sequents Proved", PROVED)
    rep.notes.append(f"thin: {s.thin()}")
    return Outcome(rep.verdict, rep, [s.render()])


def cmd_lindenbaum(ws: Workspace, a) -> Outcome:
    if a.lattice:
        lat = ws.single("lattice", a.lattice)
        t = internal_logic(lattice_category(lat, a.lattice))
    else:
        lat, t = None, _theory(ws, a.theory)
    lb = lindenbaum(t, a.depth, a.budget)
    rep = _report(f"Lindenbaum lattice of {t.name}")
    rep.meta["depth"] = a.depth
    laws = lb.laws()
    rep.add("lattice laws", f"{len(lb.elements)} classes", FAILED if laws else PROVED, "\n".join(laws))
    rep.add("exact", "every meet and join is a computed class", PROVED if lb.exact else UNKNOWN)
    rep.notes.extend(lb.notes)
    for e in lb.elements:
        rep.notes.append(f"class {e}: {lb.representatives.get(e, e)}")
    if lat is not None:
        iso = lattice_isomorphism(lb, lat)
        rep.add("isomorphic to input", f"{t.name} vs {a.lattice}", PROVED if iso else FAILED,
                "" if iso else "no order isomorphism")
        if iso:
            rep.notes.append("matching: " + ", ".join(f"{k}->{v}" for k, v in iso.items()))
    return Outcome(rep.verdict, rep, [lb.show(f"L_{t.name}")])


def cmd_classify_prop(ws: Workspace, a) -> Outcome:
    t = _theory(ws, a.theory)
    pr = classify_propositionality(t, a.depth, a.budget)
    pr.report.meta["depth"] = a.depth
    return Outcome(pr.verdict, pr.report)


def cmd_classify_equiv(ws: Workspace, a) -> Outcome:
    left, right = ws.theory(a.left), ws.theory(a.right)
    claims = tuple(c.strip() for c in a.claim.split(",")) if a.claim else LEVELS
    for c in claims:
        if c not in LEVELS:
            raise InputError(f"unknown level {c}; choose from {', '.join(LEVELS)}")
    h = None
    if a.retraction:
        r = quotient_retraction(left, right)
        h = Homotopy(r.inclusion, r.retraction, r.chi1, r.chi2)
    elif a.forward or a.backward:
        if not (a.forward and a.backward):
            raise InputError("--forward and --backward go together")
        h = _homotopy(ws, a.forward, a.backward, a.unit, a.counit)
    tops = None
    if a.tops_forward or a.tops_backward:
        if not (a.tops_forward and a.tops_backward):
            raise InputError("--tops-forward and --tops-backward go together")
        tops = _homotopy(ws, a.tops_forward, a.tops_backward, a.tops_unit, a.tops_counit)
    cert = EquivalenceCertificate(left, right, h,
                                  ws.theory(a.left_chain) if a.left_chain else None,
                                  ws.theory(a.right_chain) if a.right_chain else None,
                                  tops, claims)
    chart = classify_equivalence(cert, a.budget)
    return Outcome(chart.verdict, chart)


# ---------------------------------------------------------------- argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("files", nargs="+", type=Path, help="workspace files, loaded in order")
    common.add_argument("--budget", type=parse_budget, default=Budget(), help="rounds,witnesses,splits (10,4,4)")
    common.add_argument("--depth", type=positive, default=2, help="formula size bound (2)")
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")
    common.add_argument("--theory", help="theory name (default: the last one loaded)")

    p = argparse.ArgumentParser(prog="cohlogic", description="Coherent theories and their equivalences.")
    p.add_argument("--version", action="version", version=f"cohlogic {VERSION}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cmd(name, fn, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(handler=fn)
        return sp

    cmd("check-theory", cmd_check_theory, "parse and type-check theories")
    sp = cmd("prove", cmd_prove, "prove a sequent")
    sp.add_argument("sequent", help="'phi1, ..., phin |- psi'")
    sp = cmd("countermodel", cmd_countermodel, "search for a finite countermodel to a sequent")
    sp.add_argument("sequent", help="'phi1, ..., phin |- psi'")
    sp.add_argument("--size", type=positive, default=3, help="largest carrier size (3)")
    sp = cmd("check-model", cmd_check_model, "check finite models against their theories")
    sp.add_argument("--model")
    sp = cmd("check-translation", cmd_check_translation, "verify translations")
    sp.add_argument("--translation", help="name, id(T) or composite G.F")
    sp = cmd("compose", cmd_compose, "compose two translations and verify the composite")
    sp.add_argument("--first", required=True)
    sp.add_argument("--then", required=True)
    sp = cmd("check-tmap", cmd_check_tmap, "verify t-maps")
    sp.add_argument("--tmap")
    sp.add_argument("--iso", action="store_true", help="also check invertibility")
    sp = cmd("check-homotopy", cmd_check_homotopy, "verify a homotopy equivalence")
    for flag in ("--forward", "--backward"):
        sp.add_argument(flag, required=True)
    sp.add_argument("--unit", help="t-map linking backward.forward with the identity (default trivial)")
    sp.add_argument("--counit", help="t-map linking forward.backward with the identity (default trivial)")
    sp = cmd("pullback-model", cmd_pullback_model, "pull a model back along a translation")
    sp.add_argument("--translation", required=True)
    sp.add_argument("--model")
    sp = cmd("extend", cmd_extend, "extend a theory by Morita or definitional steps")
    sp.add_argument("--spec", required=True, help="e.g. 'quotient s by A as sA via p'")
    sp.add_argument("--name")
    for name, fn, text in (("check-extension", cmd_check_extension, "check that one theory extends another"),
                           ("quotient-retraction", cmd_quotient_retraction,
                            "build and verify the retraction of a quotient extension")):
        sp = cmd(name, fn, text)
        sp.add_argument("--base", required=True)
        sp.add_argument("--extended", required=True)
    cmd("exact-slice", cmd_exact_slice, "add quotients for the provable equivalence relations up to depth")
    cmd("find-proper", cmd_find_proper, "search for a proper realization")
    sp = cmd("transport-proper", cmd_transport_proper, "push a proper realization along a translation")
    sp.add_argument("--translation", required=True)
    sp = cmd("eliminate-coproduct", cmd_eliminate_coproduct, "build a coproduct from a proper realization")
    sp.add_argument("--left", required=True, help="first summand sort")
    sp.add_argument("--right", required=True, help="second summand sort")
    sp.add_argument("--model", help="finite model for the carrier-size check")
    for name, fn, text in (("internal-logic", cmd_internal_logic, "validate a category and print its theory"),):
        sp = cmd(name, fn, text)
        sp.add_argument("--category")
        sp.add_argument("--lattice", help="use the thin category of this lattice")
    cmd("syntactic-slice", cmd_syntactic_slice, "compute the depth-bounded syntactic category")
    sp = cmd("lindenbaum", cmd_lindenbaum, "compute the lattice of sentence classes")
    sp.add_argument("--lattice", help="compare against this lattice's internal logic")
    cmd("classify-prop", cmd_classify_prop, "classify propositionality and parapropositionality")
    sp = cmd("classify-equiv", cmd_classify_equiv, "check standards of equivalence between two theories")
    sp.add_argument("--left", required=True)
    sp.add_argument("--right", required=True)
    sp.add_argument("--claim", help=f"comma-separated subset of {','.join(LEVELS)} (default all)")
    sp.add_argument("--forward")
    sp.add_argument("--backward")
    sp.add_argument("--unit")
    sp.add_argument("--counit")
    sp.add_argument("--retraction", action="store_true",
                    help="derive the translations from the quotient extension right of left")
    sp.add_argument("--left-chain", help="top theory of a Morita extension chain over left")
    sp.add_argument("--right-chain", help="top theory of a Morita extension chain over right")
    for flag in ("--tops-forward", "--tops-backward", "--tops-unit", "--tops-counit"):
        sp.add_argument(flag)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else INPUT_ERROR
    try:
        ws = load_workspace(args.files)
        outcome = args.handler(ws, args)
    except (ParseError, LogicError, InputError) as e:
        print(f"cohlogic {args.command}: {e}", file=stderr)
        return INPUT_ERROR
    meta = getattr(outcome.report, "meta", None)
    if meta is not None:
        meta.setdefault("budget", str(args.budget))
        meta.setdefault("depth", args.depth)
        meta["command"] = args.command
        meta["inputs"] = " ".join(str(f) for f in args.files)
        meta["version"] = VERSION
    text = outcome.render(args.format)
    if args.out:
        try:
            args.out.write_text(text)
        except OSError as e:
            print(f"cohlogic {args.command}: {args.out}: {e.strerror}", file=stderr)
            return INPUT_ERROR
    else:
        stdout.write(text)
    return EXIT[outcome.verdict]


def main(argv=None) -> int:
    return run(argv)
