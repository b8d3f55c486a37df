"""Comparing two theories at several standards of equivalence.

The standards form a chain: logical equivalence implies definitional
equivalence, which implies weak intertranslatability, which in turn implies
Morita equivalence.  Each claimed standard is checked from the artifacts
supplied for it; a standard that was not verified but sits above a verified
one is marked as implied.  Nothing is ever inferred downwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .morita import verify_extension
from .prover import Budget, prove_sequent
from .report import FAILED, PROVED, VerificationReport, combine
from .syntax import LogicError, Theory
from .translation import (Reconstrual, TMap, compose_translations, identity_reconstrual, trivial_tmap,
                          verify_homotopy_equivalence, verify_translation)

LEVELS = ("logical", "definitional", "weak", "morita")
TITLES = {"logical": "logical equivalence", "definitional": "definitional equivalence",
          "weak": "weak intertranslatability", "morita": "Morita equivalence (bounded)"}


@dataclass
class Homotopy:
    """``forward : T1 -> T2``, ``backward : T2 -> T1`` and the two linking t-maps.

    A missing t-map stands for the trivial one, which exists when the sort
    images line up.
    """

    forward: Reconstrual
    backward: Reconstrual
    unit: TMap | None = None
    counit: TMap | None = None

    def tmaps(self) -> tuple:
        F, G = self.forward, self.backward
        unit = self.unit or trivial_tmap(compose_translations(F, G), identity_reconstrual(F.source), "unit")
        counit = self.counit or trivial_tmap(compose_translations(G, F), identity_reconstrual(F.target),
                                             "counit")
        return unit, counit


@dataclass
class EquivalenceCertificate:
    left: Theory
    right: Theory
    homotopy: Homotopy | None = None
    left_chain: Theory | None = None      # top of a Morita extension chain over ``left``
    right_chain: Theory | None = None
    tops: Homotopy | None = None          # definitional equivalence between the two tops
    claims: tuple = LEVELS


@dataclass
class Node:
    level: str
    verdict: str            # Proved, Failed, Unknown, implied, or unclaimed
    reason: str = ""
    report: VerificationReport | None = None


@dataclass
class Chart:
    left: str
    right: str
    nodes: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        """Combined verdict over the verified claims; implied nodes count as Proved."""
        vs = [n.verdict for n in self.nodes.values() if n.verdict != "unclaimed"]
        return combine(PROVED if v == "implied" else v for v in vs)

    def render_text(self) -> str:
        lines = [f"# equivalence chart {self.left} ~ {self.right}"]
        for k in sorted(self.meta):
            lines.append(f"# {k}: {self.meta[k]}")
        width = max(len(TITLES[lv]) for lv in LEVELS)
        for lv in reversed(LEVELS):
            n = self.nodes[lv]
            badge = {"implied": "[implied]", "unclaimed": "[unclaimed]"}.get(n.verdict, f"[verified: {n.verdict}]")
            lines.append(f"  {TITLES[lv]:{width}}  {badge}" + (f"  {n.reason}" if n.reason else ""))
            if lv != LEVELS[0]:
                lines.append(f"  {'^':>{width // 2}}")
        for lv in LEVELS:
            n = self.nodes[lv]
            if n.report is not None:
                lines.append("")
                lines.append(f"## {TITLES[lv]}")
                lines.extend(n.report.render_text(evidence=False).rstrip("\n").split("\n"))
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "title": f"equivalence chart {self.left} ~ {self.right}",
            "meta": dict(sorted(self.meta.items())),
            "levels": [{"level": lv, "verdict": self.nodes[lv].verdict, "reason": self.nodes[lv].reason,
                        "report": self.nodes[lv].report.to_dict() if self.nodes[lv].report else None}
                       for lv in LEVELS],
            "verdict": self.verdict,
        }


def _node(level: str, rep: VerificationReport) -> Node:
    bad = rep.failures()
    return Node(level, rep.verdict, f"first open obligation: {bad[0].name}" if bad else "", rep)


def _same_signature(a: Theory, b: Theory) -> bool:
    sa, sb = a.signature, b.signature
    return (set(sa.sorts) == set(sb.sorts) and set(map(_sym, sa.relations)) == set(map(_sym, sb.relations))
            and set(map(_sym, sa.functions)) == set(map(_sym, sb.functions)))


def _sym(entry) -> tuple:
    return tuple(tuple(x) if isinstance(x, (list, tuple)) else x for x in entry)


def check_logical(a: Theory, b: Theory, budget: Budget) -> Node:
    if not _same_signature(a, b):
        return Node("logical", FAILED, "the signatures differ")
    rep = VerificationReport(f"logical equivalence {a.name} ~ {b.name}")
    for src, dst in ((a, b), (b, a)):
        for ax in src.axioms:
            rep.add_result(f"{src.name}.{ax.name} in {dst.name}", ax.sequent,
                           prove_sequent(dst, ax.sequent, budget), dst.name)
    return _node("logical", rep)


def _check_homotopy(h: Homotopy, budget: Budget, strong: bool, title: str) -> VerificationReport:
    rep = VerificationReport(title)
    for F in (h.forward, h.backward):
        tr = verify_translation(F, budget)
        for e in tr.report.entries:
            # equality preservation and strongness matter for definitional equivalence only
            if strong or not e.name.startswith(("equality preserved", "strong")):
                rep.entries.append(replace(e, name=f"{F.name}: {e.name}"))
    unit, counit = h.tmaps()
    rep.extend(verify_homotopy_equivalence(h.forward, h.backward, unit, counit, budget), "homotopy: ")
    return rep


def _endpoints_ok(h: Homotopy, a: Theory, b: Theory) -> str:
    F, G = h.forward, h.backward
    if F.source.name != a.name or F.target.name != b.name:
        return f"forward translation {F.name} does not go {a.name} -> {b.name}"
    if G.source.name != b.name or G.target.name != a.name:
        return f"backward translation {G.name} does not go {b.name} -> {a.name}"
    return ""


def check_homotopy_level(level: str, h: Homotopy | None, a: Theory, b: Theory, budget: Budget) -> Node:
    if h is None:
        return Node(level, FAILED, "no translations supplied")
    bad = _endpoints_ok(h, a, b)
    if bad:
        return Node(level, FAILED, bad)
    try:
        rep = _check_homotopy(h, budget, level == "definitional", f"{TITLES[level]} {a.name} ~ {b.name}")
    except LogicError as e:
        return Node(level, FAILED, str(e))
    return _node(level, rep)


def check_morita(cert: EquivalenceCertificate, budget: Budget) -> Node:
    a, b = cert.left, cert.right
    if cert.left_chain is None and cert.right_chain is None:
        return Node("morita", FAILED, "no extension chains supplied")
    top_a, top_b = cert.left_chain or a, cert.right_chain or b
    rep = VerificationReport(f"Morita equivalence {a.name} ~ {b.name}")
    for base, top in ((a, top_a), (b, top_b)):
        if top is not base:
            rep.extend(verify_extension(base, top, budget), f"chain {base.name} -> {top.name}: ")
    if cert.tops is not None:
        h = cert.tops
    elif top_a.name == top_b.name and _same_signature(top_a, top_b):
        h = Homotopy(identity_reconstrual(top_a), identity_reconstrual(top_b))
    else:
        rep.add("tops", f"{top_a.name} ~ {top_b.name}", FAILED, "no translations between the tops supplied")
        return Node("morita", rep.verdict, "no translations between the tops supplied", rep)
    bad = _endpoints_ok(h, top_a, top_b)
    if bad:
        rep.add("tops", f"{top_a.name} ~ {top_b.name}", FAILED, bad)
        return Node("morita", FAILED, bad, rep)
    try:
        rep.extend(_check_homotopy(h, budget, True, ""), "tops: ")
    except LogicError as e:
        rep.add("tops", f"{top_a.name} ~ {top_b.name}", FAILED, str(e))
    return _node("morita", rep)


def classify_equivalence(cert: EquivalenceCertificate, budget: Budget = Budget()) -> Chart:
    """Verify each claimed standard and mark the standards implied by verified ones."""
    chart = Chart(cert.left.name, cert.right.name)
    chart.meta["budget"] = str(budget)
    for lv in LEVELS:
        if lv not in cert.claims:
            chart.nodes[lv] = Node(lv, "unclaimed")
        elif lv == "logical":
            chart.nodes[lv] = check_logical(cert.left, cert.right, budget)
        elif lv in ("definitional", "weak"):
            chart.nodes[lv] = check_homotopy_level(lv, cert.homotopy, cert.left, cert.right, budget)
        else:
            chart.nodes[lv] = check_morita(cert, budget)
    proved_below = False
    for lv in LEVELS:
        n = chart.nodes[lv]
        if n.verdict == PROVED:
            proved_below = True
        elif proved_below:
            why = n.reason or n.verdict.lower()
            upward = "weak intertranslatability" if lv == "morita" else "a lower standard"
            chart.nodes[lv] = Node(lv, "implied", f"implied by {upward}; own check: {why}", n.report)
    return chart

