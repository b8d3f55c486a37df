"""Verification reports: named obligations with three-valued verdicts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .models import show_model
from .printer import show_sequent

VERSION = "0.1.0"

PROVED, FAILED, UNKNOWN = "Proved", "Failed", "Unknown"


def verdict_of(result) -> str:
    """Map a prover result to a report verdict."""
    return {"Proved": PROVED, "Refuted": FAILED, "Unknown": UNKNOWN}[result.status]


def combine(verdicts) -> str:
    verdicts = list(verdicts)
    if all(v == PROVED for v in verdicts):
        return PROVED
    if any(v == FAILED for v in verdicts):
        return FAILED
    return UNKNOWN


@dataclass
class Entry:
    name: str
    statement: str
    verdict: str
    evidence: str = ""
    result: object = field(default=None, repr=False, compare=False)


@dataclass
class VerificationReport:
    title: str
    entries: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return combine(e.verdict for e in self.entries)

    @property
    def proved(self) -> bool:
        return self.verdict == PROVED

    def add_result(self, name: str, sequent, result, theory_name: str = "T") -> Entry:
        if result.status == "Proved":
            evidence = result.render()
        elif result.status == "Refuted":
            evidence = show_model(result.model, theory_name)
        else:
            evidence = f"{result.reason}; {result.bound}"
        e = Entry(name, show_sequent(sequent), verdict_of(result), evidence, result)
        self.entries.append(e)
        return e

    def add(self, name: str, statement: str, verdict: str, evidence: str = "") -> Entry:
        e = Entry(name, statement, verdict, evidence)
        self.entries.append(e)
        return e

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for e in other.entries:
            self.entries.append(Entry(prefix + e.name, e.statement, e.verdict, e.evidence, e.result))
        self.notes.extend(other.notes)

    def failures(self) -> list:
        return [e for e in self.entries if e.verdict != PROVED]

    def count(self, verdict: str) -> int:
        return sum(1 for e in self.entries if e.verdict == verdict)

    def render_text(self, evidence: bool = True) -> str:
        lines = [f"# {self.title}"]
        for k in sorted(self.meta):
            lines.append(f"# {k}: {self.meta[k]}")
        for e in self.entries:
            lines.append(f"{e.verdict:8} {e.name}: {e.statement}")
            if evidence and e.evidence and e.verdict != PROVED:
                lines.extend("    " + ln for ln in e.evidence.rstrip("\n").split("\n"))
        for n in self.notes:
            lines.append(f"note: {n}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "meta": dict(sorted(self.meta.items())),
            "obligations": [{"name": e.name, "sequent": e.statement, "verdict": e.verdict,
                             "evidence": e.evidence} for e in self.entries],
            "notes": list(self.notes),
            "verdict": self.verdict,
        }

    def render_structured(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
