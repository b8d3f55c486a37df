"""Acceptance suite: nine criteria, one PASS/FAIL line each.

Every criterion is a function returning ``(passed, report)`` where
``report`` is a deterministic text.  Criterion 9 reruns the other eight and
byte-compares the reports, together with a set of CLI invocations.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest;
under pytest the PASS/FAIL lines appear in the terminal summary.
"""

from __future__ import annotations

import os
import random
import re
import subprocess
import sys
from pathlib import Path

import pytest

from cohlogic.catlogic import (canonical_round_trip, classify_propositionality, internal_logic,
                               lattice_category, lattice_isomorphism, lindenbaum)
from cohlogic.models import check_model, enumerate_models, show_model
from cohlogic.morita import (Quotient, eliminate_coproduct, expand_model, extend_morita,
                             find_proper_realization, inclusion_translation, quotient_retraction)
from cohlogic.printer import show_sequent
from cohlogic.prover import Budget, prove_sequent
from cohlogic.syntax import Eq, Sequent, Var
from cohlogic.translation import pullback_model, verify_translation

sys.path.insert(0, str(Path(__file__).parent))
from helpers import (fixture_workspace, fo_is_model, fo_sequent_holds, random_equivalence_theory,  # noqa: E402
                     random_prop_sequent, random_prop_theory, valid_by_valuations)

GOLDEN = Path(__file__).parent / "golden"
SEED = 20261016
RESULTS: dict = {}


# ---------------------------------------------------------------- criteria


def propositional_completeness():
    """200 random propositional theories, 10 sequents each, against valuation enumeration."""
    rng = random.Random(SEED)
    budget = Budget(10, 4, 4)
    lines, disagree, unsound = [], 0, 0
    for i in range(200):
        t = random_prop_theory(rng, f"R{i}")
        n = len(t.signature.relations)
        for j in range(10):
            s = random_prop_sequent(rng, n)
            got = prove_sequent(t, s, budget).status
            valid = valid_by_valuations(t, s)
            unsound += got == "Proved" and not valid
            disagree += (got == "Proved") != valid or got == "Unknown"
            lines.append(f"{t.name}.{j} {show_sequent(s)} {got} {'valid' if valid else 'invalid'}")
    lines.append(f"disagreements {disagree}, soundness violations {unsound}")
    return disagree == 0 and unsound == 0, "\n".join(lines)


def _translation_cases():
    for fname in ("EQ.tr", "DEQ.tr", "P2.tr", "TWO.tr"):
        ws = fixture_workspace(fname, "EQ.mod", "TWO.mod")
        for name, F in ws.translations.items():
            fixtures = [m for k, m in ws.models.items() if ws.model_theory[k] == F.target.name]
            yield f"{fname}:{name}", F, fixtures
    ws = fixture_workspace("EQ_quotient.ext")
    E = inclusion_translation(ws.theory("EQ"), ws.theory("EQq"), check=False)
    yield "EQ -> EQq inclusion", E.reconstrual, []


def translation_semantics():
    """Pullbacks of target models (fixtures and all models of size <= 3) are source models."""
    lines, ok = [], True
    for label, F, fixtures in _translation_cases():
        if verify_translation(F, Budget()).is_translation != "Proved":
            lines.append(f"{label}: not a translation, skipped")
            continue
        models = fixtures + list(enumerate_models(F.target, 3))
        good = 0
        for m in models:
            assert fo_is_model(m, F.target), f"enumerator produced a non-model for {label}"
            p = pullback_model(F, m)
            holds = check_model(p, F.source)[0] and fo_is_model(p, F.source)
            good += holds
            if not holds:
                lines.append(f"{label}: pullback of {m.name} fails\n{show_model(p, F.source.name)}")
        ok &= good == len(models)
        lines.append(f"{label}: {good}/{len(models)} pullbacks are models of {F.source.name}")
    return ok, "\n".join(lines)


def quotient_homotopy():
    """EQ and two random theories with a provable equivalence, at budget (10, 4, 4)."""
    budget = Budget(10, 4, 4)
    ws = fixture_workspace("EQ_quotient.ext")
    cases = [(ws.theory("EQ"), ws.theory("EQq"))]
    rng = random.Random(SEED)
    for k in range(2):
        t, cls = random_equivalence_theory(rng, f"RAND{k}")
        res = extend_morita(t, Quotient("s", cls, "sE", "q"))
        assert res.discharge(budget).proved, f"{t.name}: class is not provably an equivalence"
        cases.append((t, res.theory))
    ok, texts = True, []
    for t, plus in cases:
        rep = quotient_retraction(t, plus).verify(budget)
        ok &= rep.count("Unknown") == 0 and rep.count("Failed") == 0
        texts.append(rep.render_text())
    return ok, "\n".join(texts)


def round_trip():
    """The canonical round trip on P2, EQ, TWO at depth 3."""
    ok, texts = True, []
    for name in ("P2", "EQ", "TWO"):
        t = fixture_workspace().theory(name)
        rep = canonical_round_trip(t, 3, Budget())
        n, unknown = len(rep.entries), rep.count("Unknown")
        ok &= rep.count("Failed") == 0 and unknown <= 0.05 * n
        if unknown:
            again = canonical_round_trip(t, 3, Budget().scaled(2))
            ok &= again.count("Unknown") == 0 and again.count("Failed") == 0
        texts.append(f"{name}: {n} obligations, {unknown} Unknown\n" + rep.render_text(evidence=False))
    return ok, "\n".join(texts)


def lattice_faithfulness():
    """The Lindenbaum lattice of a lattice's internal logic is the lattice back."""
    ws = fixture_workspace("chain2.lat", "diamond.lat", "free2.lat")
    ok, lines = True, []
    for name in ("chain2", "diamond", "free2"):
        lat = ws.lattices[name]
        lb = lindenbaum(internal_logic(lattice_category(lat, name)), 2, Budget())
        iso = lattice_isomorphism(lb, lat)
        ok &= iso is not None and not lb.laws()
        match = ", ".join(f"{k}->{v}" for k, v in iso.items()) if iso else "none"
        lines.append(f"{name}: {len(lb.elements)} classes, isomorphism {match}")
    return ok, "\n".join(lines)


def coproduct_elimination():
    """Coproduct elimination on TWO: admissibility, disjointness, and a 4-element carrier."""
    ws = fixture_workspace("TWO.mod")
    t = ws.theory("TWO")
    r = find_proper_realization(t, 2, Budget())
    if r is None:
        return False, "no proper realization found"
    res = eliminate_coproduct(t, r, "s", "s")
    rep = res.discharge(Budget(10, 8, 4))
    verdicts = {e.name: e.verdict for e in rep.entries}
    q = res.specs[2].name
    wanted = [f"{q} reflexive", f"{q} symmetric", f"{q} transitive", "coproduct disjoint"]
    big = expand_model(ws.model("canonical"), res)
    size = len(big.carriers[q])
    ok = all(verdicts.get(w) == "Proved" for w in wanted) and size == 4 and check_model(big, res.theory)[0]
    return ok, rep.render_text(evidence=False) + f"|{q}| in canonical model: {size}\n"


def propositionality_classifier():
    ws = fixture_workspace()
    budget = Budget()
    p2 = classify_propositionality(ws.theory("P2"), 2, budget)
    eq = classify_propositionality(ws.theory("EQ"), 2, budget)
    two = classify_propositionality(ws.theory("TWO"), 2, budget)
    cm = eq.countermodels.get("s")
    x, y = Var("x", "s"), Var("y", "s")
    cm_ok = (cm is not None and len(cm.carriers["s"]) == 2 and fo_is_model(cm, ws.theory("EQ"))
             and not fo_sequent_holds(cm, Sequent((), Eq(x, y))))
    ok = (p2.propositional == "Proved" and eq.propositional == "Failed" and cm_ok
          and two.propositional == "Failed" and two.parapropositional == "Proved")
    text = "\n".join(f"{n}: propositional {r.propositional}, parapropositional {r.parapropositional}"
                     for n, r in (("P2", p2), ("EQ", eq), ("TWO", two)))
    return ok, text + "\n" + (show_model(cm, "EQ") if cm is not None else "no countermodel")


def _tokens(line: str) -> list:
    return re.findall(r"\|-|\w+|[^\s\w]", line)


def morita_goldens():
    """Emitted defining sequents against the checked-in goldens, token for token."""
    ok, lines = True, []
    for path in sorted(GOLDEN.glob("*.txt")):
        golden = path.read_text().splitlines()
        header = golden[0].removeprefix("# ")
        ws = fixture_workspace()
        ws.load(header)
        res = ws.last("extension")
        emitted = [f"{d.name} : {show_sequent(d.sequent)}" for d in res.definitions]
        emitted += [f"obligation {o.name} : {show_sequent(o.sequent)}" for o in res.obligations]
        same = [_tokens(a) for a in golden[1:]] == [_tokens(b) for b in emitted]
        ok &= same
        lines.append(f"{path.name}: {'match' if same else 'MISMATCH'} ({len(emitted)} sequents)")
    return ok and len(lines) == 5, "\n".join(lines)


CLI_RUNS = [
    ["check-theory", "fixture:EQ.th", "--format", "structured"],
    ["prove", "fixture:EQ.th", "A(x,y), A(z,y) |- A(x,z)"],
    ["check-translation", "fixture:EQ.th", "fixture:EQ.tr", "--translation", "full", "--format", "structured"],
    ["quotient-retraction", "fixture:EQ.th", "fixture:EQ_quotient.ext", "--base", "EQ", "--extended", "EQq"],
    ["classify-prop", "fixture:TWO.th", "--format", "structured"],
    ["lindenbaum", "fixture:free2.lat", "--lattice", "free2"],
    ["classify-equiv", "fixture:EQ.th", "fixture:EQ_quotient.ext", "--left", "EQ", "--right", "EQq",
     "--retraction", "--left-chain", "EQq", "--format", "structured"],
]


def _cli_output(argv, hash_seed: str) -> str:
    """Run the CLI in a fresh interpreter so that set and dict hashing differ between runs."""
    env = {**os.environ, "PYTHONHASHSEED": hash_seed}
    p = subprocess.run([sys.executable, "-m", "cohlogic", *argv], capture_output=True, text=True, env=env)
    return f"$ {' '.join(argv)}\nexit {p.returncode}\n{p.stdout}{p.stderr}"


CRITERIA = {
    1: ("propositional prover completeness", propositional_completeness),
    2: ("translation semantics", translation_semantics),
    3: ("quotient homotopy", quotient_homotopy),
    4: ("round trip", round_trip),
    5: ("lattice faithfulness", lattice_faithfulness),
    6: ("coproduct elimination", coproduct_elimination),
    7: ("propositionality classifier", propositionality_classifier),
    8: ("Morita extension goldens", morita_goldens),
}


def _run(k):
    if k not in RESULTS:
        RESULTS[k] = CRITERIA[k][1]()
    return RESULTS[k]


def determinism():
    """Every suite twice in-process, and CLI runs under two hash seeds, with byte-identical reports."""
    ok, lines = True, []
    for k, (title, fn) in list(CRITERIA.items())[:8]:
        first = _run(k)[1]
        same = fn()[1] == first
        ok &= same
        lines.append(f"criterion {k} ({title}): {'identical' if same else 'DIFFERENT'}")
    for argv in CLI_RUNS:
        same = _cli_output(argv, "1") == _cli_output(argv, "2")
        ok &= same
        lines.append(f"cli {argv[0]}: {'identical' if same else 'DIFFERENT'}")
    return ok, "\n".join(lines)


CRITERIA[9] = ("determinism", determinism)
VERDICTS: dict = {}


def _line(k, passed):
    return f"{'PASS' if passed else 'FAIL'} criterion {k}: {CRITERIA[k][0]}"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    passed, report = _run(k)
    VERDICTS[k] = passed
    print(_line(k, passed))
    assert passed, report


if __name__ == "__main__":
    for k in sorted(CRITERIA):
        print(_line(k, _run(k)[0]), flush=True)
