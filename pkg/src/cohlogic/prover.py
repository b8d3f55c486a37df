"""Bounded forward-chaining prover for coherent sequents.

The search saturates a set of ground facts over an e-graph (union-find plus a
hash-consed function table, i.e. congruence closure).  Each axiom becomes one
rule per disjunct of its antecedent; a rule fires on every match of its body
whose head is not yet satisfied.  Single-disjunct heads are applied directly,
existential heads introduce witnesses, and disjunctive heads are split on.
A branch closes when the goal matches or ``bot`` is derived.

Calculus: the coherent sequent rules with identity, cut (implicit in forward
chaining), conjunction, disjunction and existential left/right rules, and the
equality rules (reflexivity and substitution via congruence closure).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .models import FiniteModel, check_model, find_countermodel, propositional_model, sequent_violation
from .printer import show_sequent
from .syntax import (And, App, Bot, Eq, Exists, Formula, LogicError, Or, Rel, Sequent, Theory, Top,
                     Var, check_sequent, conj, is_coherent, substitute, term_vars)


# ---------------------------------------------------------------- results


@dataclass(frozen=True)
class Budget:
    rounds: int = 10
    witnesses: int = 4
    splits: int = 4

    def __post_init__(self):
        if self.rounds < 1 or self.witnesses < 0 or self.splits < 1:
            raise ValueError("budget needs rounds >= 1, witnesses >= 0, splits >= 1")

    @classmethod
    def parse(cls, text: str) -> "Budget":
        parts = [int(p) for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError("budget is R,W,D")
        return cls(*parts)

    def scaled(self, k: int) -> "Budget":
        return Budget(self.rounds * k, self.witnesses * k, self.splits * k)

    def __str__(self) -> str:
        return f"{self.rounds},{self.witnesses},{self.splits}"


@dataclass(frozen=True)
class Step:
    index: int
    rule: str
    premises: tuple
    conclusion: str

    def __str__(self) -> str:
        prem = ",".join(str(p) for p in self.premises)
        return f"{self.index}. {self.rule} [{prem}] {self.conclusion}"


@dataclass(frozen=True)
class Proved:
    trace: tuple
    status = "Proved"

    def render(self) -> str:
        return "\n".join(str(s) for s in self.trace)


@dataclass(frozen=True)
class Refuted:
    model: FiniteModel
    status = "Refuted"


@dataclass(frozen=True)
class Unknown:
    reason: str
    bound: str
    status = "Unknown"


def replay_trace(trace) -> bool:
    """Structural replay: steps are numbered in order and cite only earlier steps."""
    for pos, step in enumerate(trace):
        if step.index != pos or any(p >= step.index or p < 0 for p in step.premises):
            return False
    return bool(trace) and trace[-1].rule in ("goal", "bot", "close", "trivial")


# ---------------------------------------------------------------- normal forms


class _Names:
    def __init__(self):
        self.n = 0

    def var(self, sort: str, tag: str = "v") -> Var:
        self.n += 1
        return Var(f"?{tag}{self.n}", sort)


def _rename_bound(f: Formula, names: _Names, env: dict) -> Formula:
    if isinstance(f, Rel):
        return Rel(f.name, tuple(_rename_term(a, env) for a in f.args))
    if isinstance(f, Eq):
        return Eq(_rename_term(f.left, env), _rename_term(f.right, env))
    if isinstance(f, (And, Or)):
        return type(f)(_rename_bound(f.left, names, env), _rename_bound(f.right, names, env))
    if isinstance(f, Exists):
        nv = names.var(f.var.sort, "e")
        return Exists(nv, _rename_bound(f.body, names, {**env, f.var: nv}))
    if isinstance(f, (Top, Bot)):
        return f
    raise LogicError("the prover handles coherent formulas only")


def _rename_term(t, env):
    if isinstance(t, Var):
        return env.get(t, t)
    return App(t.fn, tuple(_rename_term(a, env) for a in t.args), t.sort)


def dnf(f: Formula) -> list:
    """Clauses ``(evars, atoms)`` whose disjunction is ``f`` (bound names must be unique)."""
    if isinstance(f, Top):
        return [((), ())]
    if isinstance(f, Bot):
        return []
    if isinstance(f, (Rel, Eq)):
        return [((), (f,))]
    if isinstance(f, Or):
        return dnf(f.left) + dnf(f.right)
    if isinstance(f, And):
        return [(ea + eb, aa + ab) for ea, aa in dnf(f.left) for eb, ab in dnf(f.right)]
    if isinstance(f, Exists):
        return [((f.var,) + ev, at) for ev, at in dnf(f.body)]
    raise LogicError("the prover handles coherent formulas only")


def _flatten(atoms, names: _Names) -> tuple:
    """Body atoms to patterns: ('rel', R, vars), ('fn', f, vars, var), ('eq', var, var)."""
    out = []

    def term(t):
        if isinstance(t, Var):
            return t
        args = tuple(term(a) for a in t.args)
        y = names.var(t.sort, "t")
        out.append(("fn", t.fn, args, y))
        return y

    for a in atoms:
        if isinstance(a, Rel):
            out.append(("rel", a.name, tuple(term(t) for t in a.args)))
        elif isinstance(a.left, App) and isinstance(a.right, Var):
            args = tuple(term(t) for t in a.left.args)
            out.append(("fn", a.left.fn, args, a.right))
        else:
            out.append(("eq", term(a.left), term(a.right)))
    return tuple(out)


def _pattern_vars(pats) -> list:
    seen, out = set(), []
    for p in pats:
        vs = p[2] if p[0] == "rel" else (p[2] + (p[3],) if p[0] == "fn" else (p[1], p[2]))
        for v in vs:
            if v not in seen:
                seen.add(v)
                out.append(v)
    return out


@dataclass
class _Rule:
    name: str
    body: tuple          # flattened patterns
    uvars: tuple         # universally quantified variables (body vars first, then head-only)
    head: list           # list of (evars, atoms); empty list = bot; None = goal
    kind: str            # bot, horn, exists, split, goal


def _make_rules(name: str, ante: tuple, succ: Formula, names: _Names, ctx) -> list:
    body_f = conj(ante) if ante else None
    body_clauses = dnf(_rename_bound(body_f, names, {})) if body_f is not None else [((), ())]
    head = dnf(_rename_bound(succ, names, {}))
    rules = []
    for k, (evars, atoms) in enumerate(body_clauses):
        pats = _flatten(atoms, names)
        bvars = _pattern_vars(pats)
        uvars = tuple(bvars) + tuple(v for v in ctx if v not in bvars) + tuple(v for v in evars if v not in bvars)
        if not head:
            kind = "bot"
        elif any(not ev and not at for ev, at in head):
            continue   # head is trivially true
        elif len(head) == 1:
            kind = "exists" if head[0][0] else "horn"
        else:
            kind = "split"
        rname = name if len(body_clauses) == 1 else f"{name}.{k + 1}"
        rules.append(_Rule(rname, pats, uvars, head, kind))
    return rules


# ---------------------------------------------------------------- e-graph state


class _State:
    def __init__(self):
        self.parent: list = []
        self.sort: list = []
        self.label: list = []
        self.table: dict = {}     # (fn, arg roots) -> node
        self.rels: dict = {}      # name -> ordered set (dict) of root tuples -> step index
        self.term_step: dict = {}  # (fn, arg roots) -> step index
        self.goal = False
        self.bot = False
        self.witnesses = 0
        self.by_sort: dict = {}
        self.goal_made: list = []

    def copy(self) -> "_State":
        s = _State.__new__(_State)
        s.parent = list(self.parent)
        s.sort = list(self.sort)
        s.label = list(self.label)
        s.table = dict(self.table)
        s.rels = {k: dict(v) for k, v in self.rels.items()}
        s.term_step = dict(self.term_step)
        s.goal, s.bot, s.witnesses = self.goal, self.bot, self.witnesses
        s.by_sort = {}
        s.goal_made = list(self.goal_made)
        return s

    def new_node(self, sort: str, label: str) -> int:
        self.parent.append(len(self.parent))
        self.sort.append(sort)
        self.label.append(label)
        self.by_sort = {}
        return len(self.parent) - 1

    def find(self, i: int) -> int:
        p = self.parent
        while p[i] != i:
            p[i] = p[p[i]]
            i = p[i]
        return i

    def elements(self, sort: str) -> list:
        cached = self.by_sort.get(sort)
        if cached is None:
            cached = sorted({self.find(i) for i in range(len(self.parent)) if self.sort[i] == sort})
            self.by_sort[sort] = cached
        return cached

    def lookup(self, fn: str, args: tuple):
        node = self.table.get((fn, tuple(self.find(a) for a in args)))
        return None if node is None else self.find(node)

    def make(self, fn: str, args: tuple, sort: str, step: int) -> tuple:
        """Find or create the node for ``fn(args)``; returns (root, created)."""
        key = (fn, tuple(self.find(a) for a in args))
        node = self.table.get(key)
        if node is not None:
            return self.find(node), False
        label = fn if not args else f"{fn}({','.join(self.label[a] for a in key[1])})"
        node = self.new_node(sort, label)
        self.table[key] = node
        self.term_step[key] = step
        return node, True

    def merge(self, a: int, b: int) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        pending = [(a, b)]
        while pending:
            x, y = pending.pop()
            x, y = self.find(x), self.find(y)
            if x == y:
                continue
            if y < x:
                x, y = y, x
            self.parent[y] = x
            new_table, new_steps = {}, {}
            for (fn, args), node in self.table.items():
                key = (fn, tuple(self.find(u) for u in args))
                node = self.find(node)
                old = new_table.get(key)
                if old is not None and self.find(old) != node:
                    pending.append((old, node))
                else:
                    new_table[key] = node
                    new_steps.setdefault(key, self.term_step.get((fn, args), 0))
            self.table, self.term_step = new_table, new_steps
        for name, rows in self.rels.items():
            new_rows = {}
            for row, st in rows.items():
                new_rows.setdefault(tuple(self.find(u) for u in row), st)
            self.rels[name] = new_rows
        self.by_sort = {}
        return True

    def has_rel(self, name: str, row: tuple) -> bool:
        return tuple(self.find(u) for u in row) in self.rels.get(name, {})

    def add_rel(self, name: str, row: tuple, step: int) -> bool:
        key = tuple(self.find(u) for u in row)
        rows = self.rels.setdefault(name, {})
        if key in rows:
            return False
        rows[key] = step
        return True


# ---------------------------------------------------------------- matching


def _match(state: _State, pats: tuple, env: dict, uvars: tuple, create: tuple | None = None):
    """Yield (bindings, premise steps) for body patterns, then enumerate unbound uvars.

    With ``create = (step, blocked)``, an application whose arguments are
    bound but which has no node yet is built on the spot; functions are total,
    so the term denotes.  Arguments in ``blocked`` were themselves built this
    way and are not extended further, which keeps saturation finite.
    """
    todo = list(pats)

    def cost(p, env):
        if p[0] == "eq":
            bound = (p[1] in env) + (p[2] in env)
            return 0 if bound else 100
        if p[0] == "fn":
            if all(a in env for a in p[2]):
                return 1
            return 10 + len(state.table)
        return 10 + len(state.rels.get(p[1], ()))

    def rec(todo, env, prem):
        if not todo:
            yield from enum_rest(env, prem)
            return
        best = min(range(len(todo)), key=lambda i: cost(todo[i], env))
        p = todo[best]
        rest = todo[:best] + todo[best + 1:]
        if p[0] == "eq":
            a, b = p[1], p[2]
            if a in env and b in env:
                if state.find(env[a]) == state.find(env[b]):
                    yield from rec(rest, env, prem)
            elif a in env:
                yield from rec(rest, {**env, b: state.find(env[a])}, prem)
            elif b in env:
                yield from rec(rest, {**env, a: state.find(env[b])}, prem)
            else:
                for e in state.elements(a.sort):
                    yield from rec(rest, {**env, a: e, b: e}, prem)
        elif p[0] == "fn":
            fn, args, res = p[1], p[2], p[3]
            if all(a in env for a in args):
                key = (fn, tuple(state.find(env[a]) for a in args))
                node = state.table.get(key)
                if node is None:
                    if create is None or res in env or any(a in create[1] for a in key[1]):
                        return
                    node, _ = state.make(fn, key[1], res.sort, create[0])
                    state.goal_made.append(node)
                node = state.find(node)
                if res in env:
                    if state.find(env[res]) != node:
                        return
                    yield from rec(rest, env, prem + (state.term_step.get(key, 0),))
                else:
                    yield from rec(rest, {**env, res: node}, prem + (state.term_step.get(key, 0),))
                return
            for key, node in list(state.table.items()):
                if key[0] != fn:
                    continue
                new = _unify(state, args + (res,), key[1] + (node,), env)
                if new is not None:
                    yield from rec(rest, new, prem + (state.term_step.get(key, 0),))
            if create is not None:
                free = [a for a in dict.fromkeys(args) if a not in env]
                for vals in itertools.product(*(state.elements(a.sort) for a in free)):
                    yield from rec(todo, {**env, **dict(zip(free, vals))}, prem)
        else:
            for row, st in list(state.rels.get(p[1], {}).items()):
                new = _unify(state, p[2], row, env)
                if new is not None:
                    yield from rec(rest, new, prem + (st,))

    def enum_rest(env, prem):
        free = [v for v in uvars if v not in env]
        if not free:
            yield env, prem
            return
        pools = [state.elements(v.sort) for v in free]
        for vals in itertools.product(*pools):
            yield {**env, **dict(zip(free, vals))}, prem

    yield from rec(todo, env, ())


def _unify(state, pvars, row, env):
    new = dict(env)
    for v, val in zip(pvars, row):
        val = state.find(val)
        have = new.get(v)
        if have is None:
            new[v] = val
        elif state.find(have) != val:
            return None
    return new


def _eval_term(state: _State, t, env):
    if isinstance(t, Var):
        return state.find(env[t])
    args = []
    for a in t.args:
        v = _eval_term(state, a, env)
        if v is None:
            return None
        args.append(v)
    return state.lookup(t.fn, tuple(args))


def _atom_true(state: _State, a, env) -> bool:
    if isinstance(a, Rel):
        vals = [_eval_term(state, t, env) for t in a.args]
        return None not in vals and state.has_rel(a.name, tuple(vals))
    l, r = _eval_term(state, a.left, env), _eval_term(state, a.right, env)
    return l is not None and l == r


def _clause_satisfied(state: _State, clause, env) -> bool:
    evars, atoms = clause
    if not evars:
        return all(_atom_true(state, a, env) for a in atoms)

    def rec(i, env):
        if i == len(evars):
            return all(_atom_true(state, a, env) for a in atoms)
        return any(rec(i + 1, {**env, evars[i]: e}) for e in state.elements(evars[i].sort))

    return rec(0, env)


# ---------------------------------------------------------------- search


class _Search:
    def __init__(self, rules: list, goals: list, budget: Budget, functions=()):
        self.functions = tuple(functions)
        self.rules = rules
        self.goals = goals
        self.budget = budget
        self.trace: list = []
        self.incomplete = ""

    def emit(self, rule: str, premises, conclusion: str) -> int:
        idx = len(self.trace)
        self.trace.append(Step(idx, rule, tuple(sorted(set(p for p in premises if p < idx))), conclusion))
        return idx

    def show_atom(self, state, a, env) -> str:
        def term(t):
            if isinstance(t, Var):
                return state.label[state.find(env[t])]
            if not t.args:
                node = state.lookup(t.fn, ())
                return t.fn if node is None else state.label[node]
            return f"{t.fn}({','.join(term(x) for x in t.args)})"

        if isinstance(a, Rel):
            return a.name if not a.args else f"{a.name}({','.join(term(t) for t in a.args)})"
        return f"{term(a.left)} = {term(a.right)}"

    def build(self, state, t, env, step):
        if isinstance(t, Var):
            return state.find(env[t])
        args = tuple(self.build(state, a, env, step) for a in t.args)
        node, _ = state.make(t.fn, args, t.sort, step)
        return node

    def assert_clause(self, state: _State, clause, env, rule: str, premises) -> bool:
        """Assert ``clause`` under ``env`` (creating witnesses); returns True if anything changed."""
        evars, atoms = clause
        env = dict(env)
        changed = False
        for v in evars:
            state.witnesses += 1
            env[v] = state.new_node(v.sort, f"w{state.witnesses}")
            changed = True
        text = " & ".join(self.show_atom(state, a, env) for a in atoms) if atoms else "top"
        if evars:
            text = f"exists {','.join(state.label[env[v]] for v in evars)} . {text}"
        step = len(self.trace)
        for a in atoms:
            if isinstance(a, Rel):
                row = tuple(self.build(state, t, env, step) for t in a.args)
                changed |= state.add_rel(a.name, row, step)
            else:
                n0 = len(state.parent)
                l = self.build(state, a.left, env, step)
                r = self.build(state, a.right, env, step)
                changed |= state.merge(l, r) or len(state.parent) != n0
        if changed:
            self.emit(rule, premises, text)
        return changed

    def goal_reached(self, state: _State) -> bool:
        for pats, uvars, name in self.goals:
            for env, prem in _match(state, pats, {}, uvars):
                self.emit("goal", prem, name)
                state.goal = True
                return True
        return False

    def goal_terms(self, state: _State) -> bool:
        """Build the applications a goal needs; True if the goal now matches or a term was built."""
        n0 = len(state.parent)
        step = len(self.trace)
        blocked = {state.find(n) for n in state.goal_made}
        for pats, uvars, name in self.goals:
            for env, prem in _match(state, pats, {}, uvars, create=(step, blocked)):
                self.emit("terms", (), f"applications for {name}")
                self.emit("goal", prem + (step,), name)
                state.goal = True
                return True
        if len(state.parent) != n0:
            self.emit("terms", (), "applications for the goal")
            return True
        return False

    def complete_tables(self, state: _State) -> bool:
        """Add every missing application over the current elements; True if any was missing."""
        step = len(self.trace)
        made = []
        for fn, dom, cod in self.functions:
            for args in itertools.product(*(state.elements(s) for s in dom)):
                if state.lookup(fn, args) is None:
                    node, _ = state.make(fn, args, cod, step)
                    made.append(node)
        if made:
            self.emit("terms", (), f"{len(made)} applications to complete the function tables")
        return bool(made)

    def horn_pass(self, state: _State) -> bool:
        changed = False
        for rule in self.rules:
            if rule.kind not in ("horn", "bot"):
                continue
            for env, prem in list(_match(state, rule.body, {}, rule.uvars)):
                if rule.kind == "bot":
                    self.emit("bot", prem, f"bot by {rule.name}")
                    state.bot = True
                    return True
                clause = rule.head[0]
                if _clause_satisfied(state, clause, env):
                    continue
                changed |= self.assert_clause(state, clause, env, f"ax:{rule.name}", prem)
        return changed

    def first_pending(self, state: _State, kind: str):
        for rule in self.rules:
            if rule.kind != kind:
                continue
            for env, prem in _match(state, rule.body, {}, rule.uvars):
                if not any(_clause_satisfied(state, c, env) for c in rule.head):
                    return rule, env, prem
        return None

    def run(self, state: _State, splits_left: int):
        """Return ('closed', None), ('open', state) or ('unknown', reason)."""
        rounds = 0
        while True:
            if state.goal or state.bot or self.goal_reached(state):
                return "closed", None
            if rounds >= self.budget.rounds:
                return "unknown", f"round bound {self.budget.rounds} reached"
            rounds += 1
            if self.horn_pass(state):
                continue
            if state.goal or state.bot:
                return "closed", None
            if self.goal_terms(state):
                continue
            pending = self.first_pending(state, "exists")
            blocked = ""
            if pending is not None:
                rule, env, prem = pending
                need = len(rule.head[0][0])
                if state.witnesses + need <= self.budget.witnesses:
                    self.assert_clause(state, rule.head[0], env, f"ax:{rule.name}", prem)
                    continue
                blocked = f"witness bound {self.budget.witnesses} reached"
            pending = self.first_pending(state, "split")
            if pending is None:
                if blocked:
                    return "unknown", blocked
                if self.complete_tables(state):
                    continue
                return "open", state
            if splits_left <= 0:
                return "unknown", f"split bound {self.budget.splits} reached"
            rule, env, prem = pending
            split_step = self.emit(f"split:{rule.name}", prem,
                                   " | ".join(self._clause_text(state, c, env) for c in rule.head))
            for k, clause in enumerate(rule.head):
                child = state.copy()
                self.emit(f"case {k + 1}", (split_step,), self._clause_text(child, clause, env))
                if clause[0] and child.witnesses + len(clause[0]) > self.budget.witnesses:
                    return "unknown", f"witness bound {self.budget.witnesses} reached"
                self.assert_clause(child, clause, env, f"case {k + 1}", (split_step,))
                verdict, info = self.run(child, splits_left - 1)
                if verdict != "closed":
                    return verdict, info
            self.emit("close", (split_step,), f"all cases of {rule.name} closed")
            return "closed", None

    def _clause_text(self, state, clause, env) -> str:
        evars, atoms = clause
        inner = dict(env)
        for i, v in enumerate(evars):
            inner.setdefault(v, None)
        parts = []
        for a in atoms:
            if any(isinstance(t, Var) and inner.get(t) is None for t in _atom_vars(a)):
                parts.append("...")
            else:
                parts.append(self.show_atom(state, a, inner))
        body = " & ".join(parts) if parts else "top"
        return f"exists {len(evars)} . {body}" if evars else body


def _ground_terms(f: Formula) -> list:
    """Variable-free application terms of ``f`` (they denote, since functions are total)."""
    out = []

    def term(t):
        if isinstance(t, App):
            if not any(True for _ in term_vars(t)):
                out.append(t)
            else:
                for a in t.args:
                    term(a)

    def walk(g):
        if isinstance(g, Rel):
            for a in g.args:
                term(a)
        elif isinstance(g, Eq):
            term(g.left)
            term(g.right)
        elif isinstance(g, (And, Or)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, Exists):
            walk(g.body)

    walk(f)
    return out


def _atom_vars(a):
    terms = a.args if isinstance(a, Rel) else (a.left, a.right)
    return [v for t in terms for v in term_vars(t)]


# ---------------------------------------------------------------- entry points


def _state_to_model(state: _State, theory: Theory):
    sig = theory.signature
    roots = sorted({state.find(i) for i in range(len(state.parent))})
    labels, carriers, by_label = {}, {}, {}
    for s in sig.sorts:
        elems = [r for r in roots if state.sort[r] == s]
        carriers[s] = tuple(str(i) for i in range(len(elems)))
        for i, r in enumerate(elems):
            labels[r] = str(i)
            by_label[(s, str(i))] = r
    rels = {}
    for n, _ in sig.relations:
        rels[n] = frozenset(tuple(labels[u] for u in row) for row in state.rels.get(n, {}))
    funs = {}
    for n, dom, cod in sig.functions:
        table = {}
        for args in itertools.product(*(carriers[s] for s in dom)):
            node = state.lookup(n, tuple(by_label[(s, a)] for a, s in zip(args, dom)))
            if node is None:
                return None, labels
            table[args] = labels[node]
        funs[n] = table
    try:
        return FiniteModel(sig, carriers, rels, funs, "countermodel"), labels
    except LogicError:
        return None, labels


def prove_sequent(theory: Theory, seq: Sequent, budget: Budget = Budget(),
                  countermodel_size: int = 2, countermodel_limit: int = 20000):
    """Bounded proof search; returns ``Proved``, ``Refuted`` or ``Unknown``."""
    try:
        check_sequent(theory.signature, seq, "coherent")
    except LogicError as e:
        raise LogicError(f"sequent not over theory {theory.name}: {e}") from None
    if theory.mode != "coherent" or not all(is_coherent(f) for f in (*seq.antecedent, seq.succedent)):
        raise LogicError("proof search is coherent only")

    names = _Names()
    rules = []
    for ax in theory.axioms:
        rules.extend(_make_rules(ax.name, ax.sequent.antecedent, ax.sequent.succedent, names,
                                 tuple(ax.sequent.context())))
    order = {"bot": 0, "horn": 1, "exists": 2, "split": 3}
    # triggered existentials before unconditional ones, which are always pending
    rules.sort(key=lambda r: (order[r.kind], not r.body))

    ctx = seq.context()
    eigen = {v: App("!" + v.name, (), v.sort) for v in ctx}

    def close(f):
        return substitute(f, list(eigen), list(eigen.values()))

    goal_f = _rename_bound(close(seq.succedent), names, {})
    goal_clauses = dnf(goal_f)
    goals = []
    for k, (evars, atoms) in enumerate(goal_clauses):
        pats = _flatten(atoms, names)
        bvars = _pattern_vars(pats)
        uvars = tuple(bvars) + tuple(v for v in evars if v not in bvars)
        goals.append((pats, uvars, "goal" if len(goal_clauses) == 1 else f"goal disjunct {k + 1}"))

    ante = tuple(close(a) for a in seq.antecedent)
    if ante:
        body = ante[0]
        for a in ante[1:]:
            body = And(body, a)
        ante_clauses = dnf(_rename_bound(body, names, {}))
    else:
        ante_clauses = [((), ())]

    search = _Search(rules, goals, budget, theory.signature.functions)
    if not ante_clauses:
        search.emit("trivial", (), "antecedent is bot")
        return Proved(tuple(search.trace))
    if any(not ev and not at for ev, at in goal_clauses):
        search.emit("trivial", (), "succedent is top")
        return Proved(tuple(search.trace))

    def attempt(b: Budget):
        """Run every antecedent case under ``b``: ('proved', trace), ('refuted', model) or ('unknown', reason)."""
        search = _Search(rules, goals, b, theory.signature.functions)
        for k, (evars, atoms) in enumerate(ante_clauses):
            state = _State()
            start = search.emit("assume" if len(ante_clauses) == 1 else f"assume case {k + 1}", (),
                                show_sequent(seq))
            env = {}
            for v in ctx:
                node, _ = state.make("!" + v.name, (), v.sort, start)
                state.label[node] = v.name
            for n, dom, cod in theory.signature.functions:
                if not dom:
                    state.make(n, (), cod, start)
            for f in (*ante, goal_f):
                for t in _ground_terms(f):
                    search.build(state, t, {}, start)
            for v in evars:
                env[v] = state.new_node(v.sort, f"e{len(env) + 1}")
            for a in atoms:
                search.assert_clause(state, ((), (a,)), env, "hyp", (start,))
            verdict, info = search.run(state, b.splits)
            if verdict == "closed":
                continue
            if verdict == "open":
                model, _ = _state_to_model(info, theory)
                if model is not None and check_model(model, theory, first_only=True)[0] \
                        and sequent_violation(model, seq) is not None:
                    return "refuted", model
                return "unknown", "saturated branch without a total finite model"
            return "unknown", info
        return "proved", tuple(search.trace)

    # The choice between a witness and a case split depends on the witness
    # bound, so every smaller bound is tried too; this keeps the result
    # monotone in the budget.  Rounds and splits only act as cut-offs.
    reason = ""
    for w in [budget.witnesses] + list(range(budget.witnesses)):
        verdict, info = attempt(Budget(budget.rounds, w, budget.splits))
        if verdict == "proved":
            return Proved(info)
        if verdict == "refuted":
            return Refuted(info)
        reason = reason or info
    return _fallback(theory, seq, reason, budget, countermodel_size, countermodel_limit)


def _fallback(theory, seq, reason, budget, size, limit):
    if theory.signature.is_propositional():
        if not decide_propositional(theory, seq):
            return Refuted(_valuation_countermodel(theory, seq))
        return Unknown(reason, f"budget {budget}")
    if size > 0:
        m = find_countermodel(theory, seq, size, limit=limit)
        if m is not None:
            return Refuted(m)
    return Unknown(reason, f"budget {budget}; no countermodel up to size {size}")


# ---------------------------------------------------------------- propositional decision


def _propositional_check(theory: Theory, seq: Sequent) -> None:
    sig = theory.signature
    if sig.sorts or sig.functions:
        raise LogicError("decide_propositional needs a sort-free signature")
    for f in (*seq.antecedent, seq.succedent):
        if not is_coherent(f):
            raise LogicError("decide_propositional handles coherent formulas only")
    if seq.context():
        raise LogicError("decide_propositional: variables are not allowed")


def _valuations(theory: Theory):
    props = [n for n, _ in theory.signature.relations]
    for bits in itertools.product((False, True), repeat=len(props)):
        yield propositional_model(theory.signature, [p for p, b in zip(props, bits) if b])


def decide_propositional(theory: Theory, seq: Sequent) -> bool:
    """True iff every valuation satisfying the axioms satisfies ``seq``."""
    _propositional_check(theory, seq)
    for m in _valuations(theory):
        if check_model(m, theory, first_only=True)[0] and sequent_violation(m, seq) is not None:
            return False
    return True


def _valuation_countermodel(theory: Theory, seq: Sequent):
    for m in _valuations(theory):
        if check_model(m, theory, first_only=True)[0] and sequent_violation(m, seq) is not None:
            return m
    return None


def bi_entails(theory: Theory, a: Formula, b: Formula, budget: Budget = Budget(), **kw) -> tuple:
    """Results of ``a |- b`` and ``b |- a``."""
    return (prove_sequent(theory, Sequent((a,), b), budget, **kw),
            prove_sequent(theory, Sequent((b,), a), budget, **kw))
