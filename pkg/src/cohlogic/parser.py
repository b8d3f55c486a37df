"""Lexer, formula parser with sort inference, and the theory DSL.

Formulas are parsed into a raw tree first and then elaborated against a
signature: every variable gets a sort from the positions it occupies, from
``x:s`` annotations, or from the only sort of a one-sorted signature.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (And, App, Axiom, BOT, Eq, Exists, Forall, LogicError, Not, Or, Rel,
                     Sequent, Signature, Theory, TOP, Var, check_sequent)


class ParseError(LogicError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


@dataclass(frozen=True)
class Token:
    kind: str   # ident, num, sym, eof
    text: str
    line: int
    col: int


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<num>[0-9]+)
  | (?P<sym>\|-|->|=>|:=|[(){}\[\],:.&|=~*;+<>])
""", re.VERBOSE)

KEYWORDS = {"theory", "sort", "rel", "fun", "ax", "classical", "top", "bot", "exists", "forall",
            "model", "translation", "tmap", "extend", "category"}
BLOCK_KEYWORDS = {"sort", "rel", "fun", "ax"}


def tokenize(text: str) -> list:
    out, pos, line, col = [], 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line, col = line + 1, 1
        elif kind in ("ws", "comment"):
            col += m.end() - m.start()
        else:
            out.append(Token(kind, m.group(), line, col))
            col += m.end() - m.start()
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class Stream:
    def __init__(self, tokens: list):
        self.toks = tokens
        self.i = 0

    @property
    def peek(self) -> Token:
        return self.toks[self.i]

    def ahead(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek
        return t.text == text and t.kind in ("sym", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        t = self.peek
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.next()

    def ident(self, what: str = "identifier") -> Token:
        t = self.peek
        if t.kind != "ident" or t.text in KEYWORDS:
            raise ParseError(f"expected {what}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.next()

    def label(self) -> Token:
        t = self.peek
        if t.kind not in ("ident", "num"):
            raise ParseError(f"expected element label, found {t.text!r}", t.line, t.col)
        return self.next()

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.peek.line, self.peek.col)


# ---------------------------------------------------------------- raw formulas


def _raw_term(st: Stream, sig: Signature):
    t = st.ident("term")
    if st.at("("):
        st.next()
        args = []
        if not st.at(")"):
            args.append(_raw_term(st, sig))
            while st.accept(","):
                args.append(_raw_term(st, sig))
        st.expect(")")
        if not sig.has_function(t.text):
            if sig.has_relation(t.text):
                raise ParseError(f"relation {t.text} used as a term", t.line, t.col)
            raise ParseError(f"unknown function {t.text}", t.line, t.col)
        return ("app", t.text, args, t)
    if sig.has_function(t.text):
        return ("app", t.text, [], t)
    if sig.has_relation(t.text) or t.text in sig.sorts:
        raise ParseError(f"{t.text} is not a term", t.line, t.col)
    sort = None
    if st.at(":") and st.ahead().kind == "ident" and st.ahead().text in sig.sorts:
        st.next()
        sort = st.next().text
    return ("var", t.text, sort, t)


def _raw_binders(st: Stream):
    out = []
    while True:
        v = st.ident("variable")
        sort = None
        if st.accept(":"):
            sort = st.ident("sort").text
        out.append((v.text, sort, v))
        if st.accept(","):
            continue
        if st.peek.kind == "ident" and st.peek.text not in KEYWORDS:
            continue
        return out


def _raw_formula(st: Stream, sig: Signature, classical: bool):
    left = _raw_conj(st, sig, classical)
    if st.at("|") and not st.at("|-"):
        st.next()
        return ("or", left, _raw_formula(st, sig, classical))
    return left


def _raw_conj(st, sig, classical):
    left = _raw_unary(st, sig, classical)
    if st.accept("&"):
        return ("and", left, _raw_conj(st, sig, classical))
    return left


def _raw_unary(st, sig, classical):
    t = st.peek
    if t.text in ("exists", "forall") and t.kind == "ident":
        if t.text == "forall" and not classical:
            raise ParseError("universal quantifier needs classical mode", t.line, t.col)
        st.next()
        binders = _raw_binders(st)
        st.expect(".")
        body = _raw_formula(st, sig, classical)
        for name, sort, tok in reversed(binders):
            body = (t.text, name, sort, body, tok)
        return body
    if t.text == "~":
        if not classical:
            raise ParseError("negation needs classical mode", t.line, t.col)
        st.next()
        return ("not", _raw_unary(st, sig, classical))
    return _raw_atom(st, sig, classical)


def _raw_atom(st, sig, classical):
    t = st.peek
    if t.kind == "sym" and t.text == "(":
        st.next()
        f = _raw_formula(st, sig, classical)
        st.expect(")")
        return f
    if t.kind == "ident" and t.text == "top":
        st.next()
        return ("top",)
    if t.kind == "ident" and t.text == "bot":
        st.next()
        return ("bot",)
    if t.kind != "ident" or t.text in KEYWORDS:
        raise ParseError(f"expected formula, found {t.text or 'end of input'!r}", t.line, t.col)
    if sig.has_relation(t.text):
        st.next()
        args = []
        if st.accept("("):
            if not st.at(")"):
                args.append(_raw_term(st, sig))
                while st.accept(","):
                    args.append(_raw_term(st, sig))
            st.expect(")")
        return ("rel", t.text, args, t)
    unknown_call = st.ahead().text == "(" and not sig.has_function(t.text)
    if unknown_call:
        raise ParseError(f"unknown relation {t.text}", t.line, t.col)
    left = _raw_term(st, sig)
    if not st.at("="):
        if left[0] == "var":
            raise ParseError(f"unknown relation {t.text}", t.line, t.col)
        raise st.error("expected '=' after term")
    st.next()
    right = _raw_term(st, sig)
    return ("eq", left, right, t)


# ---------------------------------------------------------------- elaboration


class _Slots:
    """Union-find over variable slots carrying optional sorts."""

    def __init__(self):
        self.parent: list = []
        self.sort: list = []
        self.names: list = []

    def new(self, name: str, sort=None) -> int:
        self.parent.append(len(self.parent))
        self.sort.append(sort)
        self.names.append(name)
        return len(self.parent) - 1

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def constrain(self, i: int, sort: str, tok: Token):
        r = self.find(i)
        if self.sort[r] is None:
            self.sort[r] = sort
        elif self.sort[r] != sort:
            raise ParseError(f"variable {self.names[i]} used at sorts {self.sort[r]} and {sort}",
                             tok.line, tok.col)

    def union(self, i: int, j: int, tok: Token):
        a, b = self.find(i), self.find(j)
        if a == b:
            return
        if self.sort[a] and self.sort[b] and self.sort[a] != self.sort[b]:
            raise ParseError(f"equality between sorts {self.sort[a]} and {self.sort[b]}", tok.line, tok.col)
        self.parent[b] = a
        self.sort[a] = self.sort[a] or self.sort[b]


class Elaborator:
    """Types raw formulas; free variables are shared across calls."""

    def __init__(self, sig: Signature, fixed: dict | None = None):
        self.sig = sig
        self.slots = _Slots()
        self.free: dict = {}
        for name, sort in (fixed or {}).items():
            self.free[name] = self.slots.new(name, sort)

    def _term_sort(self, raw, env):
        kind = raw[0]
        if kind == "var":
            _, name, sort, tok = raw
            slot = env.get(name)
            if slot is None:
                slot = self.free.get(name)
                if slot is None:
                    slot = self.free[name] = self.slots.new(name)
            if sort is not None:
                self.slots.constrain(slot, sort, tok)
            return ("slot", slot)
        _, fn, args, tok = raw
        dom, cod = self.sig.fun_type(fn)
        if len(dom) != len(args):
            raise ParseError(f"function {fn} expects {len(dom)} arguments, got {len(args)}", tok.line, tok.col)
        for s, a in zip(dom, args):
            self._expect(a, s, env, tok)
        return ("sort", cod)

    def _expect(self, raw, sort, env, tok):
        got = self._term_sort(raw, env)
        if got[0] == "slot":
            self.slots.constrain(got[1], sort, tok)
        elif got[1] != sort:
            raise ParseError(f"term of sort {got[1]} where {sort} expected", tok.line, tok.col)

    def constrain(self, raw, env=None):
        env = env or {}
        kind = raw[0]
        if kind in ("top", "bot"):
            return
        if kind == "rel":
            _, name, args, tok = raw
            dom = self.sig.rel_domain(name)
            if len(dom) != len(args):
                raise ParseError(f"relation {name} expects {len(dom)} arguments, got {len(args)}",
                                 tok.line, tok.col)
            for s, a in zip(dom, args):
                self._expect(a, s, env, tok)
        elif kind == "eq":
            _, l, r, tok = raw
            a, b = self._term_sort(l, env), self._term_sort(r, env)
            if a[0] == "slot" and b[0] == "slot":
                self.slots.union(a[1], b[1], tok)
            elif a[0] == "slot":
                self.slots.constrain(a[1], b[1], tok)
            elif b[0] == "slot":
                self.slots.constrain(b[1], a[1], tok)
            elif a[1] != b[1]:
                raise ParseError(f"equality between sorts {a[1]} and {b[1]}", tok.line, tok.col)
        elif kind in ("and", "or"):
            self.constrain(raw[1], env)
            self.constrain(raw[2], env)
        elif kind == "not":
            self.constrain(raw[1], env)
        elif kind in ("exists", "forall"):
            _, name, sort, body, tok = raw
            slot = self.slots.new(name, sort)
            self.constrain(body, {**env, name: slot})
            raw_slots = self._binder_slots.setdefault(id(raw), slot)
            assert raw_slots == slot

    _binder_slots: dict

    def _sort_of(self, slot: int, tok: Token) -> str:
        s = self.slots.sort[self.slots.find(slot)]
        if s is None:
            if len(self.sig.sorts) == 1:
                return self.sig.sorts[0]
            raise ParseError(f"cannot infer sort of variable {self.slots.names[slot]}", tok.line, tok.col)
        return s

    def _build_term(self, raw, env):
        if raw[0] == "var":
            _, name, _, tok = raw
            slot = env.get(name, self.free.get(name))
            return Var(name, self._sort_of(slot, tok))
        _, fn, args, _ = raw
        dom, cod = self.sig.fun_type(fn)
        return App(fn, tuple(self._build_term(a, env) for a in args), cod)

    def build(self, raw, env=None):
        env = env or {}
        kind = raw[0]
        if kind == "top":
            return TOP
        if kind == "bot":
            return BOT
        if kind == "rel":
            return Rel(raw[1], tuple(self._build_term(a, env) for a in raw[2]))
        if kind == "eq":
            return Eq(self._build_term(raw[1], env), self._build_term(raw[2], env))
        if kind == "and":
            return And(self.build(raw[1], env), self.build(raw[2], env))
        if kind == "or":
            return Or(self.build(raw[1], env), self.build(raw[2], env))
        if kind == "not":
            return Not(self.build(raw[1], env))
        _, name, _, body, tok = raw
        slot = self._binder_slots[id(raw)]
        v = Var(name, self._sort_of(slot, tok))
        node = Exists if kind == "exists" else Forall
        return node(v, self.build(body, {**env, name: slot}))

    def elaborate(self, raws: list) -> list:
        self._binder_slots = {}
        for r in raws:
            self.constrain(r)
        return [self.build(r) for r in raws]

    def var(self, name: str) -> Var:
        slot = self.free[name]
        return Var(name, self._sort_of(slot, Token("ident", name, 0, 0)))


def read_formula_list(st: Stream, sig: Signature, classical: bool = False) -> list:
    raws = [_raw_formula(st, sig, classical)]
    while st.accept(","):
        raws.append(_raw_formula(st, sig, classical))
    return raws


def read_formula(st: Stream, sig: Signature, fixed: dict | None = None, mode: str = "coherent"):
    """Read one formula from ``st``; the caller decides what may follow it."""
    raw = _raw_formula(st, sig, mode == "classical")
    return Elaborator(sig, fixed).elaborate([raw])[0]


def parse_formula(text: str, sig: Signature, fixed: dict | None = None, mode: str = "coherent"):
    """Parse one formula over ``sig``; ``fixed`` pins sorts of named free variables."""
    st = Stream(tokenize(text))
    raw = _raw_formula(st, sig, mode == "classical")
    if st.peek.kind != "eof":
        raise st.error(f"unexpected {st.peek.text!r} after formula")
    return Elaborator(sig, fixed).elaborate([raw])[0]


def read_sequent(st: Stream, sig: Signature, mode: str = "coherent", fixed: dict | None = None) -> Sequent:
    classical = mode == "classical"
    ante = []
    if not st.at("|-"):
        ante = read_formula_list(st, sig, classical)
    st.expect("|-")
    succ = _raw_formula(st, sig, classical)
    forms = Elaborator(sig, fixed).elaborate(ante + [succ])
    s = Sequent(tuple(forms[:-1]), forms[-1])
    check_sequent(sig, s, mode)
    return s


def parse_sequent(text: str, sig: Signature, mode: str = "coherent") -> Sequent:
    """Parse ``phi1, ..., phin |- psi``."""
    st = Stream(tokenize(text))
    s = read_sequent(st, sig, mode)
    if st.peek.kind != "eof":
        raise st.error(f"unexpected {st.peek.text!r} after sequent")
    return s


# ---------------------------------------------------------------- theory blocks


def read_theory(st: Stream) -> Theory:
    st.expect("theory")
    name = st.ident("theory name").text
    mode = "classical" if st.accept("classical") else "coherent"
    st.expect("{")
    sorts, rels, funs, pending = [], [], [], []
    declared = {}

    def declare(tok):
        if tok.text in declared:
            raise ParseError(f"duplicate name {tok.text}", tok.line, tok.col)
        declared[tok.text] = tok

    while not st.at("}"):
        t = st.peek
        if st.accept("sort"):
            while st.peek.kind == "ident" and st.peek.text not in KEYWORDS:
                tok = st.next()
                declare(tok)
                sorts.append(tok.text)
        elif st.accept("rel"):
            tok = st.ident("relation name")
            declare(tok)
            dom = []
            if st.accept(":"):
                while st.peek.kind == "ident" and st.peek.text not in KEYWORDS:
                    dom.append(st.next())
            rels.append((tok, dom))
        elif st.accept("fun"):
            tok = st.ident("function name")
            declare(tok)
            st.expect(":")
            dom = []
            while st.peek.kind == "ident" and st.peek.text not in KEYWORDS:
                dom.append(st.next())
            if st.accept("->"):
                cod = st.ident("sort")
            else:
                if len(dom) != 1:
                    raise ParseError(f"function {tok.text} needs '->'", tok.line, tok.col)
                cod, dom = dom[0], []
            funs.append((tok, dom, cod))
        elif st.accept("ax"):
            tok = st.ident("axiom name")
            st.expect(":")
            start = st.i
            depth = 0
            while True:
                p = st.peek
                if p.kind == "eof":
                    raise ParseError("unterminated theory block", p.line, p.col)
                if p.kind == "sym" and p.text in "({":
                    depth += 1
                elif p.kind == "sym" and p.text in ")}":
                    if depth == 0:
                        break
                    depth -= 1
                elif depth == 0 and p.kind == "ident" and p.text in BLOCK_KEYWORDS:
                    break
                st.next()
            pending.append((tok, st.toks[start:st.i]))
        else:
            raise ParseError(f"unexpected {t.text!r} in theory {name}", t.line, t.col)
    st.expect("}")
    for tok in [d for _, d in rels] + [d + [c] for _, d, c in funs]:
        for s in tok:
            if s.text not in sorts:
                raise ParseError(f"unknown sort {s.text}", s.line, s.col)
    sig = Signature(sorts, [(t.text, [d.text for d in dom]) for t, dom in rels],
                    [(t.text, [d.text for d in dom], c.text) for t, dom, c in funs])
    axioms, seen = [], set()
    for tok, toks in pending:
        if tok.text in seen:
            raise ParseError(f"duplicate axiom name {tok.text}", tok.line, tok.col)
        seen.add(tok.text)
        sub = Stream(toks + [Token("eof", "", tok.line, tok.col)])
        seq = read_sequent(sub, sig, mode)
        if sub.peek.kind != "eof":
            raise sub.error(f"unexpected {sub.peek.text!r} in axiom {tok.text}")
        axioms.append(Axiom(tok.text, seq))
    return Theory(name, sig, tuple(axioms), mode)


def parse_theory(text: str) -> Theory:
    """Parse a single ``theory NAME { ... }`` block."""
    st = Stream(tokenize(text))
    t = read_theory(st)
    if st.peek.kind != "eof":
        raise st.error(f"unexpected {st.peek.text!r} after theory")
    return t
