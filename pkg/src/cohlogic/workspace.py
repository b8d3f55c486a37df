"""Multi-block input files.

A workspace file holds any sequence of ``theory``, ``model``, ``translation``,
``tmap``, ``extend``, ``category`` and ``lattice`` blocks.  Later blocks may
refer to names introduced by earlier ones, and several files can be loaded
into one workspace in order.

Translations are referenced by name, by ``id(T)``, or by a composite
``G.F`` meaning "first F, then G".
"""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path

from .catlogic import read_category, read_lattice
from .models import read_model
from .morita import (Coproduct, Definitional, Product, Quotient, Subsort, Terminal, extend_chain,
                     extend_morita)
from .parser import ParseError, Stream, Token, read_formula, read_theory, tokenize
from .syntax import LogicError, Rel, Signature, Theory, Top, Var
from .translation import (Image, SortImage, compose_translations, identity_reconstrual, make_reconstrual,
                          make_tmap, param_vars)

_ENTRY_KINDS = ("sort", "rel", "fun", "eq")
_SPEC_KINDS = ("quotient", "subsort", "product", "coproduct", "terminal", "define")


class Workspace:
    """Named theories, models, translations, t-maps, extensions, categories and lattices."""

    def __init__(self):
        self.theories: dict = {}
        self.models: dict = {}
        self.model_theory: dict = {}
        self.translations: dict = {}
        self.tmaps: dict = {}
        self.extensions: dict = {}
        self.categories: dict = {}
        self.lattices: dict = {}
        self.order: list = []          # (kind, name) in declaration order

    # ------------------------------------------------------------ loading

    def load_file(self, path) -> "Workspace":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            raise ParseError(f"{path}: {e.strerror}") from None
        try:
            return self.load(text)
        except ParseError as e:
            raise ParseError(f"{path}:{e}") from None

    def load(self, text: str) -> "Workspace":
        st = Stream(tokenize(text))
        while st.peek.kind != "eof":
            t = st.peek
            if st.at("theory"):
                th = read_theory(st)
                self._put(self.theories, "theory", th.name, th, t)
            elif st.at("model"):
                m, tname = read_model(st, self.theories)
                self._put(self.models, "model", m.name, m, t)
                self.model_theory[m.name] = tname
            elif st.at("translation"):
                F = self._read_translation(st)
                self._put(self.translations, "translation", F.name, F, t)
            elif st.at("tmap"):
                chi = self._read_tmap(st)
                self._put(self.tmaps, "tmap", chi.name, chi, t)
            elif st.at("extend"):
                res = self._read_extend(st)
                self._put(self.extensions, "extension", res.theory.name, res, t)
                self._put(self.theories, "theory", res.theory.name, res.theory, t)
            elif st.at("category"):
                c = read_category(st)
                self._put(self.categories, "category", c.name, c, t)
            elif st.at("lattice"):
                name, lat = read_lattice(st)
                self._put(self.lattices, "lattice", name, lat, t)
            else:
                raise ParseError(f"expected a block keyword, found {t.text!r}", t.line, t.col)
        return self

    def _put(self, table: dict, kind: str, name: str, value, tok: Token):
        if name in table:
            raise ParseError(f"duplicate {kind} {name}", tok.line, tok.col)
        table[name] = value
        self.order.append((kind, name))

    # ------------------------------------------------------------ lookups

    def theory(self, name: str) -> Theory:
        if name not in self.theories:
            raise LogicError(f"unknown theory {name}")
        return self.theories[name]

    def model(self, name: str):
        if name not in self.models:
            raise LogicError(f"unknown model {name}")
        return self.models[name]

    def tmap(self, name: str):
        if name not in self.tmaps:
            raise LogicError(f"unknown t-map {name}")
        return self.tmaps[name]

    def translation(self, ref: str):
        st = Stream(tokenize(ref))
        F = self._read_reference(st)
        if st.peek.kind != "eof":
            raise st.error(f"unexpected {st.peek.text!r} in translation reference")
        return F

    def single(self, kind: str, name: str | None = None):
        """The named entry, or the only entry of its kind."""
        table = {"theory": self.theories, "model": self.models, "translation": self.translations,
                 "tmap": self.tmaps, "extension": self.extensions, "category": self.categories,
                 "lattice": self.lattices}[kind]
        if name is not None:
            if name not in table:
                raise LogicError(f"unknown {kind} {name}")
            return table[name]
        if len(table) != 1:
            found = ", ".join(table) or "none"
            raise LogicError(f"expected exactly one {kind}, found {found}; name one explicitly")
        return next(iter(table.values()))

    def last(self, kind: str):
        names = [n for k, n in self.order if k == kind]
        if not names:
            raise LogicError(f"no {kind} given")
        return self.single(kind, names[-1])

    # ------------------------------------------------------------ translations

    def _read_reference(self, st: Stream):
        """``NAME``, ``id(T)`` or ``G.F`` (F first)."""
        parts = [self._read_atom_reference(st)]
        while st.accept("."):
            parts.append(self._read_atom_reference(st))
        F = parts[-1]
        for G in reversed(parts[:-1]):
            if F.target.name != G.source.name:
                raise LogicError(f"cannot compose {G.name} after {F.name}: "
                                 f"{F.target.name} is not {G.source.name}")
            F = compose_translations(F, G, f"{G.name}.{F.name}")
        return F

    def _read_atom_reference(self, st: Stream):
        tok = st.ident("translation name")
        if tok.text == "id" and st.accept("("):
            t = self.theory(st.ident("theory name").text)
            st.expect(")")
            return identity_reconstrual(t)
        if tok.text not in self.translations:
            raise ParseError(f"unknown translation {tok.text}", tok.line, tok.col)
        return self.translations[tok.text]

    def _read_translation(self, st: Stream):
        st.expect("translation")
        name = st.ident("translation name").text
        st.expect(":")
        source = self._theory_ref(st)
        st.expect("->")
        target = self._theory_ref(st)
        st.expect("{")
        entries = self._entries(st)
        sorts, rels, funs, eqls = {}, {}, {}, {}
        for kind, sym, toks in entries:
            if kind != "sort":
                continue
            if sym.text not in source.signature.sorts:
                raise ParseError(f"{sym.text} is not a sort of {source.name}", sym.line, sym.col)
            sorts[sym.text] = self._sort_image(Stream(toks), target, sym)
        # images of other symbols are typed by the sort images
        base = make_reconstrual(f"{name}_sorts", _sorts_only(source), target, sorts)
        for kind, sym, toks in entries:
            sub = Stream(toks)
            sig = source.signature
            if kind == "rel":
                if not sig.has_relation(sym.text):
                    raise ParseError(f"{sym.text} is not a relation of {source.name}", sym.line, sym.col)
                rels[sym.text] = self._image(sub, target, base.sort_list(sig.rel_domain(sym.text)))
            elif kind == "fun":
                if not sig.has_function(sym.text):
                    raise ParseError(f"{sym.text} is not a function of {source.name}", sym.line, sym.col)
                dom, cod = sig.fun_type(sym.text)
                funs[sym.text] = self._image(sub, target, base.sort_list(tuple(dom) + (cod,)))
            elif kind == "eq":
                if sym.text not in sig.sorts:
                    raise ParseError(f"{sym.text} is not a sort of {source.name}", sym.line, sym.col)
                eqls[sym.text] = self._image(sub, target, base.sort_list((sym.text, sym.text)))
        return make_reconstrual(name, source, target, sorts, rels, funs, eqls)

    def _theory_ref(self, st: Stream) -> Theory:
        tok = st.ident("theory name")
        if tok.text not in self.theories:
            raise ParseError(f"unknown theory {tok.text}", tok.line, tok.col)
        return self.theories[tok.text]

    def _entries(self, st: Stream) -> list:
        """Split a block body into ``(kind, symbol, tokens)`` entries; consumes the closing brace."""
        out = []
        while not st.accept("}"):
            t = st.peek
            if not (t.text in _ENTRY_KINDS and st.ahead(2).text == "=>"):
                raise ParseError(f"expected sort, rel, fun or eq entry, found {t.text!r}", t.line, t.col)
            kind = st.next().text
            sym = st.next()
            st.expect("=>")
            start, depth = st.i, 0
            while True:
                p = st.peek
                if p.kind == "eof":
                    raise ParseError("unterminated block", p.line, p.col)
                if p.kind == "sym" and p.text in "({[":
                    depth += 1
                elif p.kind == "sym" and p.text in ")}]":
                    if depth == 0:
                        break
                    depth -= 1
                elif depth == 0 and p.text in _ENTRY_KINDS and st.ahead(2).text == "=>":
                    break
                st.next()
            out.append((kind, sym, st.toks[start:st.i] + [Token("eof", "", p.line, p.col)]))
        return out

    def _sort_image(self, st: Stream, target: Theory, sym: Token) -> SortImage:
        sorts = []
        if st.accept("("):
            if not st.at(")"):
                sorts.append(st.ident("sort").text)
                while st.accept(","):
                    sorts.append(st.ident("sort").text)
            st.expect(")")
        else:
            sorts.append(st.ident("sort").text)
        for s in sorts:
            if s not in target.signature.sorts:
                raise ParseError(f"{s} is not a sort of {target.name}", sym.line, sym.col)
        if st.accept("with"):
            img = self._image(st, target, tuple(sorts))
            return SortImage(tuple(sorts), img.params, img.formula)
        self._end(st)
        return SortImage(tuple(sorts), param_vars(sorts, "x"), Top())

    def _image(self, st: Stream, target: Theory, sorts) -> Image:
        """``name(x1,...,xn) := formula`` with the parameters typed by ``sorts``."""
        st.ident("image name")
        params = self._params(st)
        if len(params) != len(sorts):
            t = st.peek
            raise ParseError(f"expected {len(sorts)} parameters, found {len(params)}", t.line, t.col)
        st.expect(":=")
        ps = tuple(Var(p.text, s) for p, s in zip(params, sorts))
        phi = read_formula(st, target.signature, {p.name: p.sort for p in ps}, target.mode)
        self._end(st)
        return Image(ps, phi)

    @staticmethod
    def _params(st: Stream) -> list:
        st.expect("(")
        out = []
        if not st.at(")"):
            out.append(st.ident("parameter"))
            while st.accept(","):
                out.append(st.ident("parameter"))
        st.expect(")")
        names = [p.text for p in out]
        for k, p in enumerate(out):
            if p.text in names[:k]:
                raise ParseError(f"repeated parameter {p.text}", p.line, p.col)
        return out

    @staticmethod
    def _end(st: Stream):
        if st.peek.kind != "eof":
            raise st.error(f"unexpected {st.peek.text!r}")

    # ------------------------------------------------------------ t-maps

    def _read_tmap(self, st: Stream):
        st.expect("tmap")
        name = st.ident("t-map name").text
        st.expect(":")
        F = self._read_reference(st)
        st.expect("=>")
        G = self._read_reference(st)
        st.expect("{")
        comps = {}
        for kind, sym, toks in self._entries(st):
            if kind != "sort" or sym.text not in F.source.signature.sorts:
                raise ParseError("t-map entries are 'sort s => chi(x|y) := ...'", sym.line, sym.col)
            sub = Stream(toks)
            sub.ident("component name")
            sub.expect("(")
            left, right = self._names_until(sub, "|"), None
            sub.expect("|")
            right = self._names_until(sub, ")")
            sub.expect(")")
            sub.expect(":=")
            fs, gs = F.sorts[sym.text].sorts, G.sorts[sym.text].sorts
            if len(left) != len(fs) or len(right) != len(gs):
                raise ParseError(f"component {sym.text} needs {len(fs)}|{len(gs)} parameters",
                                 sym.line, sym.col)
            ps = tuple(Var(n, s) for n, s in zip(left + right, fs + gs))
            if len({p.name for p in ps}) != len(ps):
                raise ParseError(f"repeated parameter in component {sym.text}", sym.line, sym.col)
            T2 = F.target
            phi = read_formula(sub, T2.signature, {p.name: p.sort for p in ps}, T2.mode)
            self._end(sub)
            comps[sym.text] = Image(ps, phi)
        return make_tmap(name, F, G, comps)

    @staticmethod
    def _names_until(st: Stream, stop: str) -> list:
        out = []
        if st.at(stop):
            return out
        out.append(st.ident("parameter").text)
        while st.accept(","):
            out.append(st.ident("parameter").text)
        return out

    # ------------------------------------------------------------ extensions

    def _read_extend(self, st: Stream):
        """``extend T with SPEC, SPEC ... [named N]``."""
        st.expect("extend")
        base = self._theory_ref(st)
        st.expect("with")
        cur, specs = base, []
        while True:
            spec = self._read_spec(st, cur)
            specs.append(spec)
            cur = extend_morita(cur, spec).theory
            if not st.accept(","):
                break
        name = None
        if st.accept("named"):
            name = st.ident("theory name").text
        return extend_chain(base, specs, name)

    def _read_spec(self, st: Stream, t: Theory):
        t0 = st.peek
        kind = st.next().text
        if kind not in _SPEC_KINDS:
            raise ParseError(f"expected one of {', '.join(_SPEC_KINDS)}, found {kind!r}", t0.line, t0.col)
        if kind == "terminal":
            st.expect("as")
            return Terminal(st.ident("sort name").text)
        if kind in ("product", "coproduct"):
            parts = []
            while not st.at("as"):
                parts.append(self._sort(st, t))
            st.expect("as")
            name = st.ident("sort name").text
            st.expect("via")
            maps = tuple(st.ident("function name").text for _ in parts)
            return (Product if kind == "product" else Coproduct)(tuple(parts), name, maps)
        if kind in ("quotient", "subsort"):
            base = self._sort(st, t)
            st.expect("by")
            cls = self._class(st, t, (base, base) if kind == "quotient" else (base,))
            st.expect("as")
            name = st.ident("sort name").text
            st.expect("via")
            fn = st.ident("function name").text
            return (Quotient if kind == "quotient" else Subsort)(base, cls, name, fn)
        # define rel S(x:s, y:s) := phi   |   define fun f(x:s) -> y:t := phi
        function = st.accept("fun")
        if not function:
            st.expect("rel")
        sym = st.ident("symbol name").text
        st.expect("(")
        typed = []
        if not st.at(")"):
            typed.append(self._typed(st, t))
            while st.accept(","):
                typed.append(self._typed(st, t))
        st.expect(")")
        if function:
            st.expect("->")
            typed.append(self._typed(st, t))
        st.expect(":=")
        ps = tuple(typed)
        phi = read_formula(st, t.signature, {p.name: p.sort for p in ps}, t.mode)
        return Definitional(sym, Image(ps, phi), function)

    @staticmethod
    def _sort(st: Stream, t: Theory) -> str:
        tok = st.ident("sort")
        if tok.text not in t.signature.sorts:
            raise ParseError(f"unknown sort {tok.text}", tok.line, tok.col)
        return tok.text

    def _typed(self, st: Stream, t: Theory) -> Var:
        name = st.ident("variable").text
        st.expect(":")
        return Var(name, self._sort(st, t))

    def _class(self, st: Stream, t: Theory, sorts) -> Image:
        """A relation name, or ``[x, y | formula]``."""
        if st.accept("["):
            names = self._names_until(st, "|")
            st.expect("|")
            if len(names) != len(sorts):
                tok = st.peek
                raise ParseError(f"class needs {len(sorts)} variables", tok.line, tok.col)
            ps = tuple(Var(n, s) for n, s in zip(names, sorts))
            phi = read_formula(st, t.signature, {p.name: p.sort for p in ps}, t.mode)
            st.expect("]")
            return Image(ps, phi)
        tok = st.ident("relation name")
        sig = t.signature
        if not sig.has_relation(tok.text) or tuple(sig.rel_domain(tok.text)) != tuple(sorts):
            raise ParseError(f"{tok.text} is not a relation on {' x '.join(sorts)}", tok.line, tok.col)
        ps = tuple(Var(f"x{k + 1}", s) for k, s in enumerate(sorts))
        return Image(ps, Rel(tok.text, ps))


def _sorts_only(t: Theory) -> Theory:
    return Theory(t.name, Signature(tuple(t.signature.sorts), (), ()), (), t.mode)


FIXTURE_PREFIX = "fixture:"


def fixture_path(name: str) -> Path:
    """Location of a bundled fixture file such as ``EQ.th``."""
    return Path(str(files("cohlogic") / "fixtures" / name))


def load_workspace(paths) -> Workspace:
    """Load files in order; ``fixture:NAME`` names a bundled fixture."""
    ws = Workspace()
    for p in paths:
        p = str(p)
        ws.load_file(fixture_path(p[len(FIXTURE_PREFIX):]) if p.startswith(FIXTURE_PREFIX) else p)
    return ws
