"""Surface syntax: tokenizer, recursive-descent parser, printer.

Grammar (ASCII)::

    sort    := "R" digit+
    var     := ident ":" sort
    term    := "0" | ident | "f" digit+ "(" term ")" | "g" digit+ "(" term ")"
    atom    := term "=" term | term "!=" term | term "<" digit+ term
    formula := atom | "~" formula | formula "&" formula | formula "|" formula
             | formula "->" formula | "exists" var "." formula
             | "forall" var "." formula | "true" | "false" | "(" formula ")"

Precedence ``~ > & > | > ->``; ``->`` associates to the right and a
quantifier body extends as far right as possible.

Free variables get their sort from the ``sorts`` mapping passed to
:func:`parse` or, failing that, by inference from their use. A free variable
whose sort is left undetermined defaults to R0. Bound variables that clash
with a free variable or with an earlier binder are renamed ``name_k``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .syntax import (
    FALSE, TRUE, ZERO, And, Bottom, Eq, Exists, F, Forall, Formula, G, Implies,
    Lt, Neq, Not, Or, SortError, Term, Top, Var, fresh_name, free_vars,
)


class ParseError(Exception):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class SortCheckError(SortError):
    def __init__(self, msg: str, pos: int | None = None):
        super().__init__(msg if pos is None else f"{msg} at position {pos}")
        self.pos = pos


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<neq>!=)
  | (?P<lt><(?P<ltidx>\d+))
  | (?P<fun>[fg](?P<funidx>\d+)(?=\s*\())
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<zero>0(?![0-9]))
  | (?P<punct>[~&|().:=])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"exists", "forall", "true", "false"}


@dataclass
class Tok:
    kind: str
    text: str
    pos: int
    idx: int = 0


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "ltidx":
            kind = "lt"
        if kind == "funidx":
            kind = "fun"
        s = m.group(0)
        if kind == "lt":
            toks.append(Tok("lt", s, pos, int(m.group("ltidx"))))
        elif kind == "fun":
            toks.append(Tok(s[0], s, pos, int(m.group("funidx"))))
        elif kind == "ident":
            toks.append(Tok("kw" if s in _KEYWORDS else "ident", s, pos))
        elif kind == "zero":
            toks.append(Tok("zero", s, pos))
        elif kind in ("arrow", "neq"):
            toks.append(Tok(s, s, pos))
        elif kind == "punct":
            toks.append(Tok(s, s, pos))
        pos = m.end()
    toks.append(Tok("eof", "", len(text)))
    return toks


# Raw (unsorted) trees produced by the parser, typed in a second pass.
# Terms:    ("zero", pos) | ("var", name, pos) | ("f"|"g", i, raw, pos)
# Formulas: ("eq"|"neq", t, s, pos) | ("lt", i, t, s, pos) | ("not", a)
#           | ("and"|"or", [..]) | ("imp", a, b) | ("ex"|"all", name, sort, a, pos)
#           | ("true",) | ("false",)


class _Parser:
    def __init__(self, text: str, n: int):
        self.toks = tokenize(text)
        self.k = 0
        self.n = n

    @property
    def tok(self) -> Tok:
        return self.toks[self.k]

    def take(self, kind: str, text: str | None = None) -> Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            got = t.text or "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", t.pos)
        self.k += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def parse(self):
        phi = self.formula()
        if not self.at("eof"):
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return phi

    def formula(self):
        lhs = self.disjunction()
        if self.at("->"):
            self.take("->")
            return ("imp", lhs, self.formula())
        return lhs

    def disjunction(self):
        parts = [self.conjunction()]
        while self.at("|"):
            self.take("|")
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else ("or", parts)

    def conjunction(self):
        parts = [self.unary()]
        while self.at("&"):
            self.take("&")
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else ("and", parts)

    def unary(self):
        if self.at("~"):
            self.take("~")
            return ("not", self.unary())
        if self.at("kw", "exists") or self.at("kw", "forall"):
            q = self.take("kw")
            name = self.take("ident")
            self.take(":")
            sort = self.sort()
            self.take(".")
            body = self.formula()
            return ("ex" if q.text == "exists" else "all", name.text, sort, body, name.pos)
        return self.primary()

    def sort(self) -> int:
        t = self.take("ident")
        m = re.fullmatch(r"R(\d+)", t.text)
        if m is None:
            raise ParseError(f"expected a sort R0..R{self.n}, found {t.text!r}", t.pos)
        s = int(m.group(1))
        if s > self.n:
            raise SortCheckError(f"sort R{s} out of range (n = {self.n})", t.pos)
        return s

    def primary(self):
        if self.at("kw", "true"):
            self.take("kw")
            return ("true",)
        if self.at("kw", "false"):
            self.take("kw")
            return ("false",)
        if self.at("("):
            self.take("(")
            phi = self.formula()
            self.take(")")
            return phi
        return self.atom()

    def atom(self):
        start = self.tok.pos
        lhs = self.term()
        if self.at("="):
            self.take("=")
            return ("eq", lhs, self.term(), start)
        if self.at("!="):
            self.take("!=")
            return ("neq", lhs, self.term(), start)
        if self.at("lt"):
            i = self.take("lt").idx
            if not 1 <= i <= self.n:
                raise SortCheckError(f"relation <{i} out of range (n = {self.n})", start)
            return ("lt", i, lhs, self.term(), start)
        raise ParseError(f"expected '=', '!=' or '<i', found {self.tok.text or 'end of input'!r}",
                         self.tok.pos)

    def term(self):
        t = self.tok
        if t.kind == "zero":
            self.k += 1
            return ("zero", t.pos)
        if t.kind == "ident":
            self.k += 1
            return ("var", t.text, t.pos)
        if t.kind in ("f", "g"):
            self.k += 1
            if not 1 <= t.idx <= self.n:
                raise SortCheckError(f"symbol {t.text} out of range (n = {self.n})", t.pos)
            self.take("(")
            arg = self.term()
            self.take(")")
            return (t.kind, t.idx, arg, t.pos)
        raise ParseError(f"expected a term, found {t.text or 'end of input'!r}", t.pos)


def _raw_str(raw) -> str:
    tag = raw[0]
    if tag == "zero":
        return "0"
    if tag == "var":
        return raw[1]
    return f"{tag}{raw[1]}({_raw_str(raw[2])})"


class _Typer:
    """Second pass: scope resolution, sort inference, alpha-renaming."""

    def __init__(self, sorts: Mapping[str, int]):
        self.declared = dict(sorts)
        self.parent: dict[str, str] = {}
        self.fixed: dict[str, int] = {}
        self.used: set[str] = set()

    # union-find over free-variable names
    def find(self, a: str) -> str:
        while self.parent.get(a, a) != a:
            a = self.parent[a]
        return a

    def fix(self, name: str, sort: int, raw) -> None:
        r = self.find(name)
        have = self.fixed.get(r)
        if have is not None and have != sort:
            raise SortCheckError(
                f"subterm {_raw_str(raw)} must have sort R{sort} but has sort R{have}", raw[-1])
        self.fixed[r] = sort

    def union(self, a: str, b: str, raw) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        sa, sb = self.fixed.get(ra), self.fixed.get(rb)
        if sa is not None and sb is not None and sa != sb:
            raise SortCheckError(f"sides of {_raw_str(raw[1])} = {_raw_str(raw[2])} differ in sort",
                                 raw[-1])
        self.parent[ra] = rb
        if sa is not None:
            self.fixed[rb] = sa

    # constraint collection
    def term_sort(self, raw, scope) -> int | str:
        """Sort of a raw term, or the free-variable name whose sort it is."""
        tag = raw[0]
        if tag == "zero":
            return 0
        if tag == "var":
            if raw[1] in scope:
                return scope[raw[1]][1]
            self.used.add(raw[1])
            if raw[1] in self.declared:
                self.fix(raw[1], self.declared[raw[1]], raw)
            return raw[1]
        want = 0 if tag == "f" else raw[1]
        self.expect(raw[2], want, scope)
        return raw[1] if tag == "f" else 0

    def expect(self, raw, sort: int, scope) -> None:
        got = self.term_sort(raw, scope)
        if isinstance(got, str):
            self.fix(got, sort, raw)
        elif got != sort:
            raise SortCheckError(
                f"subterm {_raw_str(raw)} must have sort R{sort} but has sort R{got}", raw[-1])

    def collect(self, raw, scope) -> None:
        tag = raw[0]
        if tag in ("eq", "neq"):
            a = self.term_sort(raw[1], scope)
            b = self.term_sort(raw[2], scope)
            if isinstance(a, str) and isinstance(b, str):
                self.union(a, b, raw)
            elif isinstance(a, str):
                self.fix(a, b, raw[1])
            elif isinstance(b, str):
                self.fix(b, a, raw[2])
            elif a != b:
                raise SortCheckError(
                    f"sides of {_raw_str(raw[1])} = {_raw_str(raw[2])} differ in sort "
                    f"(R{a} vs R{b})", raw[-1])
        elif tag == "lt":
            self.expect(raw[2], raw[1], scope)
            self.expect(raw[3], raw[1], scope)
        elif tag == "not":
            self.collect(raw[1], scope)
        elif tag in ("and", "or"):
            for p in raw[1]:
                self.collect(p, scope)
        elif tag == "imp":
            self.collect(raw[1], scope)
            self.collect(raw[2], scope)
        elif tag in ("ex", "all"):
            inner = dict(scope)
            inner[raw[1]] = (raw[1], raw[2])
            self.collect(raw[3], inner)

    def free_sort(self, name: str) -> int:
        return self.fixed.get(self.find(name), 0)

    # building
    def build_term(self, raw, scope) -> Term:
        tag = raw[0]
        if tag == "zero":
            return ZERO
        if tag == "var":
            if raw[1] in scope:
                name, sort = scope[raw[1]]
                return Var(name, sort)
            return Var(raw[1], self.free_sort(raw[1]))
        arg = self.build_term(raw[2], scope)
        return F(raw[1], arg) if tag == "f" else G(raw[1], arg)

    def build(self, raw, scope, taken: set[str]) -> Formula:
        tag = raw[0]
        if tag == "true":
            return TRUE
        if tag == "false":
            return FALSE
        if tag == "eq":
            return Eq(self.build_term(raw[1], scope), self.build_term(raw[2], scope))
        if tag == "neq":
            lhs, rhs = self.build_term(raw[1], scope), self.build_term(raw[2], scope)
            if lhs.sort == 0:
                return Neq(lhs, rhs)
            return Not(Eq(lhs, rhs))
        if tag == "lt":
            return Lt(raw[1], self.build_term(raw[2], scope), self.build_term(raw[3], scope))
        if tag == "not":
            return Not(self.build(raw[1], scope, taken))
        if tag == "and":
            return And(tuple(self.build(p, scope, taken) for p in raw[1]))
        if tag == "or":
            return Or(tuple(self.build(p, scope, taken) for p in raw[1]))
        if tag == "imp":
            return Implies(self.build(raw[1], scope, taken), self.build(raw[2], scope, taken))
        name, sort, body = raw[1], raw[2], raw[3]
        new = fresh_name(name, taken)
        taken.add(new)
        inner = dict(scope)
        inner[name] = (new, sort)
        v = Var(new, sort)
        b = self.build(body, inner, taken)
        return Exists(v, b) if tag == "ex" else Forall(v, b)


def parse(text: str, n: int, sorts: Mapping[str, int] | None = None) -> Formula:
    """Parse and sort-check a formula of the language with sorts R0..Rn."""
    if n < 1:
        raise ValueError("n must be at least 1")
    raw = _Parser(text, n).parse()
    typer = _Typer(sorts or {})
    typer.collect(raw, {})
    for name, s in (sorts or {}).items():
        if not 0 <= s <= n:
            raise SortCheckError(f"declared sort R{s} of {name} out of range")
    return typer.build(raw, {}, set(typer.used))


def parse_term(text: str, n: int, sorts: Mapping[str, int] | None = None) -> Term:
    p = _Parser(text, n)
    raw = p.term()
    if not p.at("eof"):
        raise ParseError(f"unexpected {p.tok.text!r}", p.tok.pos)
    typer = _Typer(sorts or {})
    typer.term_sort(raw, {})
    return typer.build_term(raw, {})


# ---------------------------------------------------------------------------
# printing


def _wrap(phi: Formula) -> str:
    s = to_text(phi)
    if isinstance(phi, (Top, Bottom, Not)):
        return s
    return f"({s})"


def to_text(phi: Formula) -> str:
    """Render a formula so that ``parse(to_text(phi)) == phi``."""
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, Eq):
        return f"{phi.lhs} = {phi.rhs}"
    if isinstance(phi, Neq):
        return f"{phi.lhs} != {phi.rhs}"
    if isinstance(phi, Lt):
        return f"{phi.lhs} <{phi.i} {phi.rhs}"
    if isinstance(phi, Not):
        return "~" + _wrap(phi.arg)
    if isinstance(phi, And):
        return " & ".join(_wrap(a) for a in phi.args)
    if isinstance(phi, Or):
        return " | ".join(_wrap(a) for a in phi.args)
    if isinstance(phi, Implies):
        return f"{_wrap(phi.lhs)} -> {_wrap(phi.rhs)}"
    if isinstance(phi, (Exists, Forall)):
        q = "exists" if isinstance(phi, Exists) else "forall"
        return f"{q} {phi.var.name}:R{phi.var.sort}. {to_text(phi.body)}"
    raise TypeError(f"not a formula: {phi!r}")


def sort_context(phi: Formula) -> dict[str, int]:
    return {v.name: v.sort for v in free_vars(phi)}
