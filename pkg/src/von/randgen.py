"""Random well-sorted terms, formulas and assignments for property testing."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .model import NEG_INF, POS_INF, Element, Model
from .syntax import (
    FALSE, TRUE, ZERO, And, Eq, Exists, F, Forall, Formula, G, Implies, Lt, Neq,
    Not, Or, Term, Var,
)


@dataclass
class FormulaGen:
    n: int
    rng: random.Random
    free: list[Var]
    max_qdepth: int = 2
    max_term_depth: int = 3
    _bound: int = field(default=0, init=False)

    def term(self, sort: int, scope: list[Var], depth: int | None = None,
             focus: Var | None = None) -> Term:
        """Random term of ``sort``; with ``focus`` set the term mentions that variable."""
        depth = self.rng.randint(0, self.max_term_depth) if depth is None else depth
        if focus is not None:
            return self._focused(sort, focus, depth)
        here = [v for v in scope if v.sort == sort]
        roll = self.rng.randrange(10)
        if sort == 0:
            if depth > 0 and roll < 3:
                i = self.rng.randint(1, self.n)
                return G(i, self.term(i, scope, depth - 1))
            if here and roll < 8:
                return self.rng.choice(here)
            return ZERO
        if here and (depth == 0 or roll < 7):
            return self.rng.choice(here)
        if depth == 0:
            return F(sort, ZERO)
        return F(sort, self.term(0, scope, depth - 1))

    def _focused(self, sort: int, v: Var, depth: int) -> Term:
        # shortest well-sorted path from v to the requested sort, padded by
        # redundant g_i(f_i(.)) wrappers while depth remains
        if v.sort == sort:
            t: Term = v
        elif v.sort == 0:
            t = F(sort, v)
        elif sort == 0:
            t = G(v.sort, v)
        else:
            t = F(sort, G(v.sort, v))
        if depth > 2 and t.sort == 0 and self.rng.randrange(3) == 0:
            i = self.rng.randint(1, self.n)
            t = G(i, F(i, t))
        return t

    def atom(self, scope: list[Var], focus: Var | None = None) -> Formula:
        roll = self.rng.randrange(12)
        if focus is not None and focus.sort > 0 and roll < 2:
            # image membership and the retraction, the shapes that split R_i cases
            i = focus.sort
            if roll == 0:
                return Eq(F(i, G(i, focus)), focus)
            return Eq(G(i, focus), ZERO)
        others = [v for v in scope if v is not focus]
        ordered = [v for v in others if v.sort > 0]
        if focus is not None and focus.sort == 0 and ordered and roll < 3:
            # f_i(x) = v pins x only when v is in the image
            v = self.rng.choice(ordered)
            return Eq(F(v.sort, focus), v)
        if focus is not None and others and roll < 6:
            # compare against a variable already in scope, the source of guards
            sort = self.rng.choice(others).sort or self.rng.randint(0, self.n)
        elif focus is not None and roll < 9:
            sort = focus.sort
        else:
            sort = self.rng.randint(0, self.n)
        lhs = self.term(sort, scope, focus=focus)
        rhs = self.term(sort, scope)
        if self.rng.randrange(2):
            lhs, rhs = rhs, lhs
        if sort == 0:
            return Eq(lhs, rhs) if self.rng.randrange(2) else Neq(lhs, rhs)
        return Lt(sort, lhs, rhs) if self.rng.randrange(2) else Eq(lhs, rhs)

    def literal(self, scope: list[Var], focus: Var | None = None) -> Formula:
        a = self.atom(scope, focus)
        return Not(a) if self.rng.randrange(4) == 0 else a

    def formula(self, scope: list[Var] | None = None, qdepth: int | None = None,
                size: int = 4, focus: Var | None = None) -> Formula:
        scope = list(self.free) if scope is None else scope
        qdepth = self.max_qdepth if qdepth is None else qdepth
        roll = self.rng.randrange(12)
        if size <= 1 or roll < 3:
            if self.rng.randrange(40) == 0:
                return self.rng.choice([TRUE, FALSE])
            return self.literal(scope, focus if self.rng.randrange(3) else None)
        if roll < 4:
            return Not(self.formula(scope, qdepth, size - 1, focus))
        if roll < 7:
            k = self.rng.randint(2, 3)
            return And(tuple(self.formula(scope, qdepth, size // 2, focus) for _ in range(k)))
        if roll < 8:
            k = self.rng.randint(2, 3)
            return Or(tuple(self.formula(scope, qdepth, size // 2, focus) for _ in range(k)))
        if roll < 9 or qdepth == 0:
            return Implies(self.formula(scope, qdepth, size // 2, focus),
                           self.formula(scope, qdepth, size // 2, focus))
        return self.quantified(scope, qdepth, size)

    def quantified(self, scope: list[Var], qdepth: int, size: int) -> Formula:
        v = Var(f"q{self._bound}", self.rng.randint(0, self.n))
        self._bound += 1
        inner = scope + [v]
        if self.rng.randrange(2):
            k = self.rng.randint(2, 4)
            parts = [self.literal(inner, v if self.rng.randrange(4) else None)
                     for _ in range(k)]
            if qdepth > 1 and self.rng.randrange(2):
                parts[-1] = self.formula(inner, qdepth - 1, size - 1, v)
            body: Formula = And(tuple(parts))
        else:
            body = self.formula(inner, qdepth - 1, size - 1, v)
        return Exists(v, body) if self.rng.randrange(2) else Forall(v, body)


def random_free_vars(n: int, rng: random.Random, max_vars: int = 3) -> list[Var]:
    k = rng.randint(0, max_vars)
    return [Var(name, rng.randint(0, n)) for name in "abc"[:k]]


def random_formula(n: int, rng: random.Random, max_vars: int = 3, max_qdepth: int = 2,
                   size: int = 5) -> tuple[Formula, list[Var]]:
    free = random_free_vars(n, rng, max_vars)
    gen = FormulaGen(n, rng, free, max_qdepth=max_qdepth)
    if max_qdepth > 0 and rng.randrange(4):
        return gen.quantified(list(free), max_qdepth, size), free
    return gen.formula(size=size), free


def random_assignment(model: Model, variables: list[Var], rng: random.Random) -> dict[Var, Element]:
    """Assign random elements, often reusing points generated by earlier values.

    Ordered variables get a fresh non-image point a third of the time, since
    image membership is where the elimination rules branch.
    """
    asg: dict[Var, Element] = {}
    for v in variables:
        pool = model.closure(asg.values())[v.sort]
        pool.discard(model.zero()) if rng.randrange(2) else None
        roll = rng.randrange(10)
        if pool and roll < 4:
            asg[v] = rng.choice(model.sorted_elements(v.sort, pool))
        elif v.sort > 0 and roll < 7:
            pts = model.sorted_elements(v.sort, pool)
            k = rng.randrange(len(pts) + 1)
            lo = pts[k - 1] if k > 0 else NEG_INF
            hi = pts[k] if k < len(pts) else POS_INF
            asg[v] = model.sample_interval(v.sort, lo, hi, want_image=False)
        else:
            asg[v] = model.random_element(v.sort, rng)
    return asg
