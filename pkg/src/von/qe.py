"""Quantifier elimination, decision and equivalence for the theory.

Elimination works one existential at a time on a conjunction of literals.
For a variable ``x`` of sort R0 the only ``x``-terms are ``x`` and ``f_i(x)``:
an equation pins ``x`` to a term, otherwise ``x`` ranges over a
multi-interval which is nonempty as soon as every per-sort bound pair is
consistent, and infinite, so R0-disequalities never matter. For ``x`` of an
ordered sort we split on whether ``x`` is in the image of ``f_i`` (reduce to
a fresh R0 variable) or not (then ``g_i(x) = 0`` and only the ``<i``-bounds
on ``x`` remain, satisfiable by co-density).
"""
from __future__ import annotations

import itertools
from typing import Iterable

from .syntax import (
    ATOMS, FALSE, TRUE, ZERO, And, Bottom, Eq, Exists, F, Forall, Formula, G,
    Implies, Lt, Neq, Not, Or, Term, Top, Var, all_vars, conj, disj, free_vars,
    in_image, neg, normalize_term, subst_term, term_vars,
)

Literal = Formula  # Eq | Neq | Lt, or TRUE/FALSE transiently


# ---------------------------------------------------------------------------
# literal-level helpers


def simplify_literal(lit: Literal) -> Literal:
    """Normalize terms and fold trivially decided literals."""
    if isinstance(lit, Eq):
        lhs, rhs = normalize_term(lit.lhs), normalize_term(lit.rhs)
        if lhs == rhs:
            return TRUE
        return Eq(lhs, rhs)
    if isinstance(lit, Neq):
        lhs, rhs = normalize_term(lit.lhs), normalize_term(lit.rhs)
        if lhs == rhs:
            return FALSE
        return Neq(lhs, rhs)
    if isinstance(lit, Lt):
        lhs, rhs = normalize_term(lit.lhs), normalize_term(lit.rhs)
        if lhs == rhs:
            return FALSE
        return Lt(lit.i, lhs, rhs)
    return lit


def _negate_atom(a: Formula) -> Formula:
    """Negation of an atom as a positive disjunction (or an R0 ``Neq``)."""
    if isinstance(a, Eq):
        if a.lhs.sort == 0:
            return Neq(a.lhs, a.rhs)
        return Or((Lt(a.lhs.sort, a.lhs, a.rhs), Lt(a.lhs.sort, a.rhs, a.lhs)))
    if isinstance(a, Neq):
        return Eq(a.lhs, a.rhs)
    if isinstance(a, Lt):
        return Or((Lt(a.i, a.rhs, a.lhs), Eq(a.lhs, a.rhs)))
    raise TypeError(a)


def nnf(phi: Formula, positive: bool = True) -> Formula:
    """Negation normal form of a quantifier-free formula, literals expanded."""
    if isinstance(phi, Top):
        return TRUE if positive else FALSE
    if isinstance(phi, Bottom):
        return FALSE if positive else TRUE
    if isinstance(phi, ATOMS):
        return phi if positive else _negate_atom(phi)
    if isinstance(phi, Not):
        return nnf(phi.arg, not positive)
    if isinstance(phi, And):
        parts = [nnf(a, positive) for a in phi.args]
        return conj(parts) if positive else disj(parts)
    if isinstance(phi, Or):
        parts = [nnf(a, positive) for a in phi.args]
        return disj(parts) if positive else conj(parts)
    if isinstance(phi, Implies):
        if positive:
            return disj([nnf(phi.lhs, False), nnf(phi.rhs, True)])
        return conj([nnf(phi.lhs, True), nnf(phi.rhs, False)])
    raise ValueError("nnf expects a quantifier-free formula")


def dnf(phi: Formula) -> list[list[Literal]]:
    """Disjunctive normal form as a list of literal lists (no TRUE/FALSE inside)."""
    return [list(c) for c in _dnf(nnf(phi))]


def _dnf(phi: Formula) -> list[tuple[Literal, ...]]:
    if isinstance(phi, Top):
        return [()]
    if isinstance(phi, Bottom):
        return []
    if isinstance(phi, Or):
        out = []
        for a in phi.args:
            out.extend(_dnf(a))
        return _prune(out)
    if isinstance(phi, And):
        acc: list[tuple[Literal, ...]] = [()]
        for a in phi.args:
            sub = _dnf(a)
            merged = []
            for x in acc:
                for y in sub:
                    c = _clean_conjunct(x + y)
                    if c is not None:
                        merged.append(tuple(c))
            acc = _prune(merged)
            if not acc:
                return []
        return acc
    c = _clean_conjunct([phi])
    return [] if c is None else [tuple(c)]


def _prune(clauses: list[tuple[Literal, ...]]) -> list[tuple[Literal, ...]]:
    """Drop duplicate clauses and clauses subsumed by a smaller one (subsumption)."""
    kept: list[tuple[Literal, ...]] = []
    sets: list[frozenset] = []
    for c in sorted(dict.fromkeys(clauses), key=len):
        fs = frozenset(c)
        if not any(s <= fs for s in sets):
            kept.append(c)
            sets.append(fs)
    # restore first-seen order for stable output
    order = {c: k for k, c in enumerate(dict.fromkeys(clauses))}
    return sorted(kept, key=order.__getitem__)


def _clash(a: Literal, b: Literal) -> bool:
    """Are two literals syntactically contradictory?"""
    pa, pb = (a.lhs, a.rhs), (b.lhs, b.rhs)
    same = pa == pb or pa == pb[::-1]
    if not same:
        return False
    kinds = {type(a), type(b)}
    if kinds == {Eq, Neq}:
        return True
    if isinstance(a, Lt) and isinstance(b, Lt):
        return pa != pb
    return kinds == {Eq, Lt}


def _clean_conjunct(lits: Iterable[Literal]) -> list[Literal] | None:
    out: list[Literal] = []
    for lit in lits:
        lit = simplify_literal(lit)
        if isinstance(lit, Bottom):
            return None
        if isinstance(lit, Top) or lit in out:
            continue
        if any(_clash(lit, other) for other in out):
            return None
        out.append(lit)
    return out


def _subst(lits: Iterable[Literal], mapping) -> list[Literal] | None:
    """Apply a term mapping to each literal, then clean up. ``None`` means false."""
    moved = []
    for lit in lits:
        lhs = normalize_term(subst_term(lit.lhs, mapping))
        rhs = normalize_term(subst_term(lit.rhs, mapping))
        if isinstance(lit, Eq):
            moved.append(Eq(lhs, rhs))
        elif isinstance(lit, Neq):
            moved.append(Neq(lhs, rhs))
        else:
            moved.append(Lt(lit.i, lhs, rhs))
    return _clean_conjunct(moved)


def _replace_var(x: Var, t: Term):
    return lambda u: t if u == x else None


def _mentions(lit: Literal, x: Var) -> bool:
    return x in term_vars(lit.lhs) or x in term_vars(lit.rhs)


# ---------------------------------------------------------------------------
# single-variable elimination


class _Fresh:
    def __init__(self, taken: set[str]):
        self.taken = taken
        self.k = itertools.count()

    def var(self, sort: int) -> Var:
        while True:
            name = f"_e{next(self.k)}"
            if name not in self.taken:
                self.taken.add(name)
                return Var(name, sort)


def eliminate_one(x: Var, conj_lits: list[Literal], fresh: _Fresh | None = None) -> Formula:
    """Quantifier-free equivalent of ``exists x. AND(conj_lits)``."""
    if fresh is None:
        names = {v.name for lit in conj_lits for v in term_vars(lit.lhs) | term_vars(lit.rhs)}
        fresh = _Fresh(names | {x.name})
    lits = _clean_conjunct(conj_lits)
    if lits is None:
        return FALSE
    if x.sort == 0:
        return _elim_r0(x, lits)
    return _elim_ri(x, lits, fresh)


def _elim_r0(x: Var, lits: list[Literal]) -> Formula:
    # equation x = t
    for lit in lits:
        if isinstance(lit, Eq) and lit.lhs.sort == 0:
            for a, b in ((lit.lhs, lit.rhs), (lit.rhs, lit.lhs)):
                if a == x and x not in term_vars(b):
                    rest = _subst(lits, _replace_var(x, b))
                    return FALSE if rest is None else conj(rest)
    # equation f_i(x) = u
    for lit in lits:
        if isinstance(lit, Eq) and lit.lhs.sort > 0:
            for a, b in ((lit.lhs, lit.rhs), (lit.rhs, lit.lhs)):
                if a == F(a.sort, x) and x not in term_vars(b):
                    i = a.sort
                    if isinstance(b, F):
                        rest = _subst(lits, _replace_var(x, b.arg))
                        return FALSE if rest is None else conj(rest)
                    guard = simplify_literal(in_image(i, b))
                    rest = _subst(lits, _replace_var(x, normalize_term(G(i, b))))
                    return FALSE if rest is None else conj([guard] + rest)
    # only order bounds and disequalities remain
    lower: dict[int, list[Term]] = {}
    upper: dict[int, list[Term]] = {}
    out: list[Formula] = []
    for lit in lits:
        if not _mentions(lit, x):
            out.append(lit)
        elif isinstance(lit, Lt):
            if lit.rhs == F(lit.i, x) and x not in term_vars(lit.lhs):
                lower.setdefault(lit.i, []).append(lit.lhs)
            elif lit.lhs == F(lit.i, x) and x not in term_vars(lit.rhs):
                upper.setdefault(lit.i, []).append(lit.rhs)
            else:
                raise AssertionError(f"unexpected literal shape for {x}: {lit}")
        elif isinstance(lit, Neq):
            continue
        else:
            raise AssertionError(f"unexpected literal shape for {x}: {lit}")
    for i in sorted(set(lower) | set(upper)):
        for lo in lower.get(i, []):
            for hi in upper.get(i, []):
                out.append(simplify_literal(Lt(i, lo, hi)))
    return conj(out)


def _elim_ri(x: Var, lits: list[Literal], fresh: _Fresh) -> Formula:
    i = x.sort
    # case A: x = f_i(y) for a fresh y of sort R0
    y = fresh.var(0)
    image_lits = _subst(lits, _replace_var(x, F(i, y)))
    case_a = FALSE if image_lits is None else _elim_r0(y, image_lits)

    # case B: x outside the image, so g_i(x) = 0
    gx = G(i, x)
    off = _subst(lits, lambda u: ZERO if u == gx else None)
    case_b = FALSE if off is None else _elim_nonimage(x, off)
    return disj([case_a, case_b])


def _elim_nonimage(x: Var, lits: list[Literal]) -> Formula:
    i = x.sort
    kept: list[Literal] = []
    for lit in lits:
        if isinstance(lit, Eq) and _mentions(lit, x):
            other = lit.rhs if lit.lhs == x else lit.lhs
            if isinstance(other, F):
                return FALSE  # an image point cannot equal a non-image x
            if x in term_vars(other):
                raise AssertionError(f"unexpected literal shape for {x}: {lit}")
            guard = neg(in_image(i, other))
            rest = _subst(lits, _replace_var(x, other))
            return FALSE if rest is None else conj([guard] + rest)
        kept.append(lit)
    lower: list[Term] = []
    upper: list[Term] = []
    out: list[Formula] = []
    for lit in kept:
        if not _mentions(lit, x):
            out.append(lit)
        elif isinstance(lit, Lt) and lit.rhs == x and x not in term_vars(lit.lhs):
            lower.append(lit.lhs)
        elif isinstance(lit, Lt) and lit.lhs == x and x not in term_vars(lit.rhs):
            upper.append(lit.rhs)
        else:
            raise AssertionError(f"unexpected literal shape for {x}: {lit}")
    for lo in lower:
        for hi in upper:
            out.append(simplify_literal(Lt(i, lo, hi)))
    return conj(out)


# ---------------------------------------------------------------------------
# whole formulas


def _exists_qf(x: Var, body: Formula, fresh: _Fresh) -> Formula:
    parts = []
    for clause in dnf(body):
        if not any(_mentions(lit, x) for lit in clause):
            parts.append(conj(clause))
        else:
            parts.append(eliminate_one(x, clause, fresh))
        if isinstance(parts[-1], Top):
            return TRUE
    return simplify(disj(parts))


def simplify(phi: Formula) -> Formula:
    """Normalize terms and fold constants in a quantifier-free formula."""
    if isinstance(phi, ATOMS):
        return simplify_literal(phi)
    if isinstance(phi, Not):
        return neg(simplify(phi.arg))
    if isinstance(phi, And):
        return conj(simplify(a) for a in phi.args)
    if isinstance(phi, Or):
        return disj(simplify(a) for a in phi.args)
    if isinstance(phi, Implies):
        return disj([neg(simplify(phi.lhs)), simplify(phi.rhs)])
    return phi


def eliminate(phi: Formula) -> Formula:
    """Quantifier-free formula equivalent to ``phi`` in every model."""
    fresh = _Fresh({v.name for v in all_vars(phi)})
    return _eliminate(phi, fresh)


def _eliminate(phi: Formula, fresh: _Fresh) -> Formula:
    if isinstance(phi, Exists):
        return _exists_qf(phi.var, _eliminate(phi.body, fresh), fresh)
    if isinstance(phi, Forall):
        body = _eliminate(phi.body, fresh)
        return simplify(nnf(neg(_exists_qf(phi.var, neg(body), fresh))))
    if isinstance(phi, Not):
        return neg(_eliminate(phi.arg, fresh))
    if isinstance(phi, And):
        return conj(_eliminate(a, fresh) for a in phi.args)
    if isinstance(phi, Or):
        return disj(_eliminate(a, fresh) for a in phi.args)
    if isinstance(phi, Implies):
        return disj([neg(_eliminate(phi.lhs, fresh)), _eliminate(phi.rhs, fresh)])
    return simplify(phi)


class NotASentence(ValueError):
    pass


def closure(phi: Formula, binder=Forall) -> Formula:
    """Universal (or existential) closure over the free variables, sorted by name."""
    for v in sorted(free_vars(phi), key=lambda v: v.name, reverse=True):
        phi = binder(v, phi)
    return phi


def decide(sigma: Formula) -> bool:
    """Truth value of a sentence, the same in every model."""
    if free_vars(sigma):
        names = ", ".join(sorted(v.name for v in free_vars(sigma)))
        raise NotASentence(f"free variables: {names}")
    qf = eliminate(sigma)
    if isinstance(qf, Top):
        return True
    if isinstance(qf, Bottom):
        return False
    raise AssertionError(f"closed quantifier-free residue not decided: {qf}")


def equivalent(phi: Formula, psi: Formula) -> bool:
    sig_phi = {v.name: v.sort for v in free_vars(phi)}
    for v in free_vars(psi):
        if sig_phi.get(v.name, v.sort) != v.sort:
            raise ValueError(f"variable {v.name} has different sorts on the two sides")
    return decide(closure(And((Implies(phi, psi), Implies(psi, phi)))))
