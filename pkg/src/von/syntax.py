"""Terms and formulas of the (n+1)-sorted language with sorts R0..Rn.

Sort 0 is the unordered base sort. Sorts 1..n each carry a strict order
``<i``, an embedding ``f_i: R0 -> Ri`` and its retraction ``g_i: Ri -> R0``.
All syntax objects are frozen dataclasses and can be shared freely.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Union


class SortError(Exception):
    pass


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Zero:
    @property
    def sort(self) -> int:
        return 0

    def __str__(self) -> str:
        return "0"


ZERO = Zero()


@dataclass(frozen=True)
class Var:
    name: str
    sort: int

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class F:
    """``f_i(arg)`` with ``arg`` of sort 0; result of sort ``i``."""

    i: int
    arg: "Term"

    def __post_init__(self) -> None:
        if self.arg.sort != 0:
            raise SortError(f"f{self.i} expects R0, got {self.arg} of sort R{self.arg.sort}")

    @property
    def sort(self) -> int:
        return self.i

    def __str__(self) -> str:
        return f"f{self.i}({self.arg})"


@dataclass(frozen=True)
class G:
    """``g_i(arg)`` with ``arg`` of sort ``i``; result of sort 0."""

    i: int
    arg: "Term"

    def __post_init__(self) -> None:
        if self.arg.sort != self.i:
            raise SortError(f"g{self.i} expects R{self.i}, got {self.arg} of sort R{self.arg.sort}")

    @property
    def sort(self) -> int:
        return 0

    def __str__(self) -> str:
        return f"g{self.i}({self.arg})"


Term = Union[Zero, Var, F, G]


def term_vars(t: Term) -> set[Var]:
    if isinstance(t, Var):
        return {t}
    if isinstance(t, (F, G)):
        return term_vars(t.arg)
    return set()


def term_depth(t: Term) -> int:
    if isinstance(t, (F, G)):
        return 1 + term_depth(t.arg)
    return 0


def normalize_term(t: Term) -> Term:
    """Rewrite ``g_i(f_i(u)) -> u`` bottom-up.

    Since f_i is injective and g_i is its retraction the rewrite is sound in
    every model. Normal forms are ``v``, ``0``, ``f_i(v0)``, ``f_i(0)``,
    ``g_i(vi)`` and ``f_j(g_i(vi))``.
    """
    if isinstance(t, F):
        return F(t.i, normalize_term(t.arg))
    if isinstance(t, G):
        inner = normalize_term(t.arg)
        if isinstance(inner, F):
            return inner.arg
        return G(t.i, inner)
    return t


def subst_term(t: Term, mapping: Callable[[Term], Term | None]) -> Term:
    """Replace subterms top-down wherever ``mapping`` returns a term."""
    r = mapping(t)
    if r is not None:
        return r
    if isinstance(t, F):
        return F(t.i, subst_term(t.arg, mapping))
    if isinstance(t, G):
        return G(t.i, subst_term(t.arg, mapping))
    return t


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


TRUE = Top()
FALSE = Bottom()


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term

    def __post_init__(self) -> None:
        if self.lhs.sort != self.rhs.sort:
            raise SortError(
                f"'=' between {self.lhs} (R{self.lhs.sort}) and {self.rhs} (R{self.rhs.sort})"
            )


@dataclass(frozen=True)
class Neq:
    """Primitive disequality, only on the unordered sort R0."""

    lhs: Term
    rhs: Term

    def __post_init__(self) -> None:
        if self.lhs.sort != 0 or self.rhs.sort != 0:
            raise SortError(f"'!=' literal must be on R0: {self.lhs}, {self.rhs}")


@dataclass(frozen=True)
class Lt:
    i: int
    lhs: Term
    rhs: Term

    def __post_init__(self) -> None:
        if self.i < 1:
            raise SortError("'<' is only defined on R1..Rn")
        for t in (self.lhs, self.rhs):
            if t.sort != self.i:
                raise SortError(f"'<{self.i}' expects R{self.i}, got {t} of sort R{t.sort}")


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: Var
    body: "Formula"


Atom = Union[Eq, Neq, Lt]
Formula = Union[Top, Bottom, Eq, Neq, Lt, Not, And, Or, Implies, Exists, Forall]
ATOMS = (Eq, Neq, Lt)


def atom_terms(a: Atom) -> tuple[Term, Term]:
    return a.lhs, a.rhs


def free_vars(phi: Formula) -> set[Var]:
    if isinstance(phi, ATOMS):
        return term_vars(phi.lhs) | term_vars(phi.rhs)
    if isinstance(phi, Not):
        return free_vars(phi.arg)
    if isinstance(phi, (And, Or)):
        out: set[Var] = set()
        for a in phi.args:
            out |= free_vars(a)
        return out
    if isinstance(phi, Implies):
        return free_vars(phi.lhs) | free_vars(phi.rhs)
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.body) - {phi.var}
    return set()


def all_vars(phi: Formula) -> set[Var]:
    if isinstance(phi, ATOMS):
        return term_vars(phi.lhs) | term_vars(phi.rhs)
    if isinstance(phi, Not):
        return all_vars(phi.arg)
    if isinstance(phi, (And, Or)):
        out: set[Var] = set()
        for a in phi.args:
            out |= all_vars(a)
        return out
    if isinstance(phi, Implies):
        return all_vars(phi.lhs) | all_vars(phi.rhs)
    if isinstance(phi, (Exists, Forall)):
        return all_vars(phi.body) | {phi.var}
    return set()


def is_quantifier_free(phi: Formula) -> bool:
    if isinstance(phi, (Exists, Forall)):
        return False
    if isinstance(phi, Not):
        return is_quantifier_free(phi.arg)
    if isinstance(phi, (And, Or)):
        return all(is_quantifier_free(a) for a in phi.args)
    if isinstance(phi, Implies):
        return is_quantifier_free(phi.lhs) and is_quantifier_free(phi.rhs)
    return True


def quantifier_depth(phi: Formula) -> int:
    if isinstance(phi, (Exists, Forall)):
        return 1 + quantifier_depth(phi.body)
    if isinstance(phi, Not):
        return quantifier_depth(phi.arg)
    if isinstance(phi, (And, Or)):
        return max((quantifier_depth(a) for a in phi.args), default=0)
    if isinstance(phi, Implies):
        return max(quantifier_depth(phi.lhs), quantifier_depth(phi.rhs))
    return 0


def map_terms(phi: Formula, fn: Callable[[Term], Term]) -> Formula:
    """Apply ``fn`` to every maximal term of every atom (bound variables included)."""
    if isinstance(phi, Eq):
        return Eq(fn(phi.lhs), fn(phi.rhs))
    if isinstance(phi, Neq):
        return Neq(fn(phi.lhs), fn(phi.rhs))
    if isinstance(phi, Lt):
        return Lt(phi.i, fn(phi.lhs), fn(phi.rhs))
    if isinstance(phi, Not):
        return Not(map_terms(phi.arg, fn))
    if isinstance(phi, And):
        return And(tuple(map_terms(a, fn) for a in phi.args))
    if isinstance(phi, Or):
        return Or(tuple(map_terms(a, fn) for a in phi.args))
    if isinstance(phi, Implies):
        return Implies(map_terms(phi.lhs, fn), map_terms(phi.rhs, fn))
    if isinstance(phi, Exists):
        return Exists(phi.var, map_terms(phi.body, fn))
    if isinstance(phi, Forall):
        return Forall(phi.var, map_terms(phi.body, fn))
    return phi


def substitute(phi: Formula, var: Var, t: Term) -> Formula:
    """Capture-naive substitution ``phi[var := t]`` followed by normalization.

    Callers guarantee that bound variables of ``phi`` do not occur in ``t``.
    """
    def fn(s: Term) -> Term:
        return normalize_term(subst_term(s, lambda u: t if u == var else None))

    return map_terms(phi, fn)


def normalize_formula(phi: Formula) -> Formula:
    return map_terms(phi, normalize_term)


def conj(parts: Iterable[Formula]) -> Formula:
    """Flattening, deduplicating conjunction with constant absorption."""
    out: list[Formula] = []
    for p in parts:
        if isinstance(p, Bottom):
            return FALSE
        if isinstance(p, Top):
            continue
        for q in (p.args if isinstance(p, And) else (p,)):
            if q not in out:
                out.append(q)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(parts: Iterable[Formula]) -> Formula:
    out: list[Formula] = []
    for p in parts:
        if isinstance(p, Top):
            return TRUE
        if isinstance(p, Bottom):
            continue
        for q in (p.args if isinstance(p, Or) else (p,)):
            if q not in out:
                out.append(q)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def neg(phi: Formula) -> Formula:
    if isinstance(phi, Top):
        return FALSE
    if isinstance(phi, Bottom):
        return TRUE
    if isinstance(phi, Not):
        return phi.arg
    return Not(phi)


def iff(a: Formula, b: Formula) -> Formula:
    return And((Implies(a, b), Implies(b, a)))


def in_image(i: int, u: Term) -> Formula:
    """``f_i(g_i(u)) = u``: holds exactly when ``u`` lies in the image of f_i."""
    return Eq(normalize_term(F(i, G(i, u))), u)


def fresh_name(base: str, taken: Iterable[str]) -> str:
    used = set(taken)
    if base not in used:
        return base
    k = 1
    while f"{base}_{k}" in used:
        k += 1
    return f"{base}_{k}"


# ---------------------------------------------------------------------------
# generated substructures


@dataclass(frozen=True)
class SubstructureTable:
    """Closure of a set of generator terms under ``0``, ``f_i`` and ``g_i``."""

    n: int
    by_sort: tuple[tuple[Term, ...], ...]

    def terms(self, sort: int | None = None) -> tuple[Term, ...]:
        if sort is not None:
            return self.by_sort[sort]
        return tuple(t for group in self.by_sort for t in group)

    def __contains__(self, t: object) -> bool:
        return any(t in group for group in self.by_sort)

    def __len__(self) -> int:
        return sum(len(g) for g in self.by_sort)

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms())


def _term_key(t: Term) -> tuple:
    return (term_depth(t), str(t))


def generated_substructure(gens: Iterable[Term], n: int) -> SubstructureTable:
    """Return the finite table of normal-form terms generated by ``gens``."""
    seen: set[Term] = set()
    todo: list[Term] = [ZERO] + [normalize_term(g) for g in gens]
    while todo:
        t = todo.pop()
        if t in seen:
            continue
        seen.add(t)
        if t.sort == 0:
            todo.extend(F(j, t) for j in range(1, n + 1))
        else:
            todo.append(normalize_term(G(t.sort, t)))
    groups = [[] for _ in range(n + 1)]
    for t in seen:
        groups[t.sort].append(t)
    return SubstructureTable(n, tuple(tuple(sorted(g, key=_term_key)) for g in groups))
