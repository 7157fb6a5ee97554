"""Backend contract, multi-intervals, arrangements and the test-point evaluator.

The evaluator gives quantifiers a meaning without going through quantifier
elimination. Over parameters ``A``, a formula ``phi(x)`` can only compare the
``x``-terms against points of the generated substructure ``<A>``, so its truth
is constant on the cells cut out by those points. An existential is decided
by trying every point of ``<A>`` of the right sort together with one sampled
element per open cell:

* ``x`` of sort R0: one sample per product of gaps (a multi-cell);
* ``x`` of sort Ri: the image ``f_i(y)`` of one sample ``y`` per multi-cell,
  plus one non-image sample per gap of ``<A> ∩ Ri``.
"""
from __future__ import annotations

import enum
import functools
import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping, Sequence, Union

from .syntax import (
    And, Bottom, Eq, Exists, F, Forall, Formula, G, Implies, Lt, Neq,
    Not, Or, Term, Top, Var, Zero, free_vars, is_quantifier_free,
)


class ContractViolation(Exception):
    """A backend was used outside its contract (wrong sort, stale handle, ...)."""


class Infinity(enum.Enum):
    NEG = "-inf"
    POS = "+inf"

    def __repr__(self) -> str:
        return self.value


NEG_INF = Infinity.NEG
POS_INF = Infinity.POS


@dataclass(frozen=True)
class Element:
    sort: int
    value: Any


Endpoint = Union[Element, Infinity]
Assignment = Mapping[Var, Element]


@dataclass(frozen=True)
class MultiInterval:
    """``{x in R0 : lo_i <i f_i(x) <i hi_i for every i}``; ``bounds[i-1]`` is sort i."""

    bounds: tuple[tuple[Endpoint, Endpoint], ...]

    @classmethod
    def full(cls, n: int) -> "MultiInterval":
        return cls(tuple((NEG_INF, POS_INF) for _ in range(n)))

    def __getitem__(self, i: int) -> tuple[Endpoint, Endpoint]:
        return self.bounds[i - 1]

    @property
    def n(self) -> int:
        return len(self.bounds)

    def replace(self, i: int, lo: Endpoint, hi: Endpoint) -> "MultiInterval":
        b = list(self.bounds)
        b[i - 1] = (lo, hi)
        return MultiInterval(tuple(b))


class Model(ABC):
    """A model of the theory with sorts R0..Rn, accessed through elements."""

    n: int

    @abstractmethod
    def zero(self) -> Element: ...

    @abstractmethod
    def compare(self, i: int, a: Element, b: Element) -> int:
        """-1, 0 or 1 according to the order ``<i`` on sort ``i``."""

    @abstractmethod
    def apply_f(self, i: int, x: Element) -> Element: ...

    @abstractmethod
    def apply_g(self, i: int, y: Element) -> Element: ...

    @abstractmethod
    def in_image(self, i: int, y: Element) -> bool: ...

    @abstractmethod
    def sample_multi_interval(self, target: MultiInterval,
                              exclude: Iterable[Element] = ()) -> Element: ...

    @abstractmethod
    def sample_interval(self, i: int, lo: Endpoint, hi: Endpoint, want_image: bool,
                        exclude: Iterable[Element] = ()) -> Element: ...

    @abstractmethod
    def random_element(self, sort: int, rng) -> Element: ...

    @abstractmethod
    def serialize(self, e: Element) -> str: ...

    @abstractmethod
    def parse_element(self, text: str, sort: int) -> Element: ...

    # stateless backends need no backtracking
    def snapshot(self) -> Any:
        return None

    def restore(self, token: Any) -> None:
        pass

    # ------------------------------------------------------------------
    # derived operations

    def check(self, e: Element, sort: int) -> None:
        if not isinstance(e, Element) or e.sort != sort:
            raise ContractViolation(f"expected an element of sort R{sort}, got {e!r}")

    def less(self, i: int, a: Endpoint, b: Endpoint) -> bool:
        """Strict ``<i`` on elements extended by the two infinity markers."""
        if a is NEG_INF:
            return b is not NEG_INF
        if b is POS_INF:
            return a is not POS_INF
        if a is POS_INF or b is NEG_INF:
            return False
        return self.compare(i, a, b) < 0

    def inside(self, i: int, y: Element, lo: Endpoint, hi: Endpoint) -> bool:
        return self.less(i, lo, y) and self.less(i, y, hi)

    def in_multi_interval(self, x: Element, target: MultiInterval) -> bool:
        return all(self.inside(i, self.apply_f(i, x), *target[i]) for i in range(1, self.n + 1))

    def sort_key(self, i: int):
        return functools.cmp_to_key(lambda a, b: self.compare(i, a, b))

    def sorted_elements(self, i: int, elems: Iterable[Element]) -> list[Element]:
        if i == 0:
            # R0 is unordered; f_1 is injective, so <1 on images is canonical
            return sorted(elems, key=functools.cmp_to_key(
                lambda a, b: self.compare(1, self.apply_f(1, a), self.apply_f(1, b))))
        return sorted(elems, key=self.sort_key(i))

    def closure(self, elems: Iterable[Element]) -> list[set[Element]]:
        """Elements of the substructure generated by ``elems``, grouped by sort."""
        out: list[set[Element]] = [set() for _ in range(self.n + 1)]
        todo = [self.zero(), *elems]
        while todo:
            e = todo.pop()
            if e in out[e.sort]:
                continue
            out[e.sort].add(e)
            if e.sort == 0:
                todo.extend(self.apply_f(j, e) for j in range(1, self.n + 1))
            else:
                todo.append(self.apply_g(e.sort, e))
        return out

    def eval_term(self, t: Term, asg: Assignment) -> Element:
        if isinstance(t, Zero):
            return self.zero()
        if isinstance(t, Var):
            try:
                e = asg[t]
            except KeyError:
                raise ContractViolation(f"assignment does not cover {t.name}") from None
            self.check(e, t.sort)
            return e
        if isinstance(t, F):
            return self.apply_f(t.i, self.eval_term(t.arg, asg))
        if isinstance(t, G):
            return self.apply_g(t.i, self.eval_term(t.arg, asg))
        raise TypeError(t)


# ---------------------------------------------------------------------------
# arrangements


@dataclass
class Arrangement:
    """Sorted points of ``<A>`` in every sort together with the open gaps they cut."""

    model: Model
    points: tuple[tuple[Element, ...], ...]  # points[0]: <A> ∩ R0, canonical order

    @classmethod
    def of(cls, model: Model, elems: Iterable[Element]) -> "Arrangement":
        groups = model.closure(elems)
        pts = tuple(tuple(model.sorted_elements(s, g)) for s, g in enumerate(groups))
        return cls(model, pts)

    @property
    def n(self) -> int:
        return self.model.n

    def extended(self, i: int) -> list[Endpoint]:
        return [NEG_INF, *self.points[i], POS_INF]

    def gaps(self, i: int) -> list[tuple[Endpoint, Endpoint]]:
        ext = self.extended(i)
        return list(zip(ext, ext[1:]))

    def multi_cells(self) -> Iterable[tuple[int, ...]]:
        """Gap-index tuples, one entry per sort 1..n."""
        return itertools.product(*(range(len(self.points[i]) + 1) for i in range(1, self.n + 1)))

    def cell_interval(self, gaps: Sequence[int]) -> MultiInterval:
        return MultiInterval(tuple(self.gaps(i)[g] for i, g in enumerate(gaps, start=1)))

    def position(self, i: int, y: Element) -> tuple[str, int]:
        """``("P", k)`` if ``y`` is the k-th point (1-based), else ``("G", gap index)``."""
        pts = self.points[i]
        lo, hi = 0, len(pts)
        while lo < hi:
            mid = (lo + hi) // 2
            c = self.model.compare(i, pts[mid], y)
            if c == 0:
                return ("P", mid + 1)
            if c < 0:
                lo = mid + 1
            else:
                hi = mid
        return ("G", lo)


# ---------------------------------------------------------------------------
# evaluation


def candidate_points(model: Model, x: Var, params: Iterable[Element]) -> Iterator[Element]:
    """Finite set of values of ``x`` meeting every cell over ``params``.

    Points of the arrangement come first; cell samples are drawn lazily so a
    quantifier that is settled early never pays for the remaining samples.
    """
    arr = Arrangement.of(model, params)
    r0 = arr.points[0]
    i = x.sort
    if i == 0:
        yield from r0
        for c in arr.multi_cells():
            yield model.sample_multi_interval(arr.cell_interval(c), exclude=r0)
        return
    yield from arr.points[i]
    for lo, hi in arr.gaps(i):
        yield model.sample_interval(i, lo, hi, want_image=False, exclude=arr.points[i])
    for c in arr.multi_cells():
        yield model.apply_f(i, model.sample_multi_interval(arr.cell_interval(c), exclude=r0))


def evaluate(phi: Formula, asg: Assignment, model: Model) -> bool:
    """Truth of ``phi`` under ``asg``; quantifiers via finite test points."""
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bottom):
        return False
    if isinstance(phi, Eq):
        return model.eval_term(phi.lhs, asg) == model.eval_term(phi.rhs, asg)
    if isinstance(phi, Neq):
        return model.eval_term(phi.lhs, asg) != model.eval_term(phi.rhs, asg)
    if isinstance(phi, Lt):
        a, b = model.eval_term(phi.lhs, asg), model.eval_term(phi.rhs, asg)
        return model.compare(phi.i, a, b) < 0
    if isinstance(phi, Not):
        return not evaluate(phi.arg, asg, model)
    if isinstance(phi, And):
        return all(evaluate(a, asg, model) for a in phi.args)
    if isinstance(phi, Or):
        return any(evaluate(a, asg, model) for a in phi.args)
    if isinstance(phi, Implies):
        return (not evaluate(phi.lhs, asg, model)) or evaluate(phi.rhs, asg, model)
    if isinstance(phi, (Exists, Forall)):
        want = isinstance(phi, Exists)
        fv = free_vars(phi)
        for v in fv:
            if v not in asg:
                raise ContractViolation(f"assignment does not cover {v.name}")
        token = model.snapshot()
        try:
            for cand in candidate_points(model, phi.var, (asg[v] for v in fv)):
                inner = dict(asg)
                inner[phi.var] = cand
                if evaluate(phi.body, inner, model) == want:
                    return want
            return not want
        finally:
            model.restore(token)
    raise TypeError(f"not a formula: {phi!r}")


def eval_qf(phi: Formula, asg: Assignment, model: Model) -> bool:
    """Evaluate a quantifier-free formula (no sampling, no model growth)."""
    if not is_quantifier_free(phi):
        raise ValueError("eval_qf expects a quantifier-free formula")
    return evaluate(phi, asg, model)
