"""Canonical decomposition of definable subsets of R0.

Let ``E = {x in R0 : phi(x)}`` with ``phi`` quantifier-free over parameters
``A``. Cut every ordered sort at the points of ``<A>``. A point ``x`` of R0
outside ``<A>`` has all its images in open gaps, and the truth of ``phi`` only
depends on which gaps; a point of ``<A>`` is pinned in every sort. So ``E``
is a union of gap-product cells plus finitely many pinned points, and all
the work happens on this finite grid.

Grid coordinates for sort ``i`` with ``k`` points use the extended index
``0 .. k+1`` (0 is -inf, k+1 is +inf); gap ``g`` lies between extended
indices ``g`` and ``g + 1``.
"""
from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .model import (
    Arrangement, Element, Endpoint, Infinity, Model, MultiInterval, evaluate,
)
from .syntax import Formula, Var, free_vars, is_quantifier_free

Position = tuple[str, int]  # ("P", point index 1..k) or ("G", gap index 0..k)


class NotInteriorPoint(ValueError):
    pass


class Verdict(enum.Enum):
    IN = "in"
    OUT = "out"
    EMPTY = "empty"


@dataclass(frozen=True)
class CellId:
    """Per-sort position of a product cell, sort 1 first."""

    coords: tuple[Position, ...]

    @property
    def all_gaps(self) -> bool:
        return all(kind == "G" for kind, _ in self.coords)


def _check_input(phi: Formula, x: Var, params: Mapping[Var, Element]) -> None:
    if not is_quantifier_free(phi):
        raise ValueError("expected a quantifier-free formula; run eliminate first")
    if x.sort != 0:
        raise ValueError("definable sets here live in R0")
    extra = free_vars(phi) - {x} - set(params)
    if extra:
        raise ValueError(f"parameters missing for {', '.join(sorted(v.name for v in extra))}")


def arrangement(phi: Formula, x: Var, params: Mapping[Var, Element], model: Model) -> Arrangement:
    _check_input(phi, x, params)
    return Arrangement.of(model, params.values())


class Grid:
    """The finite grid of ``<params>`` with cached membership of ``E = phi(model)``."""

    def __init__(self, phi: Formula, x: Var, params: Mapping[Var, Element], model: Model):
        _check_input(phi, x, params)
        self.phi, self.x, self.params, self.model = phi, x, dict(params), model
        self.arr = Arrangement.of(model, params.values())
        self.n = model.n
        self.k = [0] + [len(self.arr.points[i]) for i in range(1, self.n + 1)]
        self.pinned: dict[Element, tuple[int, ...]] = {}
        for e in self.arr.points[0]:
            pos = self.positions(e)
            self.pinned[e] = tuple(p for _, p in pos)
        self._by_coords = {v: e for e, v in self.pinned.items()}
        self._gap_cache: dict[tuple[int, ...], bool] = {}
        self._pin_cache: dict[Element, bool] = {}

    # membership ------------------------------------------------------

    def holds(self, e: Element) -> bool:
        asg = dict(self.params)
        asg[self.x] = e
        return evaluate(self.phi, asg, self.model)

    def gap_in(self, gaps: tuple[int, ...]) -> bool:
        hit = self._gap_cache.get(gaps)
        if hit is None:
            token = self.model.snapshot()
            try:
                rep = self.model.sample_multi_interval(self.arr.cell_interval(gaps),
                                                       exclude=self.arr.points[0])
                hit = self.holds(rep)
            finally:
                self.model.restore(token)
            self._gap_cache[gaps] = hit
        return hit

    def pin_in(self, e: Element) -> bool:
        hit = self._pin_cache.get(e)
        if hit is None:
            hit = self._pin_cache[e] = self.holds(e)
        return hit

    def positions(self, e: Element) -> tuple[Position, ...]:
        return tuple(self.arr.position(i, self.model.apply_f(i, e))
                     for i in range(1, self.n + 1))

    def gap_cells(self) -> Iterable[tuple[int, ...]]:
        return self.arr.multi_cells()

    def cell_verdict(self, cell: CellId) -> Verdict:
        if cell.all_gaps:
            return Verdict.IN if self.gap_in(tuple(g for _, g in cell.coords)) else Verdict.OUT
        if not all(kind == "P" for kind, _ in cell.coords):
            return Verdict.EMPTY  # pinned in one sort forces x into <A>, pinned everywhere
        e = self._by_coords.get(tuple(p for _, p in cell.coords))
        if e is None:
            return Verdict.EMPTY
        return Verdict.IN if self.pin_in(e) else Verdict.OUT

    # products of per-sort grid intervals ------------------------------

    def tiny(self, pos: Position) -> tuple[int, int]:
        """Smallest grid interval (extended indices) around a position."""
        kind, k = pos
        return (k, k + 1) if kind == "G" else (k - 1, k + 1)

    def product_inside(self, spans: Sequence[tuple[int, int]]) -> bool:
        """Is the multi-interval with these extended-index spans contained in E?"""
        gap_ranges = [range(lo, hi) for lo, hi in spans]
        for gaps in itertools.product(*gap_ranges):
            if not self.gap_in(gaps):
                return False
        for e, coords in self.pinned.items():
            if all(lo < p < hi for p, (lo, hi) in zip(coords, spans)):
                if not self.pin_in(e):
                    return False
        return True

    def interior(self, pos: Sequence[Position]) -> bool:
        return self.product_inside([self.tiny(p) for p in pos])

    def maximal_spans(self, pos: Sequence[Position]) -> list[tuple[int, int]]:
        """Lexicographically maximal spans around a point with grid position ``pos``."""
        if not self.interior(pos):
            raise NotInteriorPoint("no multi-interval around this point lies inside the set")
        spans = [self.tiny(p) for p in pos]
        for m in range(self.n):
            lo0, hi0 = spans[m]

            def ok(lo: int, hi: int) -> bool:
                trial = list(spans)
                trial[m] = (lo, hi)
                return self.product_inside(trial)

            lo = lo0
            while lo > 0 and ok(lo - 1, hi0):
                lo -= 1
            hi = hi0
            while hi < self.k[m + 1] + 1 and ok(lo0, hi + 1):
                hi += 1
            spans[m] = (lo, hi)
        return spans

    def to_multi_interval(self, spans: Sequence[tuple[int, int]]) -> MultiInterval:
        return MultiInterval(tuple((self.arr.extended(i)[lo], self.arr.extended(i)[hi])
                                   for i, (lo, hi) in enumerate(spans, start=1)))


def cell_member(cell: CellId, phi: Formula, x: Var, params: Mapping[Var, Element],
                model: Model) -> Verdict:
    return Grid(phi, x, params, model).cell_verdict(cell)


def maximal_multi_interval(phi: Formula, x: Var, params: Mapping[Var, Element], e: Element,
                           model: Model) -> MultiInterval:
    """The maximal multi-interval inside ``phi(model)`` containing ``e``."""
    grid = Grid(phi, x, params, model)
    return grid.to_multi_interval(grid.maximal_spans(grid.positions(e)))


# ---------------------------------------------------------------------------
# canonical decomposition


def _endpoint_cmp(model: Model, i: int, a: Endpoint, b: Endpoint) -> int:
    if a == b:
        return 0
    return -1 if model.less(i, a, b) else 1


def interval_cmp(model: Model, p: MultiInterval, q: MultiInterval) -> int:
    for i in range(1, model.n + 1):
        for a, b in zip(p[i], q[i]):
            c = _endpoint_cmp(model, i, a, b)
            if c:
                return c
    return 0


def serialize_endpoint(model: Model, e: Endpoint) -> str:
    return e.value if isinstance(e, Infinity) else model.serialize(e)


def multi_interval_json(model: Model, mi: MultiInterval) -> list[list[str]]:
    return [[serialize_endpoint(model, lo), serialize_endpoint(model, hi)] for lo, hi in mi.bounds]


@dataclass
class CanonicalDecomposition:
    points: tuple[Element, ...]
    intervals: tuple[MultiInterval, ...]
    arrangement: Arrangement

    def to_json(self, model: Model) -> dict:
        return {
            "points": [model.serialize(e) for e in self.points],
            "intervals": [multi_interval_json(model, mi) for mi in self.intervals],
        }

    def contains(self, model: Model, e: Element) -> bool:
        return e in self.points or any(model.in_multi_interval(e, mi) for mi in self.intervals)

    def extremities(self) -> list[Element]:
        return [b for mi in self.intervals for pair in mi.bounds for b in pair
                if isinstance(b, Element)]


def decompose_grid(grid: Grid) -> CanonicalDecomposition:
    model = grid.model
    exceptional = []
    spans_seen: list[tuple[tuple[int, int], ...]] = []
    for e in grid.arr.points[0]:
        if not grid.pin_in(e):
            continue
        pos = tuple(("P", p) for p in grid.pinned[e])
        if grid.interior(pos):
            s = tuple(grid.maximal_spans(pos))
            if s not in spans_seen:
                spans_seen.append(s)
        else:
            exceptional.append(e)
    for gaps in grid.gap_cells():
        if grid.gap_in(gaps):
            s = tuple(grid.maximal_spans([("G", g) for g in gaps]))
            if s not in spans_seen:
                spans_seen.append(s)
    intervals = [grid.to_multi_interval(s) for s in spans_seen]
    intervals.sort(key=functools.cmp_to_key(lambda p, q: interval_cmp(model, p, q)))
    points = model.sorted_elements(0, exceptional)
    return CanonicalDecomposition(tuple(points), tuple(intervals), grid.arr)


def canonical_decomposition(phi: Formula, x: Var, params: Mapping[Var, Element],
                            model: Model) -> CanonicalDecomposition:
    """Exceptional points plus maximal multi-intervals whose union is ``phi(model)``."""
    return decompose_grid(Grid(phi, x, params, model))


def verify_decomposition(dec: CanonicalDecomposition, grid: Grid) -> list[str]:
    """Check the four defining conditions of a canonical decomposition on the grid.

    Returns a list of violations (empty when the decomposition is canonical).
    """
    problems: list[str] = []
    model = grid.model
    spans_of = []
    for mi in dec.intervals:
        spans = []
        for i, (lo, hi) in enumerate(mi.bounds, start=1):
            ext = grid.arr.extended(i)
            if lo not in ext or hi not in ext:
                problems.append(f"extremity outside the generated substructure in sort {i}")
                return problems
            spans.append((ext.index(lo), ext.index(hi)))
        spans_of.append(tuple(spans))
        if not grid.product_inside(spans):
            problems.append(f"interval {multi_interval_json(model, mi)} not contained in the set")
    # 1: union equals the set, on every cell and pinned point
    for gaps in grid.gap_cells():
        covered = any(all(lo <= g < hi for g, (lo, hi) in zip(gaps, s)) for s in spans_of)
        if covered != grid.gap_in(gaps):
            problems.append(f"gap cell {gaps} membership mismatch")
    for e, coords in grid.pinned.items():
        covered = e in dec.points or any(
            all(lo < p < hi for p, (lo, hi) in zip(coords, s)) for s in spans_of)
        if covered != grid.pin_in(e):
            problems.append(f"point {model.serialize(e)} membership mismatch")
    # 2: exceptional points are not interior
    for e in dec.points:
        if grid.interior([("P", p) for p in grid.pinned[e]]):
            problems.append(f"exceptional point {model.serialize(e)} is interior")
    # 3 and 4: the intervals are exactly the maximal ones of non-exceptional points
    wanted = set()
    for gaps in grid.gap_cells():
        if grid.gap_in(gaps):
            wanted.add(tuple(grid.maximal_spans([("G", g) for g in gaps])))
    for e, coords in grid.pinned.items():
        if grid.pin_in(e) and e not in dec.points:
            wanted.add(tuple(grid.maximal_spans([("P", p) for p in coords])))
    if wanted != set(spans_of) or len(spans_of) != len(set(spans_of)):
        problems.append("intervals are not exactly the maximal multi-intervals")
    return problems
