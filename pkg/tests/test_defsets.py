from __future__ import annotations

import random

import pytest

from von.defsets import (
    CellId, Grid, NotInteriorPoint, Verdict, arrangement, canonical_decomposition, cell_member,
    decompose_grid, maximal_multi_interval, verify_decomposition,
)
from von.field import QSqrt2Model
from von.generic import GenericModel
from von.model import NEG_INF, POS_INF, MultiInterval
from von.parser import parse
from von.syntax import Var

from oracles import (
    brute_force_maximal, equivalent_presentation, interesting_unary, random_params,
)

x = Var("x", 0)
P, Q = Var("p", 0), Var("q", 0)
A, B, C, D = Var("a", 1), Var("b", 1), Var("c", 2), Var("d", 2)


def fml(text):
    return parse(text, 2, {"x": 0, "p": 0, "q": 0, "a": 1, "b": 1, "c": 2, "d": 2})


def box_params(m):
    """a < b in R1 and c < d in R2, all images, plus a point p outside the box."""
    a = m.apply_f(1, m.zero())
    b = m.sample_interval(1, a, POS_INF, want_image=True)
    c = m.apply_f(2, m.zero())
    d = m.sample_interval(2, c, POS_INF, want_image=True)
    p = m.sample_multi_interval(MultiInterval(((b, POS_INF), (NEG_INF, POS_INF))))
    return {A: a, B: b, C: c, D: d, P: p}


def test_arrangement_of_one_point(model2):
    m = model2
    p = m.sample_multi_interval(MultiInterval.full(2), exclude=[m.zero()])
    arr = arrangement(fml("f1(p) <1 f1(x)"), x, {P: p}, m)
    for i in (1, 2):
        assert set(arr.points[i]) == {m.apply_f(i, p), m.apply_f(i, m.zero())}


def test_arrangement_rejects_quantified_input(model2):
    with pytest.raises(ValueError):
        arrangement(fml("exists y:R0. x = y"), x, {}, model2)


def test_true_and_point_cells(model2):
    m = model2
    p = m.sample_multi_interval(MultiInterval.full(2), exclude=[m.zero()])
    g = Grid(fml("true"), x, {P: p}, m)
    assert all(g.gap_in(c) for c in g.gap_cells())
    g = Grid(fml("x = p"), x, {P: p}, m)
    assert not any(g.gap_in(c) for c in g.gap_cells())
    assert g.pin_in(p) and not g.pin_in(m.zero())


def test_cell_member_examples(model2):
    m = model2
    p = m.sample_multi_interval(MultiInterval.full(2), exclude=[m.zero()])
    q = m.sample_multi_interval(MultiInterval.full(2), exclude=[m.zero(), p])
    params = {P: p, Q: q}
    phi = fml("x = p | f1(q) <1 f1(x)")
    g = Grid(phi, x, params, m)
    pin_p = CellId(tuple(g.arr.position(i, m.apply_f(i, p)) for i in (1, 2)))
    assert cell_member(pin_p, phi, x, params, m) is Verdict.IN
    mixed = CellId((g.arr.position(1, m.apply_f(1, p)), g.arr.position(2, m.apply_f(2, q))))
    assert cell_member(mixed, phi, x, params, m) is Verdict.EMPTY
    half = CellId((g.arr.position(1, m.apply_f(1, p)), ("G", 0)))
    assert cell_member(half, phi, x, params, m) is Verdict.EMPTY


def test_all_gap_verdict_does_not_depend_on_the_sample():
    phi = fml("a <1 f1(x)")
    for seed in range(5):
        m = GenericModel(2, seed)
        a = m.sample_interval(1, NEG_INF, POS_INF, want_image=False)
        verdicts = []
        for _ in range(2):
            g = Grid(phi, x, {A: a}, m)
            m.random_element(0, random.Random(seed))
            verdicts.append([g.cell_verdict(CellId((("G", i), ("G", j))))
                             for i in range(len(g.arr.points[1]) + 1)
                             for j in range(len(g.arr.points[2]) + 1)])
        assert verdicts[0] == verdicts[1]


def test_single_box_is_its_own_maximal_multi_interval(model2):
    m = model2
    ps = box_params(m)
    phi = fml("a <1 f1(x) & f1(x) <1 b & c <2 f2(x) & f2(x) <2 d")
    box = MultiInterval(((ps[A], ps[B]), (ps[C], ps[D])))
    e = m.sample_multi_interval(box)
    assert maximal_multi_interval(phi, x, ps, e, m) == box


def test_union_of_two_boxes_sharing_sort_one():
    m = GenericModel(2, 4)
    a = m.apply_f(1, m.zero())
    b = m.sample_interval(1, a, POS_INF, want_image=True)
    c = m.apply_f(2, m.zero())
    d = m.sample_interval(2, c, POS_INF, want_image=True)
    params = {A: a, B: b, C: c, D: d}
    # (a, b) x (-inf, d) union (a, b) x (c, +inf) covers (a, b) x everything
    phi = fml("(a <1 f1(x) & f1(x) <1 b & f2(x) <2 d) | (a <1 f1(x) & f1(x) <1 b & c <2 f2(x))")
    e = m.sample_multi_interval(MultiInterval(((a, b), (c, d))))
    got = maximal_multi_interval(phi, x, params, e, m)
    assert got == MultiInterval(((a, b), (NEG_INF, POS_INF)))
    assert got == brute_force_maximal(phi, x, params, e, m)


def test_complement_of_a_point_clips_only_the_last_sort(model2):
    m = model2
    p = m.sample_multi_interval(MultiInterval.full(2), exclude=[m.zero()])
    phi = fml("x != p")
    params = {P: p}
    e = m.sample_multi_interval(MultiInterval.full(2), exclude=[m.zero(), p])
    got = maximal_multi_interval(phi, x, params, e, m)
    assert got[1] == (NEG_INF, POS_INF)
    assert m.apply_f(2, p) in got[2]
    assert got == brute_force_maximal(phi, x, params, e, m)


def test_exceptional_point_raises(model2):
    m = model2
    p = m.sample_multi_interval(MultiInterval.full(2), exclude=[m.zero()])
    with pytest.raises(NotInteriorPoint):
        maximal_multi_interval(fml("x = p"), x, {P: p}, p, m)


def test_box_with_an_outside_point(model2):
    m = model2
    ps = box_params(m)
    phi = fml("(a <1 f1(x) & f1(x) <1 b & c <2 f2(x) & f2(x) <2 d) | x = p")
    dec = canonical_decomposition(phi, x, ps, m)
    assert dec.points == (ps[P],)
    assert dec.intervals == (MultiInterval(((ps[A], ps[B]), (ps[C], ps[D]))),)
    assert verify_decomposition(dec, Grid(phi, x, ps, m)) == []
    assert dec.to_json(m)["points"] == [m.serialize(ps[P])]


def test_false_and_true(model2):
    m = model2
    empty = canonical_decomposition(fml("false"), x, {}, m)
    assert empty.points == () and empty.intervals == ()
    full = canonical_decomposition(fml("true"), x, {}, m)
    assert full.points == () and full.intervals == (MultiInterval.full(2),)
    assert full.to_json(m) == {"points": [], "intervals": [[["-inf", "+inf"], ["-inf", "+inf"]]]}


@pytest.mark.parametrize("seed", range(40))
def test_random_decompositions_are_canonical(seed):
    rng = random.Random(seed)
    m = QSqrt2Model(seed) if seed % 4 == 0 else GenericModel(rng.randint(1, 3), seed)
    params = random_params(m, rng)
    phi = interesting_unary(m, x, params, rng, qdepth=seed % 2)
    grid = Grid(phi, x, params, m)
    dec = decompose_grid(grid)
    assert verify_decomposition(dec, grid) == []
    closure = m.closure(params.values())
    for e in dec.extremities():
        assert e in closure[e.sort]
    # semantic correctness on every cell representative
    for e in list(grid.pinned):
        assert dec.contains(m, e) == grid.holds(e)
    for gaps in grid.gap_cells():
        rep = m.sample_multi_interval(grid.arr.cell_interval(gaps), exclude=grid.arr.points[0])
        assert dec.contains(m, rep) == grid.holds(rep)


def small_instance(rng, seed):
    m = GenericModel(rng.randint(1, 2), seed) if seed % 3 else QSqrt2Model(seed)
    for _ in range(20):
        params = random_params(m, rng, k=rng.choice([1, 1, 2]))
        closure = m.closure(params.values())
        if all(len(closure[i]) <= 3 for i in range(1, m.n + 1)):
            return m, params
    return m, {}


@pytest.mark.parametrize("seed", range(40))
def test_maximal_multi_interval_matches_brute_force(seed):
    rng = random.Random(1000 + seed)
    m, params = small_instance(rng, seed)
    phi = interesting_unary(m, x, params, rng)
    grid = Grid(phi, x, params, m)
    points = list(grid.pinned)
    for gaps in grid.gap_cells():
        points.append(m.sample_multi_interval(grid.arr.cell_interval(gaps), exclude=grid.arr.points[0]))
    for e in points:
        if not grid.holds(e):
            continue
        expected = brute_force_maximal(phi, x, params, e, m)
        if expected is None:
            with pytest.raises(NotInteriorPoint):
                maximal_multi_interval(phi, x, params, e, m)
        else:
            assert maximal_multi_interval(phi, x, params, e, m) == expected


@pytest.mark.parametrize("seed", range(30))
def test_equivalent_presentations_give_identical_decompositions(seed):
    rng = random.Random(2000 + seed)
    m = GenericModel(rng.randint(1, 3), seed) if seed % 3 else QSqrt2Model(seed)
    params = random_params(m, rng)
    phi = interesting_unary(m, x, params, rng)
    psi, params2, trail = equivalent_presentation(phi, x, params, m, rng)
    a = canonical_decomposition(phi, x, params, m).to_json(m)
    b = canonical_decomposition(psi, x, params2, m).to_json(m)
    assert a == b, trail
