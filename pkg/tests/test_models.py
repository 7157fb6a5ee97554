from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from von.axioms import axiom_check
from von.field import FieldElem, QSqrt2Model, RationalWindow, Sign, parse_field_elem, sign_under
from von.generic import GenericModel
from von.model import (
    NEG_INF, POS_INF, Arrangement, ContractViolation, Element, MultiInterval, candidate_points,
    evaluate,
)
from von.parser import parse
from von.syntax import Var

BACKENDS = ["generic1", "generic2", "generic3", "qsqrt2"]


def make(name, seed=0):
    if name == "qsqrt2":
        return QSqrt2Model(seed)
    return GenericModel(int(name[-1]), seed)


# ---------------------------------------------------------------------------
# backend contract


@pytest.mark.parametrize("name", BACKENDS)
def test_retraction_laws_on_samples(name):
    m = make(name)
    rng = random.Random(1)
    z = m.zero()
    for _ in range(300):
        i = rng.randint(1, m.n)
        x = m.random_element(0, rng)
        assert m.apply_g(i, m.apply_f(i, x)) == x
        y = m.random_element(i, rng)
        image = m.in_image(i, y)
        assert image == (m.apply_f(i, m.apply_g(i, y)) == y)
        if not image:
            assert m.apply_g(i, y) == z
    assert m.apply_g(1, m.apply_f(1, z)) == z


@pytest.mark.parametrize("name", BACKENDS)
def test_orders_are_strict_total_dense_and_unbounded(name):
    m = make(name)
    rng = random.Random(2)
    for _ in range(1000):
        i = rng.randint(1, m.n)
        a, b, c = (m.random_element(i, rng) for _ in range(3))
        assert m.compare(i, a, a) == 0
        assert m.compare(i, a, b) == -m.compare(i, b, a)
        assert (m.compare(i, a, b) == 0) == (a == b)
        if m.less(i, a, b) and m.less(i, b, c):
            assert m.less(i, a, c)
    for _ in range(100):
        i = rng.randint(1, m.n)
        a, b = m.random_element(i, rng), m.random_element(i, rng)
        if a == b:
            continue
        lo, hi = (a, b) if m.less(i, a, b) else (b, a)
        for want in (True, False):
            z = m.sample_interval(i, lo, hi, want_image=want)
            assert m.inside(i, z, lo, hi) and m.in_image(i, z) == want
        assert m.less(i, lo, m.sample_interval(i, lo, POS_INF, want_image=False))
        assert m.less(i, m.sample_interval(i, NEG_INF, lo, want_image=True), lo)


@pytest.mark.parametrize("name", BACKENDS)
def test_samplers_respect_exclusions(name):
    m = make(name)
    target = MultiInterval.full(m.n)
    got = []
    for _ in range(10):
        got.append(m.sample_multi_interval(target, exclude=got))
    assert len(set(got)) == 10
    ys = []
    for _ in range(10):
        ys.append(m.sample_interval(1, NEG_INF, POS_INF, want_image=False, exclude=ys))
    assert len(set(ys)) == 10


def test_cross_sort_use_is_a_contract_violation(model2):
    x = model2.random_element(0, random.Random(0))
    with pytest.raises(ContractViolation):
        model2.compare(1, x, x)
    with pytest.raises(ContractViolation):
        model2.apply_g(1, x)


def test_cross_instance_use_is_a_contract_violation():
    a, b = GenericModel(2, 0), QSqrt2Model(0)
    y = b.random_element(1, random.Random(0))
    with pytest.raises(ContractViolation):
        a.compare(1, y, y)
    stranger = GenericModel(2, 0)
    for _ in range(5):
        stranger.random_element(1, random.Random(3))
    fresh = stranger.order(1)[-1]
    if fresh not in a.order(1):
        with pytest.raises(ContractViolation):
            a.compare(1, fresh, fresh)


def test_evaluation_examples(model2):
    m = model2
    a = m.apply_f(1, m.zero())
    b = m.sample_interval(1, a, POS_INF, want_image=bool(random.Random(0).randrange(2)))
    A, B = Var("a", 1), Var("b", 1)
    assert evaluate(parse("a <1 b", 2), {A: a, B: b}, m)
    y = m.sample_interval(1, NEG_INF, POS_INF, want_image=False)
    assert not evaluate(parse("exists x:R0. f1(x) = y", 2), {Var("y", 1): y}, m)


def test_partial_assignment_is_a_contract_violation(model2):
    with pytest.raises(ContractViolation):
        evaluate(parse("exists x:R0. f1(x) <1 a", 2), {}, model2)
    with pytest.raises(ContractViolation):
        evaluate(parse("a <1 b", 2), {Var("a", 1): model2.apply_f(1, model2.zero())}, model2)


def test_candidates_meet_every_cell(model2):
    m = model2
    rng = random.Random(5)
    params = [m.random_element(s, rng) for s in (0, 1, 2)]
    arr = Arrangement.of(m, params)
    xs = list(candidate_points(m, Var("x", 0), params))
    cells = {tuple(arr.position(i, m.apply_f(i, x)) for i in (1, 2)) for x in xs}
    for c in arr.multi_cells():
        assert tuple(("G", g) for g in c) in cells
    ys = list(candidate_points(m, Var("y", 1), params))
    for g in range(len(arr.points[1]) + 1):
        kinds = {m.in_image(1, y) for y in ys if arr.position(1, y) == ("G", g)}
        assert kinds == {True, False}


def test_arrangement_positions_and_gaps(model2):
    m = model2
    rng = random.Random(6)
    arr = Arrangement.of(m, [m.random_element(0, rng)])
    for i in (1, 2):
        pts = arr.points[i]
        assert all(m.less(i, a, b) for a, b in zip(pts, pts[1:]))
        assert len(arr.gaps(i)) == len(pts) + 1
        for k, y in enumerate(pts, start=1):
            assert arr.position(i, y) == ("P", k)


# ---------------------------------------------------------------------------
# generic backend


def test_first_extension_sits_alone_beyond_the_constants():
    m = GenericModel(2)
    x = m.extend_r0(MultiInterval.full(2))
    for i in (1, 2):
        assert set(m.order(i)) == {m.apply_f(i, m.zero()), m.apply_f(i, x)}


def test_extension_in_a_pinned_gap():
    m = GenericModel(1)
    lo = m.apply_f(1, m.zero())
    top = m.apply_f(1, m.extend_r0(MultiInterval(((lo, POS_INF),))))
    x = m.extend_r0(MultiInterval(((lo, top),)))
    assert m.order(1) == [lo, m.apply_f(1, x), top]


def test_nested_shrinking_targets():
    m = GenericModel(2, 3)
    target = MultiInterval.full(2)
    seen = []
    for _ in range(100):
        x = m.extend_r0(target)
        seen.append(x)
        assert m.in_multi_interval(x, target)
        target = MultiInterval(tuple((lo, m.apply_f(i, x)) for i, (lo, _) in enumerate(target.bounds, 1)))
        m.validate()
    assert len(set(seen)) == 100


def test_non_image_insertion_and_alternation():
    m = GenericModel(1)
    a = m.apply_f(1, m.zero())
    b = m.apply_f(1, m.extend_r0(MultiInterval(((a, POS_INF),))))
    before = len(m.order(1))
    y = m.extend_ri(1, a, b, non_image=True)
    assert len(m.order(1)) == before + 1 and not m.in_image(1, y)
    assert m.in_image(1, m.extend_ri(1, a, b, non_image=False))
    lo, kinds = a, []
    for k in range(10):
        y = m.extend_ri(1, lo, b, non_image=k % 2 == 0)
        kinds.append(m.in_image(1, y))
        lo = y
    inside = [m.in_image(1, y) for y in m.order(1) if m.less(1, a, y) and m.less(1, y, b)]
    assert kinds == [k % 2 == 1 for k in range(10)]
    assert inside[:10] == kinds


def test_snapshot_restore_lifo_and_replay():
    m = GenericModel(2, 9)
    rng = random.Random(0)
    for _ in range(5):
        m.random_element(rng.randint(0, 2), rng)
    sizes = [len(m.order(i)) for i in (1, 2)]
    digest = m.digest()
    t1 = m.snapshot()
    first = [m.random_element(1, random.Random(4)) for _ in range(3)]
    t2 = m.snapshot()
    m.random_element(0, rng)
    with pytest.raises(ContractViolation):
        m.restore(t1)
    m.restore(t2)
    m.restore(t1)
    assert [len(m.order(i)) for i in (1, 2)] == sizes and m.digest() == digest
    stale = [e for e in first if e not in m.order(1)]
    for e in stale:
        with pytest.raises(ContractViolation):
            m.compare(1, e, e)
    again = [m.random_element(1, random.Random(4)) for _ in range(3)]
    assert again == first


def test_dump_load_round_trip_and_determinism():
    def build():
        m = GenericModel(3, 5)
        rng = random.Random(8)
        for _ in range(60):
            m.random_element(rng.randint(0, 3), rng)
        return m
    m1, m2 = build(), build()
    assert m1.digest() == m2.digest()
    doc = json.loads(json.dumps(m1.dump()))
    m3 = GenericModel.load(doc)
    m3.validate()
    assert m3.dump() == m1.dump()
    for i in (1, 2, 3):
        assert m3.order(i) == m1.order(i)


def test_random_request_fuzzing_keeps_the_state_valid():
    m = GenericModel(3, 1)
    rng = random.Random(2)
    for step in range(10_000):
        i = rng.randint(1, 3)
        if rng.randrange(3):
            lo, hi = m._random_gap(i, rng)
            y = m.extend_ri(i, lo, hi, non_image=bool(rng.randrange(2)))
            assert m.inside(i, y, lo, hi)
        else:
            target = MultiInterval(tuple(m._random_gap(j, rng) for j in (1, 2, 3)))
            assert m.in_multi_interval(m.extend_r0(target), target)
        if step % 2000 == 0:
            m.validate()
    m.validate()


# ---------------------------------------------------------------------------
# Q(sqrt2) backend


def test_field_compare_examples(field):
    one_plus = field.element(1, 1, 1, 0)
    root3 = field.element(1, 0, 0, 1)
    assert field.compare(1, one_plus, root3) == 1
    f0 = field.apply_f(1, field.zero())
    assert field.compare(1, f0, f0) == 0


def test_field_image_flags(field):
    assert not field.in_image(1, field.element(1, 2, 3, 1))
    assert field.in_image(2, field.element(2, 2, 3, 0))
    y = field.element(1, 5, 1, 1)
    assert field.apply_g(1, y) == field.zero()


@pytest.mark.parametrize("i,triple,sign", [
    (1, (0, 1, 0), Sign.POS), (2, (0, 1, 0), Sign.NEG), (1, (-1, 0, 1), Sign.POS),
    (1, (0, 0, 0), Sign.ZERO), (2, (0, 0, 0), Sign.ZERO),
])
def test_sign_examples(i, triple, sign):
    a, b, c = triple
    if c in (0, 1):
        assert sign_under(i, FieldElem(Fraction(a), Fraction(b), c)) == sign


def test_orders_disagree(field):
    x, y = field.zero(), field.element(0, 0, 1)
    assert field.less(1, field.apply_f(1, x), field.apply_f(1, y))
    assert field.less(2, field.apply_f(2, y), field.apply_f(2, x))


def test_weak_approximation_examples(field):
    e = lambda s, a, b=0: field.element(s, a, b)
    w = field.weak_approx_sample(e(1, 0), e(1, 1), e(2, 0), e(2, 1))
    assert w.c == 0 and 0 < w.a < 1
    w = field.weak_approx_sample(e(1, 0), e(1, 1), e(2, -1), e(2, 0))
    x = Element(0, w)
    target = MultiInterval(((e(1, 0), e(1, 1)), (e(2, -1), e(2, 0))))
    assert field.in_multi_interval(x, target)
    w2 = field.weak_approx_sample(e(1, 0), e(1, 1), e(2, -1), e(2, 0), exclude=[x])
    assert w2 != w and field.in_multi_interval(Element(0, w2), target)


def test_field_serialization_round_trip(field):
    rng = random.Random(0)
    for _ in range(200):
        s = rng.randint(0, 2)
        e = field.random_element(s, rng)
        assert field.parse_element(field.serialize(e), s) == e
        assert FieldElem.from_json(e.value.to_json()) == e.value
    assert parse_field_elem("sqrt3 - 1") == FieldElem(Fraction(-1), Fraction(0), 1)
    assert parse_field_elem("1/2 + -3/4*sqrt2") == FieldElem(Fraction(1, 2), Fraction(-3, 4), 0)
    with pytest.raises(ContractViolation):
        field.parse_element("1 + sqrt3", 0)
    with pytest.raises(ValueError):
        parse_field_elem("2*sqrt3")


def test_rational_windows_shrink():
    from von.field import sqrt_window
    prev = None
    for bits in (4, 8, 16, 32):
        w = sqrt_window(2, bits)
        assert w.lo * w.lo <= 2 <= w.hi * w.hi
        if prev is not None:
            assert w.width < prev.width
        prev = w
    with pytest.raises(ValueError):
        RationalWindow(Fraction(1), Fraction(0))


@pytest.mark.parametrize("axiom", [2, 4, 5])
def test_field_axiom_examples(field, axiom):
    assert axiom_check(field, axiom, trials=1000, seed=3).ok


@given(st.integers(-10**6, 10**6), st.integers(1, 10**4), st.integers(-10**6, 10**6),
       st.integers(1, 10**4), st.integers(0, 1))
def test_sign_is_consistent_with_negation(an, ad, bn, bd, c):
    e = FieldElem(Fraction(an, ad), Fraction(bn, bd), c)
    for i in (1, 2):
        s = sign_under(i, e)
        if c == 0:
            assert sign_under(i, FieldElem(-e.a, -e.b, 0)) == -s
        assert (s == Sign.ZERO) == (e.a == 0 and e.b == 0 and c == 0)
