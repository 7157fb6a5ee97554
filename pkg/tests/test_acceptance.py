"""Acceptance suite: one test per criterion, summarized as PASS/FAIL lines."""
from __future__ import annotations

import random
import sys
from fractions import Fraction

import mpmath
import pytest

from von.axioms import AXIOMS, axiom_check
from von.cli import load_sentences
from von.defsets import Grid, NotInteriorPoint, canonical_decomposition, maximal_multi_interval
from von.field import FieldElem, QSqrt2Model, Sign, sign_triple, sign_under
from von.generic import GenericModel
from von.imaginaries import code_function, code_set, same_set, verify_function_code
from von.model import NEG_INF, POS_INF, evaluate, eval_qf
from von.parser import parse
from von.qe import decide, eliminate
from von.randgen import random_assignment, random_formula
from von.syntax import Var, free_vars, quantifier_depth

from oracles import brute_force_maximal, equivalent_presentation, interesting_unary, random_params
from test_float_audit import FILES, FloatTracer, findings, workload


def criterion(number: int, text: str):
    return pytest.mark.criterion(number=number, text=text)


@criterion(1, "QE soundness: 500 formulas x 20 assignments, generic backend")
def test_qe_soundness_oracle():
    rng = random.Random(20240501)
    checked, bad = 0, []
    for k in range(500):
        n = rng.choice([1, 2, 3])
        phi, free = random_formula(n, rng)
        assert len(free_vars(phi)) <= 3 and quantifier_depth(phi) <= 2
        qf = eliminate(phi)
        model = GenericModel(n, seed=k)
        for _ in range(20):
            asg = random_assignment(model, free, rng)
            checked += 1
            if evaluate(phi, asg, model) != eval_qf(qf, asg, model):
                bad.append(phi)
                break
    assert checked == 500 * 20 and bad == []


@criterion(2, "decide agrees with the Q(sqrt2) model on the fixed sentence suite")
def test_sentence_suite():
    suite = load_sentences()
    assert len(suite) >= 25
    assert {"axiom", "trivial", "derived"} == {s["tag"] for s in suite}
    for text in ["forall a:R1. forall b:R1. a <1 b -> exists c:R1. a <1 c & c <1 b",
                 "exists x:R0. f1(x) = f1(0) & x != 0",
                 "exists x:R1. g1(x) = 0 & ~(x = f1(0))"]:
        assert parse(text, 2) in [parse(s["sentence"], 2) for s in suite]
    model = QSqrt2Model(seed=0)
    bad = []
    for item in suite:
        phi = parse(item["sentence"], 2)
        if not decide(phi) == evaluate(phi, {}, model) == item["expected"]:
            bad.append(item["name"])
    assert bad == []


@criterion(3, "axioms 1-5, 1000 trials each, generic n=1,2,3 and qsqrt2: 0 failures")
def test_axiom_suites():
    bad = []
    for name, make in [("generic1", lambda: GenericModel(1, 1)), ("generic2", lambda: GenericModel(2, 2)),
                       ("generic3", lambda: GenericModel(3, 3)), ("qsqrt2", lambda: QSqrt2Model(4))]:
        for k in sorted(AXIOMS):
            report = axiom_check(make(), k, trials=1000, seed=k)
            assert report.trials == 1000
            bad.extend(f"{name} axiom {k}: {msg}" for msg in report.failures)
    assert bad == []


def _random_endpoint(model, sort, rng):
    if rng.randrange(12) == 0:
        return rng.choice([NEG_INF, POS_INF])
    return model.random_element(sort, rng)


def _above(i: int, x: FieldElem, bound) -> bool:
    """Exact ``bound < sigma_i(x)`` from the sign of the difference."""
    if bound is NEG_INF:
        return True
    if bound is POS_INF:
        return False
    v = bound.value
    return sign_triple(i, x.a - v.a, x.b - v.b, x.c - v.c) is Sign.POS


def _below(i: int, x: FieldElem, bound) -> bool:
    if bound is POS_INF:
        return True
    if bound is NEG_INF:
        return False
    v = bound.value
    return sign_triple(i, v.a - x.a, v.b - x.b, v.c - x.c) is Sign.POS


def _nonempty(model, i, lo, hi) -> bool:
    if lo is POS_INF or hi is NEG_INF:
        return False
    if lo is NEG_INF or hi is POS_INF:
        return True
    return model.less(i, lo, hi)


@criterion(4, "weak approximation: 1000 nonempty interval pairs, exactly verified witnesses")
def test_weak_approximation():
    rng = random.Random(77)
    model = QSqrt2Model(seed=7)
    done = 0
    while done < 1000:
        pair = []
        for i in (1, 2):
            lo = _random_endpoint(model, i, rng)
            if lo is not POS_INF and lo is not NEG_INF and rng.randrange(3) == 0:
                # a very narrow interval above lo
                eps = Fraction(1, 10 ** rng.randint(3, 12))
                v = lo.value
                hi = model.element(i, v.a + eps, v.b, v.c)
            else:
                hi = _random_endpoint(model, i, rng)
            pair.append((lo, hi))
        (lo1, hi1), (lo2, hi2) = pair
        if not all(_nonempty(model, i, lo, hi) for i, (lo, hi) in ((1, pair[0]), (2, pair[1]))):
            continue
        w = model.weak_approx_sample(lo1, hi1, lo2, hi2)
        assert w.c == 0
        assert _above(1, w, lo1) and _below(1, w, hi1), (pair, w)
        assert _above(2, w, lo2) and _below(2, w, hi2), (pair, w)
        done += 1


@criterion(5, "canonical decompositions: 200 equivalent pairs identical; maximal boxes match brute force")
def test_decomposition_uniqueness():
    x = Var("x", 0)
    for seed in range(200):
        rng = random.Random(50000 + seed)
        m = GenericModel(rng.randint(1, 3), seed) if seed % 3 else QSqrt2Model(seed)
        params = random_params(m, rng)
        phi = interesting_unary(m, x, params, rng)
        psi, params2, trail = equivalent_presentation(phi, x, params, m, rng)
        assert same_set(phi, psi, x, {**params, **params2}, m), trail
        a = canonical_decomposition(phi, x, params, m).to_json(m)
        b = canonical_decomposition(psi, x, params2, m).to_json(m)
        assert a == b, (seed, trail)
    compared = 0
    for seed in range(80):
        rng = random.Random(60000 + seed)
        m = GenericModel(rng.randint(1, 2), seed) if seed % 3 else QSqrt2Model(seed)
        params = random_params(m, rng, k=rng.choice([1, 1, 2]))
        closure = m.closure(params.values())
        if any(len(closure[i]) > 3 for i in range(1, m.n + 1)):
            continue
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
            compared += 1
    assert compared >= 100


@criterion(6, "set codes canonical for 100 R0 and 100 Ri pairs; three function codes verified")
def test_elimination_of_imaginaries():
    for kind in ("R0", "Ri"):
        for seed in range(100):
            rng = random.Random((70000 if kind == "R0" else 80000) + seed)
            m = GenericModel(rng.randint(1, 3), seed) if seed % 2 else QSqrt2Model(seed)
            x = Var("x", 0 if kind == "R0" else rng.randint(1, m.n))
            params = random_params(m, rng)
            phi = interesting_unary(m, x, params, rng)
            psi, params2, trail = equivalent_presentation(phi, x, params, m, rng)
            assert same_set(phi, psi, x, {**params, **params2}, m), trail
            assert code_set(phi, x, params, m).dumps(m) == code_set(psi, x, params2, m).dumps(m), (kind, seed, trail)
    x, y = Var("x", 0), Var("y", 1)
    examples = {
        "y = f1(x)": ["f1(x)"],
        "y = f1(0)": ["f1(0)"],
        "(f1(x) <1 f1(0) & y = f1(x)) | (~(f1(x) <1 f1(0)) & y = f1(0))": ["f1(0)", "f1(x)"],
    }
    for m in (GenericModel(2, 0), QSqrt2Model(0)):
        for text, labels in examples.items():
            phi = parse(text, 2, {"x": 0, "y": 1})
            code = code_function(phi, x, y, {}, m)
            assert sorted(r.label for r in code.regions) == labels
            assert verify_function_code(code, phi, x, y, {}, m) == []
        # piecewise: 50 samples per region against the canonical term
        phi = parse(next(reversed(examples)), 2, {"x": 0, "y": 1})
        code = code_function(phi, x, y, {}, m)
        for region in code.regions:
            samples = list(region.code.points)
            k = 0
            while len(samples) < 50:
                mi = region.code.intervals[k % len(region.code.intervals)]
                samples.append(m.sample_multi_interval(mi, exclude=samples))
                k += 1
            for e in samples:
                value = code.apply(m, e)
                expected = m.apply_f(1, e) if region.label == "f1(x)" else m.apply_f(1, m.zero())
                assert value == expected and evaluate(phi, {x: e, y: value}, m)


def _float_sign(i: int, a: Fraction, b: Fraction, c: int):
    """Sign at 128 bits, or None when the value is inside the error bound."""
    with mpmath.workprec(128):
        s2 = mpmath.sqrt(2) if i == 1 else -mpmath.sqrt(2)
        v = mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(b.numerator) / b.denominator * s2 \
            + c * mpmath.sqrt(3)
        bound = (abs(mpmath.mpf(a.numerator) / a.denominator) + 2 * abs(mpmath.mpf(b.numerator) / b.denominator)
                 + 2) * mpmath.mpf(2) ** -120
        if abs(v) <= bound:
            return None
        return Sign.POS if v > 0 else Sign.NEG


def _random_triple(rng: random.Random) -> FieldElem:
    c = rng.randint(0, 1)
    if rng.randrange(4) == 0:
        # near cancellation: a close to -b*sqrt2 (or -b*sqrt2 - sqrt3)
        q = rng.randint(1, 10 ** rng.randint(1, 15))
        target = -(q * mpmath.sqrt(2) + c * mpmath.sqrt(3)) if rng.randrange(2) else q * mpmath.sqrt(2)
        with mpmath.workprec(200):
            a = Fraction(int(mpmath.nint(target * 10 ** 20)), 10 ** 20)
        return FieldElem(a, Fraction(q), c)
    def rat():
        return Fraction(rng.randint(-10 ** 12, 10 ** 12), rng.randint(1, 10 ** 6))
    return FieldElem(rat() if rng.randrange(8) else Fraction(0), rat() if rng.randrange(8) else Fraction(0), c)


@criterion(7, "exactness: no floats in verdict paths; sign_under matches 128-bit screening on 10^4 triples")
def test_exactness_guard():
    assert [f for path in FILES for f in findings(path)] == []
    tracer = FloatTracer()
    old = sys.gettrace()
    sys.settrace(tracer)
    try:
        workload()
    finally:
        sys.settrace(old)
    assert tracer.hits == []
    rng = random.Random(128)
    conclusive = 0
    for _ in range(10_000):
        e = _random_triple(rng)
        for i in (1, 2):
            fs = _float_sign(i, e.a, e.b, e.c)
            exact = sign_under(i, e)
            if e.a == 0 and e.b == 0 and e.c == 0:
                assert exact is Sign.ZERO
            if fs is not None:
                conclusive += 1
                assert exact == fs, (i, e)
    assert conclusive >= 15_000
