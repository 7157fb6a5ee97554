"""Randomized checks of the five axioms against a model backend.

Each trial instantiates the universal part of an axiom with random elements
and discharges the existential part with the backend's samplers. Every
witness is re-verified with ``compare``/``apply_f``/``apply_g`` before it is
accepted.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .model import NEG_INF, POS_INF, Element, Endpoint, Model, MultiInterval

AXIOMS = {
    1: "each <i is a dense linear order without endpoints",
    2: "each f_i is injective",
    3: "g_i inverts f_i on its image and is 0 elsewhere",
    4: "the image of f_i is dense and co-dense in Ri",
    5: "open intervals in all sorts are met simultaneously by some f(x)",
}


@dataclass
class AxiomReport:
    axiom: int
    trials: int
    failures: list[str] = field(default_factory=list)
    witnesses: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "statement": AXIOMS[self.axiom],
            "trials": self.trials,
            "failures": len(self.failures),
            "falsifying": self.failures,
            "witnesses": self.witnesses,
        }


class _Trial:
    def __init__(self, model: Model, rng: random.Random, report: AxiomReport):
        self.m = model
        self.rng = rng
        self.report = report

    def fail(self, msg: str) -> None:
        self.report.failures.append(msg)

    def witness(self, msg: str) -> None:
        if len(self.report.witnesses) < 5:
            self.report.witnesses.append(msg)

    def s(self, e: Endpoint) -> str:
        return e.value if not isinstance(e, Element) else self.m.serialize(e)

    def distinct_pair(self, i: int) -> tuple[Element, Element]:
        while True:
            a, b = self.m.random_element(i, self.rng), self.m.random_element(i, self.rng)
            c = self.m.compare(i, a, b)
            if c < 0:
                return a, b
            if c > 0:
                return b, a

    def bounds(self, i: int) -> tuple[Endpoint, Endpoint]:
        roll = self.rng.randrange(6)
        lo, hi = self.distinct_pair(i)
        if roll == 0:
            return NEG_INF, hi
        if roll == 1:
            return lo, POS_INF
        return lo, hi

    def axiom1(self, i: int) -> None:
        m = self.m
        a, b, c = (m.random_element(i, self.rng) for _ in range(3))
        if m.compare(i, a, a) != 0 or m.less(i, a, a):
            self.fail(f"<{i} reflexive at {self.s(a)}")
        if m.compare(i, a, b) != -m.compare(i, b, a):
            self.fail(f"<{i} not antisymmetric/total on {self.s(a)}, {self.s(b)}")
        if (m.compare(i, a, b) == 0) != (a == b):
            self.fail(f"<{i} equality mismatch on {self.s(a)}, {self.s(b)}")
        if m.less(i, a, b) and m.less(i, b, c) and not m.less(i, a, c):
            self.fail(f"<{i} not transitive on {self.s(a)}, {self.s(b)}, {self.s(c)}")
        lo, hi = self.distinct_pair(i)
        z = m.sample_interval(i, lo, hi, want_image=bool(self.rng.randrange(2)))
        if not m.inside(i, z, lo, hi):
            self.fail(f"<{i} density: {self.s(z)} not strictly between {self.s(lo)}, {self.s(hi)}")
        above = m.sample_interval(i, a, POS_INF, want_image=bool(self.rng.randrange(2)))
        below = m.sample_interval(i, NEG_INF, a, want_image=bool(self.rng.randrange(2)))
        if not (m.less(i, a, above) and m.less(i, below, a)):
            self.fail(f"<{i} has an endpoint at {self.s(a)}")
        self.witness(f"R{i}: {self.s(lo)} < {self.s(z)} < {self.s(hi)}")

    def axiom2(self, i: int) -> None:
        m = self.m
        x, y = m.random_element(0, self.rng), m.random_element(0, self.rng)
        fx, fy = m.apply_f(i, x), m.apply_f(i, y)
        if (x == y) != (fx == fy):
            self.fail(f"f{i} not injective on {self.s(x)}, {self.s(y)}")
        if fx.sort != i or m.apply_g(i, fx) != x:
            self.fail(f"g{i}(f{i}({self.s(x)})) != {self.s(x)}")
        self.witness(f"f{i}({self.s(x)}) = {self.s(fx)}")

    def axiom3(self, i: int) -> None:
        m = self.m
        y = m.random_element(i, self.rng)
        gy = m.apply_g(i, y)
        back = m.apply_f(i, gy)
        if m.in_image(i, y):
            if back != y:
                self.fail(f"f{i}(g{i}({self.s(y)})) != {self.s(y)} although in the image")
        else:
            if gy != m.zero():
                self.fail(f"g{i}({self.s(y)}) = {self.s(gy)} != 0 off the image")
            if back == y:
                self.fail(f"{self.s(y)} flagged non-image but f{i}(g{i}(y)) = y")
        x = m.random_element(0, self.rng)
        if not m.in_image(i, m.apply_f(i, x)):
            self.fail(f"f{i}({self.s(x)}) not flagged as an image point")
        self.witness(f"g{i}({self.s(y)}) = {self.s(gy)}")

    def axiom4(self, i: int) -> None:
        m = self.m
        lo, hi = self.distinct_pair(i)
        for want in (True, False):
            z = m.sample_interval(i, lo, hi, want_image=want)
            if not m.inside(i, z, lo, hi):
                self.fail(f"R{i}: {self.s(z)} not strictly between {self.s(lo)}, {self.s(hi)}")
            # image membership re-derived from f and g, not from the flag
            really = m.apply_f(i, m.apply_g(i, z)) == z
            if really != want or m.in_image(i, z) != want:
                kind = "image" if want else "non-image"
                self.fail(f"R{i}: {self.s(z)} requested as {kind} point")
            self.witness(f"R{i}: {'image' if want else 'non-image'} {self.s(z)} "
                         f"in ({self.s(lo)}, {self.s(hi)})")

    def axiom5(self) -> None:
        m = self.m
        target = MultiInterval(tuple(self.bounds(i) for i in range(1, m.n + 1)))
        x = m.sample_multi_interval(target)
        if x.sort != 0 or not m.in_multi_interval(x, target):
            desc = ", ".join(f"({self.s(lo)}, {self.s(hi)})" for lo, hi in target.bounds)
            self.fail(f"{self.s(x)} misses the multi-interval {desc}")
        self.witness(f"{self.s(x)}")


def axiom_check(model: Model, axiom: int, trials: int = 1000, seed: int = 0) -> AxiomReport:
    """Run ``trials`` randomized instances of ``axiom`` (1..5) against ``model``."""
    if axiom not in AXIOMS:
        raise ValueError(f"no axiom {axiom}")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = random.Random(seed)
    report = AxiomReport(axiom, trials)
    t = _Trial(model, rng, report)
    # a few persistent elements so that random choices can coincide
    for _ in range(8):
        model.random_element(rng.randint(0, model.n), rng)
    for k in range(trials):
        token = model.snapshot()
        try:
            i = 1 + k % model.n
            if axiom == 5:
                t.axiom5()
            else:
                getattr(t, f"axiom{axiom}")(i)
        finally:
            model.restore(token)
    return report
