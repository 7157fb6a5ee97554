"""The two-order backend over Q(sqrt2).

Elements are triples ``(a, b, c)`` standing for ``a + b*sqrt2 + c*sqrt3``
with rational ``a, b`` and ``c`` in {0, 1}. The base sort R0 is the field
``K = Q(sqrt2)`` (``c = 0``); the ordered sorts R1 and R2 are
``K ∪ (K + sqrt3)`` ordered through the two embeddings of K into the reals,
``sqrt2 -> +sqrt2`` for R1 and ``sqrt2 -> -sqrt2`` for R2. ``f_i`` is the
inclusion of K, so the image of ``f_i`` is exactly the ``c = 0`` part and
``K + sqrt3`` supplies the dense complement.

All decisions are exact: the zero test is algebraic and signs of nonzero
elements come from dyadic enclosures of sqrt2 and sqrt3 refined until they
exclude zero.
"""
from __future__ import annotations

import enum
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .model import (
    NEG_INF, POS_INF, ContractViolation, Element, Endpoint, Model, MultiInterval,
)


class Sign(enum.IntEnum):
    NEG = -1
    ZERO = 0
    POS = 1


@dataclass(frozen=True)
class FieldElem:
    a: Fraction
    b: Fraction
    c: int = 0
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if type(self.a) is not Fraction:
            object.__setattr__(self, "a", Fraction(self.a))
        if type(self.b) is not Fraction:
            object.__setattr__(self, "b", Fraction(self.b))
        if self.c not in (0, 1):
            raise ValueError("the sqrt3 coefficient of a carrier element must be 0 or 1")
        object.__setattr__(self, "_hash", hash((self.a, self.b, self.c)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return f"{self.a} + {self.b}*sqrt2 + {self.c}*sqrt3"

    def to_json(self) -> list[str]:
        return [str(self.a), str(self.b), str(self.c)]

    @classmethod
    def from_json(cls, triple: list[str]) -> "FieldElem":
        a, b, c = triple
        c = Fraction(c)
        if c.denominator != 1:
            raise ValueError(f"bad sqrt3 coefficient {c}")
        return cls(Fraction(a), Fraction(b), int(c))


_SUMMAND = re.compile(r"([+-]?)(\d+(?:/\d+)?)?(?:(?<=\d)\*)?(sqrt2|sqrt3)?")


def parse_field_elem(text: str) -> FieldElem:
    """Parse sums such as ``1/2 + -3/4*sqrt2 + 1*sqrt3``, ``sqrt3 - 1`` or ``-2``."""
    s = re.sub(r"\s+", "", text)
    while True:
        t = s.replace("+-", "-").replace("-+", "-").replace("--", "+").replace("++", "+")
        if t == s:
            break
        s = t
    if not s:
        raise ValueError("empty field element")
    coeff = {None: Fraction(0), "sqrt2": Fraction(0), "sqrt3": Fraction(0)}
    for part in re.findall(r"[+-]?[^+-]+", s):
        m = _SUMMAND.fullmatch(part)
        if m is None or (m.group(2) is None and m.group(3) is None):
            raise ValueError(f"cannot parse {part!r} in field element {text!r}")
        q = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        coeff[m.group(3)] += -q if m.group(1) == "-" else q
    c = coeff["sqrt3"]
    if c not in (0, 1):
        raise ValueError(f"sqrt3 coefficient must be 0 or 1 in {text!r}")
    return FieldElem(coeff[None], coeff["sqrt2"], int(c))


# ---------------------------------------------------------------------------
# exact signs


@dataclass(frozen=True)
class RationalWindow:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("empty window")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def scale(self, s: Fraction) -> "RationalWindow":
        if s >= 0:
            return RationalWindow(s * self.lo, s * self.hi)
        return RationalWindow(s * self.hi, s * self.lo)

    def __add__(self, other: "RationalWindow") -> "RationalWindow":
        return RationalWindow(self.lo + other.lo, self.hi + other.hi)

    def shift(self, q: Fraction) -> "RationalWindow":
        return RationalWindow(self.lo + q, self.hi + q)


def sqrt_window(m: int, bits: int) -> RationalWindow:
    """Dyadic window of width ``2**-bits`` containing ``sqrt(m)``."""
    scale = 1 << bits
    r = math.isqrt(m * scale * scale)
    return RationalWindow(Fraction(r, scale), Fraction(r + 1, scale))


def enclosure(i: int, a: Fraction, b: Fraction, c: Fraction, bits: int) -> RationalWindow:
    """Window containing ``a + b*s_i(sqrt2) + c*sqrt3`` where ``s_2`` flips sqrt2."""
    r2 = sqrt_window(2, bits)
    r3 = sqrt_window(3, bits)
    b_eff = Fraction(b) if i == 1 else -Fraction(b)
    return (r2.scale(b_eff) + r3.scale(Fraction(c))).shift(Fraction(a))


def is_zero(a: Fraction, b: Fraction, c: Fraction) -> bool:
    # a + b*sqrt2 + c*sqrt3 = 0 over Q forces a = b = c = 0: squaring
    # a + b*sqrt2 = -c*sqrt3 gives ab = 0 and a^2 + 2b^2 = 3c^2, and neither
    # 2 = 3(c/b)^2 nor 1 = 3(c/a)^2 has a rational solution.
    return a == 0 and b == 0 and c == 0


def sign_triple(i: int, a, b, c) -> Sign:
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    if is_zero(a, b, c):
        return Sign.ZERO
    if i == 2:
        b = -b
    # clear denominators, then refine integer enclosures of sqrt2, sqrt3
    # (the same windows as ``sqrt_window``) until the sign is certain
    den = math.lcm(a.denominator, b.denominator, c.denominator)
    A = a.numerator * (den // a.denominator)
    B = b.numerator * (den // b.denominator)
    C = c.numerator * (den // c.denominator)
    bits = 8
    while True:
        scale = 1 << bits
        r2 = math.isqrt(2 * scale * scale)
        r3 = math.isqrt(3 * scale * scale)
        lo = A * scale + min(B * r2, B * (r2 + 1)) + min(C * r3, C * (r3 + 1))
        hi = A * scale + max(B * r2, B * (r2 + 1)) + max(C * r3, C * (r3 + 1))
        if lo > 0:
            return Sign.POS
        if hi < 0:
            return Sign.NEG
        bits *= 2


def sign_under(i: int, e: FieldElem) -> Sign:
    """Exact sign of the real number ``sigma_i(e)``."""
    if i not in (1, 2):
        raise ContractViolation(f"Q(sqrt2) has exactly two orders, not R{i}")
    return sign_triple(i, e.a, e.b, e.c)


def difference_sign(i: int, x: FieldElem, y: FieldElem) -> Sign:
    if x == y:
        return Sign.ZERO
    return sign_triple(i, x.a - y.a, x.b - y.b, x.c - y.c)


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """A rational with small denominator strictly between ``lo < hi``."""
    mid = (lo + hi) / 2
    den = 1
    while True:
        q = mid.limit_denominator(den)
        if lo < q < hi:
            return q
        den *= 2


# ---------------------------------------------------------------------------
# the model


class QSqrt2Model(Model):
    """Backend with R0 = Q(sqrt2) and R1, R2 its two order completions' dense parts."""

    def __init__(self, seed: int = 0):
        self.n = 2
        self.seed = seed
        self.rng = random.Random(seed)
        self._zero = Element(0, FieldElem(Fraction(0), Fraction(0), 0))
        # the model is immutable, so verified witnesses can be reused
        self._witnesses: dict[tuple, FieldElem] = {}
        self._windows: dict[tuple, RationalWindow] = {}

    def element(self, sort: int, a, b=0, c: int = 0) -> Element:
        fe = FieldElem(Fraction(a), Fraction(b), c)
        if sort == 0 and fe.c != 0:
            raise ContractViolation("R0 elements have no sqrt3 part")
        return Element(sort, fe)

    def zero(self) -> Element:
        return self._zero

    def _chk(self, e: Element, sort: int) -> FieldElem:
        self.check(e, sort)
        if not isinstance(e.value, FieldElem):
            raise ContractViolation(f"foreign element {e!r}")
        return e.value

    def compare(self, i: int, a: Element, b: Element) -> int:
        return int(difference_sign(i, self._chk(a, i), self._chk(b, i)))

    def apply_f(self, i: int, x: Element) -> Element:
        self._ordered(i)
        return Element(i, self._chk(x, 0))

    def apply_g(self, i: int, y: Element) -> Element:
        self._ordered(i)
        v = self._chk(y, i)
        return Element(0, v) if v.c == 0 else self._zero

    def in_image(self, i: int, y: Element) -> bool:
        self._ordered(i)
        return self._chk(y, i).c == 0

    def _ordered(self, i: int) -> None:
        if i not in (1, 2):
            raise ContractViolation(f"no ordered sort R{i} in the Q(sqrt2) model")

    # ------------------------------------------------------------------
    # windows and sampling

    def inner_window(self, i: int, lo: Endpoint, hi: Endpoint) -> RationalWindow:
        """Rational window ``[L, U]`` with ``L < U`` inside the closed real interval."""
        if isinstance(lo, Element) and isinstance(hi, Element) and self.compare(i, lo, hi) >= 0:
            raise ContractViolation(f"empty interval in R{i}")
        bits = 8
        while True:
            L = None if lo is NEG_INF else self._endpoint_window(i, lo, bits).hi
            U = None if hi is POS_INF else self._endpoint_window(i, hi, bits).lo
            if L is None and U is None:
                return RationalWindow(Fraction(-1), Fraction(1))
            if L is None:
                return RationalWindow(U - 2, U)
            if U is None:
                return RationalWindow(L, L + 2)
            if L < U:
                return RationalWindow(L, U)
            bits *= 2

    def _endpoint_window(self, i: int, e: Element, bits: int) -> RationalWindow:
        key = (i, e.value, bits)
        w = self._windows.get(key)
        if w is None:
            v = self._chk(e, i)
            w = self._windows[key] = enclosure(i, v.a, v.b, Fraction(v.c), bits)
        return w

    def weak_approx_sample(self, lo1: Endpoint, hi1: Endpoint, lo2: Endpoint, hi2: Endpoint,
                           exclude: Iterable[Element] = ()) -> FieldElem:
        """Some ``x`` in K with ``sigma_1(x)`` in ``(lo1, hi1)`` and ``sigma_2(x)`` in ``(lo2, hi2)``.

        Pick centers ``t1, t2`` and a radius ``d`` inside both targets and solve
        ``a + b*sqrt2 = t1``, ``a - b*sqrt2 = t2`` approximately in rationals;
        the candidate is accepted only after an exact membership check.
        """
        banned = {e.value for e in exclude}
        key = (lo1, hi1, lo2, hi2)
        hit = self._witnesses.get(key)
        if hit is not None and hit not in banned:
            return hit
        w1, w2 = self.inner_window(1, lo1, hi1), self.inner_window(2, lo2, hi2)
        t1, t2 = (w1.lo + w1.hi) / 2, (w2.lo + w2.hi) / 2
        d = min(w1.width, w2.width) / 2
        while True:
            x = self._solve(t1, t2, d)
            ok = (x not in banned
                  and self.inside(1, Element(1, x), lo1, hi1)
                  and self.inside(2, Element(2, x), lo2, hi2))
            if ok:
                self._witnesses[key] = x
                return x
            d /= 2
            if x in banned:
                t1 += d

    @staticmethod
    def _solve(t1: Fraction, t2: Fraction, d: Fraction) -> FieldElem:
        # a = (t1 + t2)/2 and b = (t1 - t2)/(2 sqrt2) = (t1 - t2) sqrt2 / 4,
        # each rounded to a simple rational within d/8
        tol = d / 8
        a = _simplest_between((t1 + t2) / 2 - tol, (t1 + t2) / 2 + tol)
        q = (t1 - t2) / 4
        bits = 8
        while abs(q) / (1 << bits) >= tol / 2:
            bits += 8
        b_mid = q * sqrt_window(2, bits).lo
        b = _simplest_between(b_mid - tol / 2, b_mid + tol / 2)
        return FieldElem(a, b, 0)

    def sample_multi_interval(self, target: MultiInterval,
                              exclude: Iterable[Element] = ()) -> Element:
        (lo1, hi1), (lo2, hi2) = target[1], target[2]
        return Element(0, self.weak_approx_sample(lo1, hi1, lo2, hi2, exclude))

    def sample_interval(self, i: int, lo: Endpoint, hi: Endpoint, want_image: bool,
                        exclude: Iterable[Element] = ()) -> Element:
        self._ordered(i)
        w = self.inner_window(i, lo, hi)
        t, d = (w.lo + w.hi) / 2, w.width / 2
        banned = {e.value for e in exclude}
        while True:
            if want_image:
                v = FieldElem(_simplest_between(t - d / 2, t + d / 2), Fraction(0), 0)
            else:
                bits = 8
                while Fraction(1, 1 << bits) >= d / 4:
                    bits += 8
                r3 = sqrt_window(3, bits).lo
                v = FieldElem(_simplest_between(t - r3 - d / 4, t - r3 + d / 4), Fraction(0), 1)
            if v not in banned and self.inside(i, Element(i, v), lo, hi):
                return Element(i, v)
            d /= 2
            if v in banned:
                t += d

    def random_element(self, sort: int, rng=None) -> Element:
        rng = rng or self.rng
        a = Fraction(rng.randint(-12, 12), rng.randint(1, 6))
        b = Fraction(rng.randint(-12, 12), rng.randint(1, 6))
        c = rng.randrange(2) if sort > 0 else 0
        return Element(sort, FieldElem(a, b, c))

    def serialize(self, e: Element) -> str:
        return str(self._chk(e, e.sort))

    def parse_element(self, text: str, sort: int) -> Element:
        try:
            v = parse_field_elem(text)
        except ValueError:
            from .parser import parse_term
            t = parse_term(text, self.n)
            if t.sort != sort:
                raise ContractViolation(f"{text!r} is not of sort R{sort}") from None
            return self.eval_term(t, {})
        if sort == 0 and v.c != 0:
            raise ContractViolation("R0 elements have no sqrt3 part")
        return Element(sort, v)

    def __repr__(self) -> str:
        return f"QSqrt2Model(seed={self.seed})"
