"""A lazily built countable model.

The state is always a finite partial structure: every R0 element has all of
its ``n`` images, every ordered sort is a finite strictly ordered list, and
each ordered element is either the image of an R0 element or flagged as a
non-image point. The two extension steps are the ones used when building an
isomorphism by back and forth: add a new R0 element whose images fall into
prescribed gaps, or add a new non-image point into a gap of one sort.

Positions are tracked by integer keys so that comparisons are O(1); a sort is
renumbered when two neighbouring keys leave no room. The keys are an
implementation detail and are not part of the dump format.
"""
from __future__ import annotations

import bisect
import hashlib
import json
import random
import re
from typing import Any, Iterable

from .model import (
    NEG_INF, POS_INF, ContractViolation, Element, Endpoint, Model,
    MultiInterval,
)


SPACING = 1 << 20


class GenericModel(Model):
    def __init__(self, n: int, seed: int = 0):
        if n < 1:
            raise ValueError("n must be at least 1")
        self.n = n
        self.seed = seed
        self.rng = random.Random(seed)
        self._counter = 0
        self._key: dict[Element, int] = {}
        self._keys: list[list[int]] = [[] for _ in range(n + 1)]
        self._elems: list[list[Element]] = [[] for _ in range(n + 1)]
        self._image: dict[tuple[int, Element], Element] = {}
        self._preimage: dict[Element, Element] = {}
        self._r0: list[Element] = []
        self._journal: list[tuple[str, Element]] = []
        self._tokens: list[tuple[int, int]] = []
        self._zero = self._new_r0([0] * n)

    # ------------------------------------------------------------------
    # internal bookkeeping

    def _fresh(self, sort: int) -> Element:
        e = Element(sort, self._counter)
        self._counter += 1
        return e

    def _insert(self, i: int, e: Element, key: int) -> None:
        k = bisect.bisect_left(self._keys[i], key)
        if k < len(self._keys[i]) and self._keys[i][k] == key:
            raise AssertionError("position already occupied")
        self._keys[i].insert(k, key)
        self._elems[i].insert(k, e)
        self._key[e] = key

    def _remove(self, i: int, e: Element) -> None:
        key = self._key.pop(e)
        k = bisect.bisect_left(self._keys[i], key)
        del self._keys[i][k]
        del self._elems[i][k]

    def _new_r0(self, keys: list[int]) -> Element:
        x = self._fresh(0)
        self._r0.append(x)
        for i, key in enumerate(keys, start=1):
            y = self._fresh(i)
            self._insert(i, y, key)
            self._image[(i, x)] = y
            self._preimage[y] = x
        self._journal.append(("r0", x))
        return x

    def _placement(self, i: int, lo: Endpoint, hi: Endpoint) -> int:
        """Key for a new point just above ``lo`` (just below everything if ``lo`` is -inf)."""
        if isinstance(lo, Element) and isinstance(hi, Element) and self.compare(i, lo, hi) >= 0:
            raise ContractViolation(f"empty interval in R{i}")
        if lo is POS_INF or hi is NEG_INF:
            raise ContractViolation(f"empty interval in R{i}")
        keys = self._keys[i]
        if lo is NEG_INF:
            return keys[0] - SPACING if keys else 0
        self.check(lo, i)
        base = self._live_key(lo)
        k = bisect.bisect_right(keys, base)
        if k == len(keys):
            return base + SPACING
        if keys[k] - base < 2:
            self._renumber(i)
            return self._placement(i, lo, hi)
        return (base + keys[k]) // 2

    def _renumber(self, i: int) -> None:
        self._keys[i] = [pos * SPACING for pos in range(len(self._elems[i]))]
        for key, e in zip(self._keys[i], self._elems[i]):
            self._key[e] = key

    def _live_key(self, e: Element) -> int:
        try:
            return self._key[e]
        except KeyError:
            raise ContractViolation(f"stale or foreign element {e!r}") from None

    # ------------------------------------------------------------------
    # extension steps

    def extend_r0(self, target: MultiInterval) -> Element:
        """New R0 element whose ``i``-th image lies just above the lower end of ``target[i]``."""
        if target.n != self.n:
            raise ContractViolation("multi-interval has the wrong number of sorts")
        keys = [self._placement(i, *target[i]) for i in range(1, self.n + 1)]
        return self._new_r0(keys)

    def extend_ri(self, i: int, lo: Endpoint = NEG_INF, hi: Endpoint = POS_INF,
                  non_image: bool = True) -> Element:
        if not 1 <= i <= self.n:
            raise ContractViolation(f"no ordered sort R{i}")
        if not non_image:
            x = self.extend_r0(MultiInterval.full(self.n).replace(i, lo, hi))
            return self.apply_f(i, x)
        key = self._placement(i, lo, hi)
        y = self._fresh(i)
        self._insert(i, y, key)
        self._journal.append(("ri", y))
        return y

    def snapshot(self) -> int:
        self._tokens.append((len(self._journal), self._counter))
        return len(self._tokens)

    def restore(self, token: int) -> None:
        if token != len(self._tokens):
            raise ContractViolation("snapshots must be restored in LIFO order")
        length, counter = self._tokens.pop()
        while len(self._journal) > length:
            kind, e = self._journal.pop()
            if kind == "r0":
                self._r0.pop()
                for i in range(1, self.n + 1):
                    y = self._image.pop((i, e))
                    del self._preimage[y]
                    self._remove(i, y)
            else:
                self._remove(e.sort, e)
        self._counter = counter

    # ------------------------------------------------------------------
    # backend contract

    def zero(self) -> Element:
        return self._zero

    def _check_alive(self, e: Element, sort: int) -> None:
        self.check(e, sort)
        alive = e in self._key if sort else (e == self._zero or (1, e) in self._image)
        if not alive:
            raise ContractViolation(f"stale or foreign element {e!r}")

    def compare(self, i: int, a: Element, b: Element) -> int:
        self.check(a, i)
        self.check(b, i)
        ka, kb = self._live_key(a), self._live_key(b)
        return (ka > kb) - (ka < kb)

    def apply_f(self, i: int, x: Element) -> Element:
        self._check_alive(x, 0)
        return self._image[(i, x)]

    def apply_g(self, i: int, y: Element) -> Element:
        self._check_alive(y, i)
        return self._preimage.get(y, self._zero)

    def in_image(self, i: int, y: Element) -> bool:
        self._check_alive(y, i)
        return y in self._preimage

    def sample_multi_interval(self, target: MultiInterval,
                              exclude: Iterable[Element] = ()) -> Element:
        # a fresh element is never in ``exclude``
        return self.extend_r0(target)

    def sample_interval(self, i: int, lo: Endpoint, hi: Endpoint, want_image: bool,
                        exclude: Iterable[Element] = ()) -> Element:
        return self.extend_ri(i, lo, hi, non_image=not want_image)

    def random_element(self, sort: int, rng=None) -> Element:
        """Reuse an existing element 40% of the time, otherwise extend at a random gap."""
        rng = rng or self.rng
        if sort == 0:
            if rng.randrange(10) < 4:
                return rng.choice(self._r0)
            return self.extend_r0(MultiInterval(tuple(self._random_gap(i, rng)
                                                      for i in range(1, self.n + 1))))
        roll = rng.randrange(10)
        if roll < 4:
            return rng.choice(self._elems[sort])
        lo, hi = self._random_gap(sort, rng)
        return self.extend_ri(sort, lo, hi, non_image=roll < 7)

    def _random_gap(self, i: int, rng) -> tuple[Endpoint, Endpoint]:
        elems = self._elems[i]
        k = rng.randrange(len(elems) + 1)
        lo = elems[k - 1] if k > 0 else NEG_INF
        hi = elems[k] if k < len(elems) else POS_INF
        return lo, hi

    def serialize(self, e: Element) -> str:
        return f"R{e.sort}#{e.value}"

    def parse_element(self, text: str, sort: int) -> Element:
        m = re.fullmatch(r"\s*(?:R(\d+))?#(\d+)\s*", text)
        if m is not None:
            if m.group(1) is not None and int(m.group(1)) != sort:
                raise ContractViolation(f"{text!r} is not of sort R{sort}")
            e = Element(sort, int(m.group(2)))
            self._check_alive(e, sort)
            return e
        from .parser import parse_term
        t = parse_term(text, self.n)
        if t.sort != sort:
            raise ContractViolation(f"{text!r} is not of sort R{sort}")
        return self.eval_term(t, {})

    # ------------------------------------------------------------------
    # inspection and persistence

    def order(self, i: int) -> list[Element]:
        return list(self._elems[i])

    def r0_elements(self) -> list[Element]:
        return list(self._r0)

    def dump(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "seed": self.seed,
            "counter": self._counter,
            "r0": [x.value for x in self._r0],
            "orders": {str(i): [e.value for e in self._elems[i]] for i in range(1, self.n + 1)},
            "images": {str(i): {str(x.value): self._image[(i, x)].value for x in self._r0}
                       for i in range(1, self.n + 1)},
        }

    @classmethod
    def load(cls, doc: dict[str, Any]) -> "GenericModel":
        m = cls(doc["n"], doc.get("seed", 0))
        m._counter = doc["counter"]
        m._key.clear()
        m._keys = [[] for _ in range(m.n + 1)]
        m._elems = [[] for _ in range(m.n + 1)]
        m._image.clear()
        m._preimage.clear()
        m._journal.clear()
        m._r0 = [Element(0, v) for v in doc["r0"]]
        for i in range(1, m.n + 1):
            for pos, v in enumerate(doc["orders"][str(i)]):
                e = Element(i, v)
                m._keys[i].append(pos * SPACING)
                m._elems[i].append(e)
                m._key[e] = pos * SPACING
            for xv, yv in doc["images"][str(i)].items():
                x, y = Element(0, int(xv)), Element(i, yv)
                if y not in m._key:
                    raise ContractViolation(f"image {y!r} missing from order {i}")
                m._image[(i, x)] = y
                m._preimage[y] = x
        m._zero = m._r0[0]
        return m

    def digest(self) -> str:
        blob = json.dumps(self.dump(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def validate(self) -> None:
        """Check the structural invariants of the finite partial structure."""
        for i in range(1, self.n + 1):
            keys = self._keys[i]
            assert all(a < b for a, b in zip(keys, keys[1:])), f"order {i} not strictly sorted"
            assert len(keys) == len(self._elems[i])
            images = [self._image[(i, x)] for x in self._r0]
            assert len(set(images)) == len(images), f"f{i} not injective"
            for x in self._r0:
                assert self._preimage[self._image[(i, x)]] == x
        assert len(self._preimage) == self.n * len(self._r0)

    def __repr__(self) -> str:
        sizes = ", ".join(f"R{i}:{len(self._elems[i])}" for i in range(1, self.n + 1))
        return f"GenericModel(n={self.n}, R0:{len(self._r0)}, {sizes})"
