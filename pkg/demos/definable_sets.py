"""Canonical decompositions of subsets of R0 and what stays fixed under re-presentation."""
from __future__ import annotations

import json

from von import GenericModel, MultiInterval, parse
from von.defsets import canonical_decomposition, maximal_multi_interval
from von.model import POS_INF
from von.syntax import Var

SORTS = {"x": 0, "p": 0, "a": 1, "b": 1, "c": 2}


def main() -> None:
    m = GenericModel(2, seed=4)
    a = m.apply_f(1, m.zero())
    b = m.sample_interval(1, a, POS_INF, want_image=True)
    c = m.apply_f(2, m.zero())
    p = m.sample_multi_interval(MultiInterval(((b, POS_INF), (c, POS_INF))))
    x = Var("x", 0)
    params = {Var("a", 1): a, Var("b", 1): b, Var("c", 2): c, Var("p", 0): p}

    one = parse("(a <1 f1(x) & f1(x) <1 b) | x = p", 2, SORTS)
    two = parse("~(~(a <1 f1(x)) | ~(f1(x) <1 b)) | (x = p & f2(0) <2 f2(p))", 2, SORTS)
    for phi in (one, two):
        dec = canonical_decomposition(phi, x, params, m)
        print(json.dumps(dec.to_json(m)))

    box = parse("(a <1 f1(x) & f1(x) <1 b & f2(x) <2 c) | (a <1 f1(x) & f1(x) <1 b & c <2 f2(x))", 2, SORTS)
    e = m.sample_multi_interval(MultiInterval(((a, b), (c, POS_INF))))
    print("maximal box around a point:", maximal_multi_interval(box, x, params, e, m))
    print("decomposition of the two boxes:", canonical_decomposition(box, x, params, m).to_json(m))


if __name__ == "__main__":
    main()
