"""Codes for definable sets and functions."""
from __future__ import annotations

from von import GenericModel, MultiInterval, parse
from von.imaginaries import code_function, code_set, round_trip
from von.model import NEG_INF, POS_INF
from von.syntax import Var


def main() -> None:
    m = GenericModel(2, seed=2)
    a = m.sample_interval(1, NEG_INF, POS_INF, want_image=False)
    y = Var("y", 1)
    params = {Var("a", 1): a}
    for text in ["a <1 y & ~(f1(g1(y)) = y)", "a <1 y", "y <1 a & f1(g1(y)) = y"]:
        phi = parse(text, 2, {"y": 1, "a": 1})
        code = code_set(phi, y, params, m)
        print(f"{text}\n  code {code.dumps(m)}\n  round trip {round_trip(code, phi, y, params, m)}")

    x, out = Var("x", 0), Var("y", 1)
    f0 = m.apply_f(1, m.zero())
    samples = [m.sample_multi_interval(MultiInterval(((NEG_INF, f0), (NEG_INF, POS_INF)))),
               m.sample_multi_interval(MultiInterval(((f0, POS_INF), (NEG_INF, POS_INF))))]
    for text in ["y = f1(x)", "y = f1(0)",
                 "(f1(x) <1 f1(0) & y = f1(x)) | (~(f1(x) <1 f1(0)) & y = f1(0))"]:
        phi = parse(text, 2, {"x": 0, "y": 1})
        code = code_function(phi, x, out, {}, m)
        print(f"{text}\n  regions {[r.label for r in code.regions]}")
        for e in samples:
            print(f"  h({m.serialize(e)}) = {m.serialize(code.apply(m, e))}")


if __name__ == "__main__":
    main()
