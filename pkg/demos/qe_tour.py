"""Eliminate quantifiers and decide sentences, then check the answers in both models."""
from __future__ import annotations

import random

from von import GenericModel, QSqrt2Model, decide, eliminate, evaluate, eval_qf, parse, to_text
from von.randgen import random_assignment
from von.syntax import free_vars

FORMULAS = [
    "exists x:R0. a <1 f1(x) & f1(x) <1 b & c <2 f2(x) & f2(x) <2 d",
    "exists x:R0. f1(x) = a",
    "exists y:R1. a <1 y & ~(f1(g1(y)) = y) & g1(y) = 0",
    "forall x:R0. f1(x) <1 a -> f2(x) <2 c",
]
SENTENCES = [
    "forall a:R1. exists b:R1. a <1 b",
    "exists x:R0. f1(x) = f1(0) & x != 0",
    "exists x:R0. exists y:R0. f1(x) <1 f1(y) & f2(y) <2 f2(x)",
]


def main() -> None:
    rng = random.Random(1)
    for text in FORMULAS:
        phi = parse(text, 2)
        qf = eliminate(phi)
        print(f"{text}\n  => {to_text(qf)}")
        for model in (GenericModel(2, seed=1), QSqrt2Model(seed=1)):
            asg = random_assignment(model, sorted(free_vars(phi), key=lambda v: v.name), rng)
            assert evaluate(phi, asg, model) == eval_qf(qf, asg, model)
    print()
    field = QSqrt2Model(seed=0)
    for text in SENTENCES:
        phi = parse(text, 2)
        print(f"{decide(phi)!s:5}  (Q(sqrt2) agrees: {evaluate(phi, {}, field) == decide(phi)})  {text}")


if __name__ == "__main__":
    main()
