"""Command line interface: ``von <subcommand> [flags] [FORMULA]``.

The formula comes from the positional argument if given, else from
``--input FILE``, else from standard input.

Exit status: 0 success, 1 parse or sort error, 2 semantic error (for example
``decide`` on a formula with free variables, ``code-fun`` on a non-function),
3 contract violation or failed self-check.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import Any, Callable

from . import axioms as ax
from .defsets import Grid, NotInteriorPoint, decompose_grid, verify_decomposition
from .field import QSqrt2Model
from .generic import GenericModel
from .imaginaries import (
    ExhaustivenessFailure, NotAFunction, code_function, code_set, round_trip,
    verify_function_code,
)
from .model import ContractViolation, Element, Model, candidate_points, eval_qf, evaluate
from .parser import ParseError, parse, sort_context, to_text
from .qe import NotASentence, decide, eliminate
from .syntax import SortError, Var, free_vars, is_quantifier_free, quantifier_depth


class SemanticError(Exception):
    pass


@dataclass
class SessionConfig:
    n: int
    backend: str
    seed: int
    fmt: str

    def __post_init__(self) -> None:
        if self.n < 1:
            raise SemanticError("--sorts must be at least 1")
        if self.backend == "qsqrt2" and self.n != 2:
            raise SemanticError("the qsqrt2 backend has exactly two ordered sorts")

    def model(self, state: str | None = None) -> Model:
        if self.backend == "qsqrt2":
            if state:
                raise SemanticError("--state applies to the generic backend only")
            return QSqrt2Model(self.seed)
        if state:
            with open(state) as fh:
                m = GenericModel.load(json.load(fh))
            if m.n != self.n:
                raise SemanticError(f"state has {m.n} ordered sorts, not {self.n}")
            return m
        return GenericModel(self.n, self.seed)


# ---------------------------------------------------------------------------
# helpers


def read_formula(args: argparse.Namespace) -> str:
    if args.formula is not None:
        return args.formula
    if args.input:
        with open(args.input) as fh:
            return fh.read()
    return sys.stdin.read()


def parse_assignments(pairs: list[str], phi, model: Model) -> dict[Var, Element]:
    ctx = sort_context(phi)
    asg: dict[Var, Element] = {}
    for pair in pairs:
        name, sep, literal = pair.partition("=")
        name = name.strip()
        if not sep or not name:
            raise SemanticError(f"bad binding {pair!r}; expected NAME=ELEMENT")
        if name not in ctx:
            raise SemanticError(f"{name} is not a free variable of the formula")
        asg[Var(name, ctx[name])] = model.parse_element(literal, ctx[name])
    return asg


def pick_var(phi, name: str, want_sort: int | None = None) -> Var:
    ctx = sort_context(phi)
    if name not in ctx:
        raise SemanticError(f"{name} is not a free variable of the formula")
    v = Var(name, ctx[name])
    if want_sort is not None and v.sort != want_sort:
        raise SemanticError(f"{name} must have sort R{want_sort}")
    return v


def fill_parameters(phi, asg: dict[Var, Element], skip: set[Var], model: Model,
                    seed: int) -> dict[Var, Element]:
    """Bind parameters not given by --assign to seeded random elements."""
    rng = random.Random(seed)
    out = dict(asg)
    for v in sorted(free_vars(phi) - set(asg) - set(skip), key=lambda v: v.name):
        out[v] = model.random_element(v.sort, rng)
    return out


def parameters_json(asg: dict[Var, Element], model: Model) -> dict[str, str]:
    return {v.name: model.serialize(e) for v, e in sorted(asg.items(), key=_by_name)}


def parameter_lines(asg: dict[Var, Element], model: Model) -> list[str]:
    if not asg:
        return []
    return ["parameters: " + ", ".join(f"{k}={v}" for k, v in parameters_json(asg, model).items())]


def save_state(args: argparse.Namespace, model: Model) -> None:
    if getattr(args, "save_state", None):
        if not isinstance(model, GenericModel):
            raise SemanticError("--save-state applies to the generic backend only")
        with open(args.save_state, "w") as fh:
            json.dump(model.dump(), fh, sort_keys=True, indent=1)


# ---------------------------------------------------------------------------
# subcommands; each returns (json document, text lines)


def cmd_parse(args, cfg: SessionConfig):
    phi = parse(read_formula(args), cfg.n)
    ctx = sort_context(phi)
    doc = {"formula": to_text(phi), "free": {k: ctx[k] for k in sorted(ctx)},
           "quantifier_free": is_quantifier_free(phi), "quantifier_depth": quantifier_depth(phi)}
    return doc, [to_text(phi)]


def cmd_qe(args, cfg: SessionConfig):
    phi = parse(read_formula(args), cfg.n)
    out = to_text(eliminate(phi))
    return {"input": to_text(phi), "output": out}, [out]


def cmd_decide(args, cfg: SessionConfig):
    phi = parse(read_formula(args), cfg.n)
    try:
        verdict = decide(phi)
    except NotASentence as e:
        raise SemanticError(str(e)) from None
    return {"sentence": to_text(phi), "verdict": verdict}, ["true" if verdict else "false"]


def cmd_eval(args, cfg: SessionConfig):
    phi = parse(read_formula(args), cfg.n)
    model = cfg.model(args.state)
    asg = parse_assignments(args.assign, phi, model)
    missing = free_vars(phi) - set(asg)
    if missing:
        names = ", ".join(sorted(v.name for v in missing))
        raise SemanticError(f"no value given for {names}; use --assign NAME=ELEMENT")
    verdict = evaluate(phi, asg, model)
    doc = {"formula": to_text(phi), "model": cfg.backend, "verdict": verdict,
           "assignment": parameters_json(asg, model)}
    return doc, ["true" if verdict else "false"]


def _by_name(item):
    return item[0].name


def _unary_setup(args, cfg: SessionConfig, want_sort: int | None = None):
    phi = parse(read_formula(args), cfg.n)
    model = cfg.model(args.state)
    x = pick_var(phi, args.var, want_sort)
    asg = parse_assignments(args.assign, phi, model)
    if x in asg:
        raise SemanticError(f"{x.name} is the set variable and cannot be assigned")
    asg = fill_parameters(phi, asg, {x}, model, cfg.seed)
    qf = phi if is_quantifier_free(phi) else eliminate(phi)
    return phi, qf, model, x, asg


def cmd_decompose(args, cfg: SessionConfig):
    phi, qf, model, x, asg = _unary_setup(args, cfg, want_sort=0)
    grid = Grid(qf, x, asg, model)
    dec = decompose_grid(grid)
    problems = verify_decomposition(dec, grid)
    if problems:
        raise ContractViolation("decomposition failed its own check: " + "; ".join(problems))
    doc = dec.to_json(model)
    doc["parameters"] = parameters_json(asg, model)
    lines = parameter_lines(asg, model) + [f"E0: {', '.join(doc['points']) or '(none)'}"]
    for k, iv in enumerate(doc["intervals"], start=1):
        lines.append(f"I{k}: " + " x ".join(f"({lo}, {hi})" for lo, hi in iv))
    if not doc["intervals"]:
        lines.append("no multi-intervals")
    return doc, lines


def cmd_code_set(args, cfg: SessionConfig):
    phi, qf, model, x, asg = _unary_setup(args, cfg)
    code = code_set(qf, x, asg, model)
    if not round_trip(code, qf, x, asg, model):
        raise ContractViolation("set code does not define the original set")
    doc = {"parameters": parameters_json(asg, model), "code": code.to_json(model)}
    return doc, parameter_lines(asg, model) + [code.dumps(model)]


def cmd_code_fun(args, cfg: SessionConfig):
    phi = parse(read_formula(args), cfg.n)
    model = cfg.model(args.state)
    x, y = pick_var(phi, args.var), pick_var(phi, args.out)
    asg = parse_assignments(args.assign, phi, model)
    asg = fill_parameters(phi, asg, {x, y}, model, cfg.seed)
    try:
        code = code_function(phi, x, y, asg, model)
    except NotAFunction as e:
        raise SemanticError(str(e)) from None
    problems = verify_function_code(code, phi if is_quantifier_free(phi) else eliminate(phi),
                                    x, y, asg, model)
    if problems:
        raise ContractViolation("function code failed its own check: " + "; ".join(problems))
    doc = {"parameters": parameters_json(asg, model), "code": code.to_json(model)}
    return doc, parameter_lines(asg, model) + [code.dumps(model)]


def cmd_sample(args, cfg: SessionConfig):
    phi, qf, model, x, asg = _unary_setup(args, cfg)
    for cand in candidate_points(model, x, asg.values()):
        inner = dict(asg)
        inner[x] = cand
        if eval_qf(qf, inner, model):
            save_state(args, model)
            text = model.serialize(cand)
            doc = {"parameters": parameters_json(asg, model), "variable": x.name,
                   "sort": x.sort, "element": text}
            return doc, parameter_lines(asg, model) + [text]
    raise SemanticError(f"no {x.name} satisfies the formula at these parameters")


def cmd_axioms(args, cfg: SessionConfig):
    model = cfg.model()
    which = [args.axiom] if args.axiom else sorted(ax.AXIOMS)
    reports = [ax.axiom_check(model, k, trials=args.trials, seed=cfg.seed) for k in which]
    doc = {"model": cfg.backend, "n": model.n, "seed": cfg.seed,
           "reports": [r.as_dict() for r in reports]}
    lines = [f"axiom {r.axiom}: {r.trials} trials, {len(r.failures)} failures  ({ax.AXIOMS[r.axiom]})"
             for r in reports]
    for r in reports:
        lines.extend(f"  falsified: {msg}" for msg in r.failures[:5])
    if any(not r.ok for r in reports):
        raise CheckFailed(doc, lines)
    return doc, lines


class CheckFailed(Exception):
    def __init__(self, doc, lines):
        super().__init__("check failed")
        self.doc, self.lines = doc, lines


# ---------------------------------------------------------------------------
# self test


def load_sentences() -> list[dict[str, Any]]:
    """The fixed sentence suite shipped with the package (two ordered sorts)."""
    text = resources.files("von").joinpath("data/sentences.txt").read_text()
    out = []
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        name, verdict, tag, sentence = (part.strip() for part in line.split("|", 3))
        out.append({"name": name, "expected": verdict == "true", "tag": tag, "sentence": sentence})
    return out


def _suite_sentences(seed: int, size: int) -> dict:
    model = QSqrt2Model(seed)
    bad = []
    suite = load_sentences()
    for item in suite:
        phi = parse(item["sentence"], 2)
        d = decide(phi)
        e = evaluate(phi, {}, model)
        if not d == e == item["expected"]:
            bad.append(item["name"])
    return {"suite": "sentences", "cases": len(suite), "failures": bad}


def _suite_qe(seed: int, size: int) -> dict:
    import random
    from .randgen import random_assignment, random_formula
    rng = random.Random(seed)
    bad = []
    for k in range(size):
        n = rng.choice([1, 2, 3])
        phi, free = random_formula(n, rng)
        qf = eliminate(phi)
        model = GenericModel(n, seed=seed + k)
        for _ in range(20):
            asg = random_assignment(model, free, rng)
            if evaluate(phi, asg, model) != eval_qf(qf, asg, model):
                bad.append(to_text(phi))
                break
    return {"suite": "qe-oracle", "cases": size, "failures": bad}


def _suite_axioms(seed: int, size: int) -> dict:
    bad = []
    backends: list[tuple[str, Callable[[], Model]]] = [
        (f"generic n={n}", lambda n=n: GenericModel(n, seed)) for n in (1, 2, 3)]
    backends.append(("qsqrt2", lambda: QSqrt2Model(seed)))
    for name, make in backends:
        for k in sorted(ax.AXIOMS):
            r = ax.axiom_check(make(), k, trials=size, seed=seed)
            bad.extend(f"{name} axiom {k}: {msg}" for msg in r.failures[:3])
    return {"suite": "axioms", "cases": 4 * len(ax.AXIOMS), "failures": bad}


SUITES = {"sentences": _suite_sentences, "qe-oracle": _suite_qe, "axioms": _suite_axioms}


def _run_suite(job: tuple[str, int, int]) -> dict:
    name, seed, size = job
    return SUITES[name](seed, size)


def cmd_selftest(args, cfg: SessionConfig):
    sizes = {"sentences": 0, "qe-oracle": args.formulas, "axioms": args.trials}
    jobs = [(name, cfg.seed, sizes[name]) for name in SUITES]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_suite, jobs))
    else:
        results = [_run_suite(j) for j in jobs]
    doc = {"seed": cfg.seed, "suites": results, "ok": all(not r["failures"] for r in results)}
    lines = [f"{r['suite']}: {r['cases']} cases, {len(r['failures'])} failures" for r in results]
    for r in results:
        lines.extend(f"  {r['suite']}: {f}" for f in r["failures"][:5])
    if not doc["ok"]:
        raise CheckFailed(doc, lines)
    return doc, lines


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    # defaults are suppressed so that a flag given before the subcommand is
    # not overwritten by the subparser; ``_merged`` fills them in
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--sorts", type=int, metavar="N", help="number of ordered sorts (default 2)")
    common.add_argument("--model", choices=["generic", "qsqrt2"], help="backend (default generic)")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--format", choices=["text", "json"], help="output format (default text)")
    common.add_argument("--input", metavar="FILE", help="read the formula from FILE")

    top = argparse.ArgumentParser(prog="von", description=__doc__.split("\n\n")[0],
                                  parents=[common])
    sub = top.add_subparsers(dest="command", required=True)

    def add(name: str, fn, help_text: str, formula: bool = True):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text,
                           argument_default=argparse.SUPPRESS)
        if formula:
            p.add_argument("formula", nargs="?", default=None)
        p.set_defaults(func=fn)
        return p

    add("parse", cmd_parse, "sort-check a formula and print it in normal form")
    add("qe", cmd_qe, "eliminate quantifiers")
    add("decide", cmd_decide, "decide a sentence")
    p = add("eval", cmd_eval, "evaluate a formula in a model")
    p.add_argument("--assign", action="append", default=[], metavar="NAME=ELEMENT")
    p.add_argument("--state", default=None, help="generic model state (JSON dump) to load")
    for name, fn, what in [("decompose", cmd_decompose, "canonical decomposition of {x : phi}"),
                           ("code-set", cmd_code_set, "canonical code of the set {x : phi}"),
                           ("sample", cmd_sample, "an element x with phi(x)")]:
        p = add(name, fn, what)
        p.add_argument("--var", default="x", help="the set variable (default x)")
        p.add_argument("--assign", action="append", default=[], metavar="NAME=ELEMENT")
        p.add_argument("--state", default=None, help="generic model state (JSON dump) to load")
        if name == "sample":
            p.add_argument("--save-state", default=None, metavar="FILE",
                           help="write the grown generic state to FILE")
    p = add("code-fun", cmd_code_fun, "canonical code of the function x -> y defined by phi(x, y)")
    p.add_argument("--var", default="x", help="argument variable (default x)")
    p.add_argument("--out", default="y", help="value variable (default y)")
    p.add_argument("--assign", action="append", default=[], metavar="NAME=ELEMENT")
    p.add_argument("--state", default=None, help="generic model state (JSON dump) to load")
    p = add("axioms", cmd_axioms, "randomized axiom checks against the chosen backend", formula=False)
    p.add_argument("--axiom", type=int, choices=sorted(ax.AXIOMS), default=None)
    p.add_argument("--trials", type=int, default=1000)
    p = add("selftest", cmd_selftest, "sentence suite, QE oracle and axiom checks", formula=False)
    p.add_argument("--formulas", type=int, default=100, help="random formulas for the QE oracle")
    p.add_argument("--trials", type=int, default=200, help="trials per axiom and backend")
    p.add_argument("--jobs", type=int, default=1, help="run the suites in parallel processes")
    return top


GLOBAL_DEFAULTS = {"sorts": 2, "model": "generic", "seed": 0, "format": "text", "input": None}


def _merged(args: argparse.Namespace) -> SessionConfig:
    for name, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, value)
    return SessionConfig(args.sorts, args.model, args.seed, args.format)


def emit(cfg_fmt: str, doc, lines, stream) -> None:
    if cfg_fmt == "json":
        stream.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        stream.write("\n".join(lines) + "\n")


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    fmt = getattr(args, "format", GLOBAL_DEFAULTS["format"])
    try:
        cfg = _merged(args)
        doc, lines = args.func(args, cfg)
    except (ParseError, SortError) as e:
        stderr.write(f"error: {e}\n")
        return 1
    except CheckFailed as e:
        emit(fmt, e.doc, e.lines, stdout)
        return 3
    except (ContractViolation, ExhaustivenessFailure) as e:
        stderr.write(f"contract violation: {e}\n")
        return 3
    except (SemanticError, NotInteriorPoint, ValueError, OSError) as e:
        stderr.write(f"error: {e}\n")
        return 2
    emit(fmt, doc, lines, stdout)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
