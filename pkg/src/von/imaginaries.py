"""Canonical codes for definable unary sets and functions.

A code is a tuple of model elements (plus infinity markers) that depends only
on the defined object, never on the formula or parameters used to define it.

* A set in R0 is coded by its canonical decomposition.
* A set ``E`` in R_k splits into the image part, coded through its pull-back
  ``{z in R0 : f_k(z) in E}``, and the non-image part. On non-image points
  every ``g_k(x)`` is 0, so the non-image part is a finite union of points and
  ``<_k``-intervals cut at the points of ``<params>``.
* A function ``h: R_i -> R_j`` is coded by the regions on which it agrees
  with each term of ``<x>`` and with each value in ``<params>``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .defsets import Grid, decompose_grid, multi_interval_json, serialize_endpoint
from .model import (
    Arrangement, Element, Endpoint, Model, MultiInterval, eval_qf, evaluate,
)
from .qe import eliminate
from .syntax import (
    TRUE, ZERO, Eq, Exists, F, Forall, Formula, G, Lt, Term, Var, all_vars, conj, disj,
    free_vars, fresh_name, iff, in_image, is_quantifier_free, neg, normalize_formula,
    subst_term, substitute,
)


class NotAFunction(ValueError):
    pass


class ExhaustivenessFailure(AssertionError):
    pass


@dataclass(frozen=True)
class SetCode:
    """Code of a definable subset of R_sort.

    For ``sort == 0`` ``points`` are the exceptional R0 points and ``intervals``
    the maximal multi-intervals. For ``sort >= 1`` ``image`` codes the pull-back
    of the image part, ``points`` the isolated non-image points and ``intervals``
    the maximal ``<_sort``-intervals of the non-image part, as one-sort
    MultiIntervals.
    """

    sort: int
    points: tuple[Element, ...]
    intervals: tuple[tuple[Endpoint, ...] | MultiInterval, ...]
    image: "SetCode | None" = None

    def to_json(self, model: Model) -> dict:
        doc: dict = {"sort": self.sort, "points": [model.serialize(e) for e in self.points]}
        if self.sort == 0:
            doc["intervals"] = [multi_interval_json(model, mi) for mi in self.intervals]
        else:
            doc["image"] = self.image.to_json(model)
            doc["intervals"] = [[serialize_endpoint(model, lo), serialize_endpoint(model, hi)]
                                for lo, hi in self.intervals]
        return doc

    def dumps(self, model: Model) -> str:
        return json.dumps(self.to_json(model), sort_keys=True, separators=(",", ":"))

    def coordinates(self) -> list[Endpoint]:
        """Every element or marker of the code, in serialization order."""
        out: list[Endpoint] = list(self.points)
        for iv in self.intervals:
            if isinstance(iv, MultiInterval):
                out.extend(b for pair in iv.bounds for b in pair)
            else:
                out.extend(iv)
        if self.image is not None:
            out.extend(self.image.coordinates())
        return out

    def is_empty(self) -> bool:
        own = not self.points and not self.intervals
        return own and (self.image is None or self.image.is_empty())

    def contains(self, model: Model, e: Element) -> bool:
        if e.sort != self.sort:
            return False
        if self.sort == 0:
            return e in self.points or any(model.in_multi_interval(e, mi) for mi in self.intervals)
        k = self.sort
        if model.in_image(k, e):
            return self.image.contains(model, model.apply_g(k, e))
        return e in self.points or any(model.inside(k, e, lo, hi) for lo, hi in self.intervals)


def exceptional_elements(code: SetCode, model: Model) -> list[Element]:
    """Members of the coded set with no neighbourhood inside it."""
    if code.sort == 0:
        return list(code.points)
    k = code.sort
    return [model.apply_f(k, p) for p in code.image.points] + list(code.points)


# ---------------------------------------------------------------------------
# sets


def _check_unary(phi: Formula, x: Var, params: Mapping[Var, Element]) -> None:
    if not is_quantifier_free(phi):
        raise ValueError("expected a quantifier-free formula; run eliminate first")
    extra = free_vars(phi) - {x} - set(params)
    if extra:
        raise ValueError(f"parameters missing for {', '.join(sorted(v.name for v in extra))}")


def _pullback(phi: Formula, x: Var, k: int, taken: set[str]) -> tuple[Formula, Var]:
    z = Var(fresh_name("z", taken), 0)
    return normalize_formula(substitute(phi, x, F(k, z))), z


def _non_image_part(phi: Formula, x: Var, params: Mapping[Var, Element], model: Model,
                    arr: Arrangement) -> tuple[tuple[Element, ...], tuple[tuple[Endpoint, Endpoint], ...]]:
    """Isolated points and maximal intervals of ``{y not in image : phi(y)}``."""
    k = x.sort
    pts = arr.points[k]

    def holds(y: Element) -> bool:
        asg = dict(params)
        asg[x] = y
        return evaluate(phi, asg, model)

    gap_in = []
    for lo, hi in arr.gaps(k):
        token = model.snapshot()
        try:
            gap_in.append(holds(model.sample_interval(k, lo, hi, want_image=False, exclude=pts)))
        finally:
            model.restore(token)
    # None marks an image point of <params>: outside the non-image part, so free
    point_in: list[bool | None] = [None if model.in_image(k, p) else holds(p) for p in pts]

    ext = arr.extended(k)
    intervals: list[tuple[Endpoint, Endpoint]] = []
    start: int | None = None
    for g, inside in enumerate(gap_in):
        if inside and start is None:
            start = g
        if inside and (g == len(pts) or point_in[g] is False or not gap_in[g + 1]):
            intervals.append((ext[start], ext[g + 1]))
            start = None
    isolated = []
    for idx, p in enumerate(pts):
        if point_in[idx] and not (gap_in[idx] and gap_in[idx + 1]):
            isolated.append(p)
    return tuple(isolated), tuple(intervals)


def code_set(phi: Formula, x: Var, params: Mapping[Var, Element], model: Model) -> SetCode:
    """Canonical code of ``{x : phi}``; ``x`` may have any sort."""
    _check_unary(phi, x, params)
    if x.sort == 0:
        dec = decompose_grid(Grid(phi, x, params, model))
        return SetCode(0, dec.points, dec.intervals)
    k = x.sort
    pulled, z = _pullback(phi, x, k, {v.name for v in all_vars(phi)} | {v.name for v in params})
    image = code_set(pulled, z, params, model)
    arr = Arrangement.of(model, params.values())
    points, intervals = _non_image_part(phi, x, params, model, arr)
    return SetCode(k, points, intervals, image)


def set_code_formula(code: SetCode, x: Var, prefix: str = "c") -> tuple[Formula, dict[Var, Element]]:
    """A formula in ``x`` and fresh parameters that defines the coded set.

    Each distinct element of the code becomes one parameter, so the formula
    is built from the code alone.
    """
    binding: dict[Element, Var] = {}

    def par(e: Element) -> Var:
        if e not in binding:
            binding[e] = Var(f"{prefix}{len(binding)}", e.sort)
        return binding[e]

    def build(c: SetCode, u) -> Formula:
        if c.sort == 0:
            parts = [Eq(u, par(p)) for p in c.points]
            for mi in c.intervals:
                lits = []
                for i, (lo, hi) in enumerate(mi.bounds, start=1):
                    if isinstance(lo, Element):
                        lits.append(Lt(i, par(lo), F(i, u)))
                    if isinstance(hi, Element):
                        lits.append(Lt(i, F(i, u), par(hi)))
                parts.append(conj(lits))
            return disj(parts)
        k = c.sort
        own = [Eq(u, par(p)) for p in c.points]
        for lo, hi in c.intervals:
            lits = []
            if isinstance(lo, Element):
                lits.append(Lt(k, par(lo), u))
            if isinstance(hi, Element):
                lits.append(Lt(k, u, par(hi)))
            own.append(conj(lits))
        img = build(c.image, G(k, u))
        return disj([conj([in_image(k, u), img]), conj([neg(in_image(k, u)), disj(own)])])

    phi = normalize_formula(build(code, x))
    return phi, {v: e for e, v in binding.items()}


def _disjoint_names(phi: Formula, taken: set[str], prefix: str) -> str:
    names = {v.name for v in all_vars(phi)} | taken
    while any(n.startswith(prefix) for n in names):
        prefix = prefix + "c"
    return prefix


def same_set(phi: Formula, psi: Formula, x: Var, asg: Mapping[Var, Element], model: Model) -> bool:
    """Semantic check that ``phi`` and ``psi`` define the same set at ``asg``."""
    qf = eliminate(Forall(x, iff(phi, psi)))
    return eval_qf(qf, dict(asg), model)


def round_trip(code: SetCode, phi: Formula, x: Var, params: Mapping[Var, Element],
               model: Model) -> bool:
    """Does the formula rebuilt from ``code`` define the same set as ``phi``?"""
    prefix = _disjoint_names(phi, {v.name for v in params}, "c")
    psi, binding = set_code_formula(code, x, prefix)
    asg = dict(params)
    asg.update(binding)
    return same_set(phi, psi, x, asg, model)


# ---------------------------------------------------------------------------
# functions


@dataclass(frozen=True)
class Region:
    """Where the function agrees with ``term`` (a term of ``<x>``) or equals ``value``."""

    label: str
    code: SetCode
    term: Term | None = None
    value: Element | None = None

    def to_json(self, model: Model) -> dict:
        doc = {"label": self.label, "set": self.code.to_json(model)}
        if self.value is not None:
            doc["value"] = model.serialize(self.value)
        return doc


@dataclass(frozen=True)
class FunctionCode:
    domain: int
    codomain: int
    regions: tuple[Region, ...] = field(default_factory=tuple)

    def to_json(self, model: Model) -> dict:
        return {"domain": self.domain, "codomain": self.codomain,
                "regions": [r.to_json(model) for r in self.regions]}

    def dumps(self, model: Model) -> str:
        return json.dumps(self.to_json(model), sort_keys=True, separators=(",", ":"))

    def apply(self, model: Model, e: Element) -> Element:
        for r in self.regions:
            if r.code.contains(model, e):
                if r.value is not None:
                    return r.value
                return model.eval_term(r.term, {Var("x", self.domain): e})
        raise ExhaustivenessFailure("no region contains the argument")


def x_terms(i: int, j: int) -> tuple[list[Term], list[Term]]:
    """Constant and non-constant ``R_j``-valued terms of ``<x>`` for ``x: R_i``.

    Every element of ``<x>`` in ``R_j`` is the value of one of them.
    """
    x = Var("x", i)
    consts: list[Term] = [ZERO if j == 0 else F(j, ZERO)]
    if i == 0:
        moving: list[Term] = [x if j == 0 else F(j, x)]
    else:
        moving = [G(i, x) if j == 0 else F(j, G(i, x))]
        if j == i:
            moving.insert(0, x)
    return consts, moving


def check_function(phi: Formula, x: Var, y: Var, params: Mapping[Var, Element], model: Model) -> bool:
    """Is ``phi(x, y)`` the graph of a total function of ``x`` at these parameters?"""
    taken = {v.name for v in all_vars(phi)} | {v.name for v in params}
    y2 = Var(fresh_name(y.name, taken), y.sort)
    # purely existential forms avoid a blow-up from quantifier alternation
    partial = Exists(x, neg(Exists(y, phi)))
    ambiguous = Exists(x, Exists(y, Exists(y2, conj([phi, substitute(phi, y, y2), neg(Eq(y, y2))]))))
    for sentence in (partial, ambiguous):
        qf = eliminate(sentence)
        extra = free_vars(qf) - set(params)
        if extra:
            raise ValueError(f"parameters missing for {', '.join(sorted(v.name for v in extra))}")
        if eval_qf(qf, dict(params), model):
            return False
    return True


def code_function(phi: Formula, x: Var, y: Var, params: Mapping[Var, Element],
                  model: Model) -> FunctionCode:
    """Canonical code of the function ``x -> y`` whose graph is ``phi``."""
    if not check_function(phi, x, y, params, model):
        raise NotAFunction("the formula is not the graph of a total function")
    i, j = x.sort, y.sort
    taken = {v.name for v in all_vars(phi)} | {v.name for v in params}
    xv = Var(fresh_name("x", taken), i)
    taken.add(xv.name)
    graph = normalize_formula(substitute(phi, x, xv))
    if not is_quantifier_free(graph):
        graph = eliminate(graph)

    consts, moving = x_terms(i, j)
    regions: list[Region] = []
    earlier: list[Formula] = []
    candidates: list[tuple[str, Formula, Term | None, Element | None]] = []
    for t in consts + moving:
        tt = substitute_term_x(t, xv)
        candidates.append((str(t), normalize_formula(substitute(graph, y, tt)), t, None))
    # the remaining values lie in <params>, outside the constants
    arr = Arrangement.of(model, params.values())
    zero_val = model.eval_term(consts[0], {})
    asg = dict(params)
    for k, a in enumerate(arr.points[j]):
        if a == zero_val:
            continue
        av = Var(fresh_name(f"v{k}", taken), j)
        taken.add(av.name)
        asg[av] = a
        candidates.append((model.serialize(a), normalize_formula(substitute(graph, y, av)), None, a))

    # x goes to the first candidate agreeing with h on a neighbourhood of x;
    # failing that, to the first candidate agreeing at x
    interiors: list[Formula] = []
    for _, agree, _, _ in candidates:
        exc = exceptional_elements(code_set(agree, xv, asg, model), model)
        avoid = []
        for e in exc:
            ev = Var(fresh_name("e", taken), i)
            taken.add(ev.name)
            asg[ev] = e
            avoid.append(neg(Eq(xv, ev)))
        interiors.append(conj([agree, *avoid]))
    nowhere_interior = conj([neg(f) for f in interiors])
    for k, (label, agree, term, value) in enumerate(candidates):
        generic = conj([interiors[k], *(neg(f) for f in interiors[:k])])
        special = conj([agree, nowhere_interior, *(neg(c[1]) for c in candidates[:k])])
        earlier.append(agree)
        code = code_set(disj([generic, special]), xv, asg, model)
        if not code.is_empty():
            regions.append(Region(label, code, term, value))

    # every x is covered: h(x) lies in <params> or in <x>
    if code_set(disj(earlier), xv, asg, model) != code_set(TRUE, xv, asg, model):
        raise ExhaustivenessFailure("some argument takes a value outside <params, x>")
    return FunctionCode(i, j, tuple(regions))


def substitute_term_x(t: Term, xv: Var) -> Term:
    return subst_term(t, lambda s: xv if isinstance(s, Var) else None)


def function_code_formula(code: FunctionCode, x: Var, y: Var) -> tuple[Formula, dict[Var, Element]]:
    """Graph formula rebuilt from the code, with fresh parameters for its coordinates."""
    parts = []
    asg: dict[Var, Element] = {}
    for r, region in enumerate(code.regions):
        psi, binding = set_code_formula(region.code, x, prefix=f"r{r}c")
        asg.update(binding)
        if region.value is not None:
            vv = Var(f"r{r}v", code.codomain)
            asg[vv] = region.value
            target: Term = vv
        else:
            target = substitute_term_x(region.term, x)
        parts.append(conj([psi, Eq(y, target)]))
    return normalize_formula(disj(parts)), asg


def verify_function_code(code: FunctionCode, phi: Formula, x: Var, y: Var,
                         params: Mapping[Var, Element], model: Model) -> list[str]:
    """Partition and round-trip checks; returns the list of failures."""
    problems = []
    names = {v.name for v in all_vars(phi)} | {v.name for v in params}
    if any(n.startswith("r") and n[1:2].isdigit() for n in names):
        raise ValueError("parameter names clash with region parameters")
    formulas = []
    asg = dict(params)
    for r, region in enumerate(code.regions):
        psi, binding = set_code_formula(region.code, x, prefix=f"r{r}c")
        asg.update(binding)
        formulas.append(psi)
    for a in range(len(formulas)):
        for b in range(a + 1, len(formulas)):
            overlap = eliminate(Exists(x, conj([formulas[a], formulas[b]])))
            if eval_qf(overlap, asg, model):
                problems.append(f"regions {code.regions[a].label} and {code.regions[b].label} overlap")
    if not eval_qf(eliminate(Forall(x, disj(formulas))), asg, model):
        problems.append("regions do not cover the domain")
    # with the graph functional and the regions a partition, the rebuilt
    # function agrees with h iff phi(x, t(x)) holds on every region
    agree = []
    for region, psi in zip(code.regions, formulas):
        if region.value is not None:
            vv = Var(fresh_name("w", names | {v.name for v in asg}), code.codomain)
            asg[vv] = region.value
            target: Term = vv
        else:
            target = substitute_term_x(region.term, x)
        agree.append(disj([neg(psi), normalize_formula(substitute(phi, y, target))]))
    if not evaluate(Forall(x, conj(agree)), asg, model):
        problems.append("rebuilt function differs from the original")
    return problems
