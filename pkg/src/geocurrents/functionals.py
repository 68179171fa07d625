"""Real-valued functions on conjugacy classes, plus a name-addressable registry."""
from __future__ import annotations

import json
import math
import random
import threading
from dataclasses import dataclass, field
from typing import Callable

from .curves import (MultiCurve, as_multicurve, intersection_number, self_intersection)
from .errors import GeoCurrentsError, InvalidLaminationError, ParseError, PreconditionError
from .hypgeom import translation_length
from .sgroup import (GeneratingSet, GroupElement, Presentation, ball_list, conjugacy_classes,
                     conjugacy_normal_form, get_presentation, stable_length_report, word_length)

Evaluator = Callable[[GroupElement], float]


class CurveFunctional:
    """A function on conjugacy classes, extended additively to multicurves when declared additive.

    Values are memoised by conjugacy normal form; :meth:`raw` evaluates without
    normalising or caching, which is what invariance checks compare against.
    """

    def __init__(self, name: str, evaluator: Evaluator, *, symmetric: bool = False,
                 additive: bool = True, claims_smoothing: bool = False,
                 integer_valued: bool = False):
        self.name = name
        self._evaluator = evaluator
        self.symmetric = symmetric
        self.additive = additive
        self.claims_smoothing = claims_smoothing
        self.integer_valued = integer_valued
        self._cache: dict[tuple[str, tuple[int, ...]], float] = {}
        self._lock = threading.Lock()

    def raw(self, g: GroupElement) -> float:
        return float(self._evaluator(g))

    def value(self, g: GroupElement) -> float:
        nf = conjugacy_normal_form(g)
        key = (nf.pres.mode, nf.word)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        val = float(self._evaluator(nf))
        with self._lock:
            self._cache.setdefault(key, val)
        return val

    def __call__(self, x) -> float:
        if isinstance(x, GroupElement):
            return self.value(x)
        if isinstance(x, MultiCurve):
            if not self.additive:
                raise PreconditionError(f"{self.name} is not declared additive")
            return sum(w * self.value(g) for g, w in x)
        raise PreconditionError(f"cannot evaluate a functional on {type(x).__name__}")

    def scaled(self, factor: float, name: str | None = None) -> "CurveFunctional":
        return CurveFunctional(name or f"{factor:g}*{self.name}", lambda g: factor * self.raw(g),
                               symmetric=self.symmetric, additive=self.additive,
                               claims_smoothing=self.claims_smoothing and factor >= 0)

    def __repr__(self) -> str:
        return f"CurveFunctional({self.name!r})"


# ---------------------------------------------------------------------------
# concrete functionals
# ---------------------------------------------------------------------------

def _length(g: GroupElement) -> float:
    if g.is_identity:
        return 0.0
    return translation_length(g.iso)


def hyperbolic_length() -> CurveFunctional:
    return CurveFunctional("hyperbolic", _length, symmetric=True, claims_smoothing=True)


def zero_functional() -> CurveFunctional:
    return CurveFunctional("zero", lambda g: 0.0, symmetric=True, claims_smoothing=True,
                           integer_valued=True)


def _label(C: MultiCurve) -> str:
    return " + ".join(f"{w:g}[{C.pres.format(g.word)}]" for g, w in C)


def intersection_with(C) -> CurveFunctional:
    C = as_multicurve(C)
    integral = all(float(w).is_integer() for _, w in C)

    def evaluate(g: GroupElement) -> float:
        if conjugacy_normal_form(g).is_identity:
            return 0.0
        return intersection_number(C, g)

    return CurveFunctional(f"i({_label(C)}, .)", evaluate, symmetric=True, claims_smoothing=True,
                           integer_valued=integral)


def graph_length(gs: GeneratingSet, stabilized: bool = False, N: int = 16) -> CurveFunctional:
    """Conjugacy word length over ``gs``, optionally homogenised along powers."""
    if stabilized:
        def evaluate(g: GroupElement) -> float:
            if conjugacy_normal_form(g).is_identity:
                return 0.0
            return stable_length_report(lambda h: word_length(h, gs), g, N).value
    else:
        def evaluate(g: GroupElement) -> float:
            return word_length(g, gs)
    integral = not stabilized and all(float(w).is_integer() for w in gs.weights)
    return CurveFunctional("graph-stable" if stabilized else "graph", evaluate,
                           symmetric=gs.symmetric, claims_smoothing=stabilized,
                           integer_valued=integral)


def tree_translation_length(weights) -> CurveFunctional:
    """Translation length on the dual tree of a weighted simple multicurve.

    ``weights`` is a list of (curve, weight) with curves given as elements,
    words or single-component multicurves.
    """
    pairs: list[tuple[GroupElement, float]] = []
    for curve, w in weights:
        mc = as_multicurve(curve, _pres_of(weights))
        for g, inner in mc:
            pairs.append((g, inner * float(w)))
    if not pairs:
        raise InvalidLaminationError("empty lamination")
    lam = MultiCurve.build(pairs[0][0].pres, pairs)
    comps = [g for g, _ in lam]
    for g in comps:
        if self_intersection(g) != 0:
            raise InvalidLaminationError(f"{g} is not simple")
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            if intersection_number(comps[i], comps[j]) != 0:
                raise InvalidLaminationError(f"{comps[i]} and {comps[j]} intersect")
    f = intersection_with(lam)
    f.name = "tree(" + _label(lam) + ")"
    return f


def _pres_of(weights) -> Presentation | None:
    for curve, _ in weights:
        if isinstance(curve, (GroupElement, MultiCurve)):
            return curve.pres
    return None


# ---------------------------------------------------------------------------
# derived quantities
# ---------------------------------------------------------------------------

def systole_estimate(f: CurveFunctional, L: int, pres: Presentation) -> float:
    """Minimum of f over nontrivial classes appearing in ball(L)."""
    vals = [f(g) for g in conjugacy_classes(L, pres) if not g.is_identity]
    return min(vals)


@dataclass
class HalfIntegralityReport:
    passed: bool
    values_integral: bool
    checked: int
    witness: str | None = None
    witness_value: float | None = None
    box_values: list[float] = field(default_factory=list)
    boxes_half_integral: bool | None = None

    def to_dict(self) -> dict:
        return {"passed": self.passed, "values_integral": self.values_integral,
                "checked": self.checked, "witness": self.witness,
                "witness_value": self.witness_value, "box_values": self.box_values,
                "boxes_half_integral": self.boxes_half_integral}


def halfintegrality_check(f: CurveFunctional, L: int, pres: Presentation, boxes=(),
                          tol: float = 1e-6, nmax: int = 40) -> HalfIntegralityReport:
    """Integer values on ball(L) classes; box estimates of twice the dual current near integers."""
    classes = [g for g in conjugacy_classes(L, pres) if not g.is_identity]
    for g in classes:
        v = f(g)
        if abs(v - round(v)) > tol:
            return HalfIntegralityReport(False, False, len(classes), pres.format(g.word), v)
    rep = HalfIntegralityReport(True, True, len(classes))
    if boxes:
        from .currents import box_measure_estimate

        vals = [box_measure_estimate(f, sys, nmax, tol).value for sys in boxes]
        rep.box_values = vals
        rep.boxes_half_integral = all(abs(2 * v - round(2 * v)) <= 10 * tol for v in vals)
        rep.passed = rep.boxes_half_integral
    return rep


def conjugation_defect(f: CurveFunctional, pres: Presentation, count: int = 100, seed: int = 0,
                       L: int = 3) -> float:
    """Largest |f(g) - f(c g c^-1)| over seeded classes g and conjugators c from ball(L)."""
    rng = random.Random(seed)
    els = [g for g in ball_list(L, pres) if not g.is_identity]
    worst = 0.0
    for _ in range(count):
        g, c = rng.choice(els), rng.choice(els)
        worst = max(worst, abs(f.raw(g) - f.raw(c * g * c.inverse())))
    return worst


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, Callable[[Presentation, str | None], CurveFunctional]] = {}


def register(name: str, factory: Callable[[Presentation, str | None], CurveFunctional]) -> None:
    _REGISTRY[name] = factory


def registered_names() -> list[str]:
    return sorted(_REGISTRY)


def _read_json(path: str | None):
    if not path:
        raise ParseError("this functional needs a JSON file argument")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _graph_factory(pres: Presentation, arg: str | None) -> CurveFunctional:
    data = _read_json(arg)
    if isinstance(data, dict):
        gs = GeneratingSet.from_json(pres, data["generators"])
        return graph_length(gs, bool(data.get("stabilized", False)))
    return graph_length(GeneratingSet.from_json(pres, data))


def _tree_factory(pres: Presentation, arg: str | None) -> CurveFunctional:
    mc = MultiCurve.from_json(pres, _read_json(arg))
    return tree_translation_length([(g, w) for g, w in mc])


def _period_factory(pres: Presentation, arg: str | None) -> CurveFunctional:
    from .crossratio import hyperbolic_crossratio, period_functional

    return period_functional(hyperbolic_crossratio())


register("hyperbolic", lambda pres, arg: hyperbolic_length())
register("zero", lambda pres, arg: zero_functional())
register("graph", _graph_factory)
register("curve", lambda pres, arg: intersection_with(MultiCurve.from_json(pres, _read_json(arg))))
register("tree", _tree_factory)
register("period", _period_factory)


def get_functional(text: str, pres: Presentation | str = "genus2") -> CurveFunctional:
    """Build a functional from ``name`` or ``name:argument``."""
    if isinstance(pres, str):
        pres = get_presentation(pres)
    name, _, arg = text.partition(":")
    if name not in _REGISTRY:
        raise ParseError(f"unknown functional {name!r}; known: {', '.join(registered_names())}")
    try:
        return _REGISTRY[name](pres, arg or None)
    except (OSError, KeyError, ValueError) as exc:
        raise ParseError(f"cannot build functional {text!r}: {exc}") from exc


def safe_value(f: CurveFunctional, g: GroupElement) -> float:
    """f(g), or NaN when a sub-computation fails; NaN never passes an axiom check."""
    try:
        return f(g)
    except GeoCurrentsError:
        return math.nan
