"""Checker suites deciding which inequalities and identities a functional satisfies on a sample.

Every check returns an :class:`AxiomReport`; a failing report always carries
the worst witness.  Verdicts are relative to the sample, never global.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .boundary import PairClass, classify_pair
from .config import get_config
from .errors import GeoCurrentsError, PreconditionError
from .functionals import CurveFunctional
from .sgroup import GroupElement, Presentation, ball_list, conjugacy_classes


@dataclass
class AxiomReport:
    axiom: str
    sample_size: int
    passed: bool
    worst_margin: float
    tolerance: float
    witness: dict | None = None
    skipped: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"axiom": self.axiom, "sample_size": self.sample_size, "passed": self.passed,
                "worst_margin": _finite(self.worst_margin), "tolerance": self.tolerance,
                "witness": self.witness, "skipped": self.skipped, "details": self.details}


def _finite(v: float):
    return v if math.isfinite(v) else str(v)


class _Tracker:
    """Keeps the smallest margin seen and the witness that produced it."""

    def __init__(self, name: str, threshold: float, tol: float):
        self.name, self.threshold, self.tol = name, threshold, tol
        self.worst = math.inf
        self.witness: dict | None = None
        self.count = 0
        self.skipped = 0
        self.failed_eval = False

    def add(self, margin: float, witness: dict) -> None:
        self.count += 1
        if math.isnan(margin):
            self.failed_eval = True
            margin = -math.inf
        if margin < self.worst:
            self.worst = margin
            self.witness = witness

    def report(self, details: dict | None = None) -> AxiomReport:
        passed = self.worst >= self.threshold and not self.failed_eval
        worst = self.worst if self.count else 0.0
        return AxiomReport(self.name, self.count, passed, worst, self.tol,
                           None if passed else self.witness, self.skipped, details or {})


# ---------------------------------------------------------------------------
# samples
# ---------------------------------------------------------------------------

@dataclass
class PairSample:
    pairs: list[tuple[GroupElement, GroupElement, PairClass]]
    rejected: int
    seed: int

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


def classified_pairs(pairs: Iterable[tuple[GroupElement, GroupElement]]) -> PairSample:
    out, rejected = [], 0
    for g, h in pairs:
        try:
            out.append((g, h, classify_pair(g, h)))
        except GeoCurrentsError:
            rejected += 1
    return PairSample(out, rejected, -1)


def sample_pairs(pres: Presentation, L: int | None = None, cap: int | None = None,
                 seed: int = 0, want=None) -> PairSample:
    """Seeded uniform sample of classifiable pairs from ball(L) x ball(L).

    ``want`` optionally filters by PairClass (e.g. ``lambda c: c.crossing``).
    """
    cfg = get_config()
    L = cfg.pair_radius if L is None else L
    cap = cfg.pair_cap if cap is None else cap
    els = [g for g in ball_list(L, pres) if not g.is_identity]
    rng = random.Random(seed)
    total = len(els) * len(els)
    out: list = []
    rejected = 0
    if total <= cap * 4:
        candidates = [(g, h) for g in els for h in els]
        rng.shuffle(candidates)
        source = iter(candidates)
    else:
        source = ((rng.choice(els), rng.choice(els)) for _ in range(200 * cap))
    for g, h in source:
        if len(out) >= cap:
            break
        try:
            cls = classify_pair(g, h)
        except GeoCurrentsError:
            rejected += 1
            continue
        if want is not None and not want(cls):
            continue
        out.append((g, h, cls))
    return PairSample(out, rejected, seed)


def sample_classes(pres: Presentation, L: int = 3, cap: int = 60, seed: int = 0) -> list[GroupElement]:
    classes = [g for g in conjugacy_classes(L, pres) if not g.is_identity]
    rng = random.Random(seed)
    if len(classes) > cap:
        classes = rng.sample(classes, cap)
    return classes


def _pair_witness(g: GroupElement, h: GroupElement, cls: PairClass, **values) -> dict:
    fmt = g.pres.format
    out = {"a": fmt(g.word), "b": fmt(h.word), "class": cls.value}
    out.update({k: (v if math.isfinite(v) else str(v)) for k, v in values.items()})
    return out


def _val(f: CurveFunctional, g: GroupElement) -> float:
    try:
        return f(g)
    except GeoCurrentsError:
        return math.nan


def _oriented(g: GroupElement, h: GroupElement, cls: PairClass):
    """Reverse h for anti-parallel pairs so each pair is crossing or parallel."""
    if cls.antiparallel:
        return h.inverse(), (PairClass.RParallel if cls is PairClass.RAntiParallel else PairClass.LParallel)
    return h, cls


def _tols(tol: float | None) -> tuple[float, float]:
    cfg = get_config()
    return (cfg.equality_tol if tol is None else tol), cfg.inequality_slack


# ---------------------------------------------------------------------------
# smoothing family
# ---------------------------------------------------------------------------

def check_smoothing(f: CurveFunctional, sample: PairSample, tol: float | None = None) -> list[AxiomReport]:
    """The four smoothing inequalities, each on the pairs of the matching shape."""
    tol, slack = _tols(tol)
    thr = -(tol + slack)
    names = ["oriented-disconnected", "oriented-connected", "unoriented-disconnected",
             "unoriented-connected"]
    tr = {n: _Tracker(f"smoothing:{n}", thr, tol) for n in names}
    for g, h0, cls0 in sample:
        h, cls = _oriented(g, h0, cls0)
        fa, fb, fab, faB = _val(f, g), _val(f, h), _val(f, g * h), _val(f, g * h.inverse())
        w = _pair_witness(g, h, cls, fa=fa, fb=fb, fab=fab, faB=faB)
        if cls.crossing:
            tr[names[0]].add(fa + fb - fab, w)
            tr[names[2]].add(fa + fb - max(fab, faB), w)
        else:
            tr[names[1]].add(fab - fa - fb, w)
            tr[names[3]].add(fab - max(faB, fa + fb), w)
    for t in tr.values():
        t.skipped = sample.rejected
    return [tr[n].report() for n in names]


def check_stability(f: CurveFunctional, sample: Sequence[GroupElement], N: int = 6,
                    tol: float | None = None) -> AxiomReport:
    tol, _ = _tols(tol)
    t = _Tracker("stability", -tol, tol)
    for g in sample:
        base = _val(f, g)
        for n in range(2, N + 1):
            fn = _val(f, g ** n)
            t.add(-abs(fn - n * base), {"g": g.pres.format(g.word), "n": n, "f_g": base, "f_gn": fn})
    return t.report({"N": N})


def check_power_smoothing(f: CurveFunctional, sample: Sequence[GroupElement],
                          tol: float | None = None, max_power: int = 5) -> AxiomReport:
    tol, slack = _tols(tol)
    t = _Tracker("power-smoothing", -(tol + slack), tol)
    for g in sample:
        vals = {k: _val(f, g ** k) for k in range(1, 2 * max_power + 1)}
        for n in range(1, max_power + 1):
            for m in range(1, max_power + 1):
                t.add(vals[n + m] - vals[n] - vals[m],
                      {"g": g.pres.format(g.word), "n": n, "m": m, "f_nm": vals[n + m],
                       "f_n": vals[n], "f_m": vals[m]})
    return t.report({"max_power": max_power})


def check_lamination(f: CurveFunctional, sample: PairSample, tol: float | None = None) -> AxiomReport:
    """f(a) + f(b) = max(f(ab), f(aB)) on crossing pairs."""
    tol, _ = _tols(tol)
    t = _Tracker("lamination", -tol, tol)
    for g, h, cls in sample:
        if not cls.crossing:
            continue
        fa, fb, fab, faB = _val(f, g), _val(f, h), _val(f, g * h), _val(f, g * h.inverse())
        t.add(-abs(fa + fb - max(fab, faB)), _pair_witness(g, h, cls, fa=fa, fb=fb, fab=fab, faB=faB))
    t.skipped = sample.rejected
    return t.report()


def trace_function(v: float) -> float:
    return 2.0 * math.cosh(v / 2.0)


def check_hyperbolic(f: CurveFunctional, sample: PairSample, tol: float | None = None) -> AxiomReport:
    """lambda(a) lambda(b) = lambda(ab) + lambda(aB) on crossing pairs, lambda = 2 cosh(f/2)."""
    tol, _ = _tols(tol)
    t = _Tracker("hyperbolic", -tol, tol)
    for g, h, cls in sample:
        if not cls.crossing:
            continue
        la, lb = trace_function(_val(f, g)), trace_function(_val(f, h))
        lab, laB = trace_function(_val(f, g * h)), trace_function(_val(f, g * h.inverse()))
        t.add(-abs(la * lb - lab - laB), _pair_witness(g, h, cls, la=la, lb=lb, lab=lab, laB=laB))
    t.skipped = sample.rejected
    return t.report()


def check_parry(f: CurveFunctional, sample: PairSample, tol: float | None = None) -> AxiomReport:
    """The largest of f(g)+f(h), f(gh), f(gH) is attained at least twice."""
    tol, _ = _tols(tol)
    t = _Tracker("parry", -tol, tol)
    for g, h, cls in sample:
        vals = sorted([_val(f, g) + _val(f, h), _val(f, g * h), _val(f, g * h.inverse())])
        t.add(-(vals[2] - vals[1]), _pair_witness(g, h, cls, top=vals[2], second=vals[1], third=vals[0]))
    t.skipped = sample.rejected
    return t.report()


def check_tree_dual(f: CurveFunctional, sample: PairSample, tol: float | None = None) -> AxiomReport:
    """Crossing: f(a)+f(b) = max(f(ab), f(aB)); parallel: f(ab) = max(f(a)+f(b), f(aB))."""
    tol, _ = _tols(tol)
    t = _Tracker("tree-dual", -tol, tol)
    for g, h0, cls0 in sample:
        h, cls = _oriented(g, h0, cls0)
        fa, fb, fab, faB = _val(f, g), _val(f, h), _val(f, g * h), _val(f, g * h.inverse())
        if cls.crossing:
            gap = fa + fb - max(fab, faB)
        else:
            gap = fab - max(fa + fb, faB)
        t.add(-abs(gap), _pair_witness(g, h, cls, fa=fa, fb=fb, fab=fab, faB=faB))
    t.skipped = sample.rejected
    return t.report()


def check_positivity(f: CurveFunctional, sample: Sequence[GroupElement], tol: float | None = None) -> AxiomReport:
    tol, _ = _tols(tol)
    t = _Tracker("positivity", -tol, tol)
    for g in sample:
        v = _val(f, g)
        t.add(v, {"g": g.pres.format(g.word), "f": v})
    return t.report()


def check_symmetry(f: CurveFunctional, sample: Sequence[GroupElement], tol: float | None = None) -> AxiomReport:
    tol, _ = _tols(tol)
    t = _Tracker("symmetry", -tol, tol)
    for g in sample:
        a, b = _val(f, g), _val(f, g.inverse())
        t.add(-abs(a - b), {"g": g.pres.format(g.word), "f_g": a, "f_G": b})
    return t.report()


# ---------------------------------------------------------------------------
# limits along powers
# ---------------------------------------------------------------------------

@dataclass
class LimitSequence:
    values: list[float]
    converged: bool
    spread: float

    def to_dict(self) -> dict:
        return {"values": self.values, "converged": self.converged, "spread": self.spread}


def additivity_limit_sequence(f: CurveFunctional, a: GroupElement, x: GroupElement, N: int = 20,
                              tol: float | None = None, window: int = 5) -> LimitSequence:
    """f(a x^n) - f(x^n) for n = 0..N, with a Cauchy verdict over the last ``window`` terms."""
    tol, _ = _tols(tol)
    cls = classify_pair(a, x)
    if cls is not PairClass.RCross:
        raise PreconditionError(f"axis of a must cross axis of x to the right, got {cls.value}")
    vals = [f(a * x ** n) - f(x ** n) for n in range(0, N + 1)]
    tail = vals[-window:]
    spread = max(tail) - min(tail)
    return LimitSequence(vals, spread <= tol, spread)


# ---------------------------------------------------------------------------
# suites by name
# ---------------------------------------------------------------------------

PAIR_SUITES = {"smoothing", "lamination", "hyperbolic", "parry", "tree-dual"}
CLASS_SUITES = {"stability", "power-smoothing", "positivity", "symmetry"}
ALL_SUITES = sorted(PAIR_SUITES | CLASS_SUITES)


def run_suites(f: CurveFunctional, pres: Presentation, suites: Iterable[str], *, seed: int = 0,
               tol: float | None = None, pair_radius: int | None = None, pair_cap: int | None = None,
               class_radius: int = 3, class_cap: int = 60, N: int = 6) -> list[AxiomReport]:
    suites = list(suites)
    unknown = [s for s in suites if s not in PAIR_SUITES | CLASS_SUITES]
    if unknown:
        raise PreconditionError(f"unknown suites: {', '.join(unknown)}")
    pairs = None
    classes = None
    out: list[AxiomReport] = []
    for name in suites:
        if name in PAIR_SUITES and pairs is None:
            pairs = sample_pairs(pres, pair_radius, pair_cap, seed)
        if name in CLASS_SUITES and classes is None:
            classes = sample_classes(pres, class_radius, class_cap, seed)
        if name == "smoothing":
            out.extend(check_smoothing(f, pairs, tol))
        elif name == "lamination":
            out.append(check_lamination(f, pairs, tol))
        elif name == "hyperbolic":
            out.append(check_hyperbolic(f, pairs, tol))
        elif name == "parry":
            out.append(check_parry(f, pairs, tol))
        elif name == "tree-dual":
            out.append(check_tree_dual(f, pairs, tol))
        elif name == "stability":
            out.append(check_stability(f, classes, N, tol))
        elif name == "power-smoothing":
            out.append(check_power_smoothing(f, classes, tol))
        elif name == "positivity":
            out.append(check_positivity(f, classes, tol))
        elif name == "symmetry":
            out.append(check_symmetry(f, classes, tol))
    return out
