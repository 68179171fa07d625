"""Generalized cross-ratios on ccw boundary 4-tuples and the period functionals they induce."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .axioms import AxiomReport, _Tracker
from .boundary import cyclic_order
from .config import get_config
from .curves import GeodesicBox, as_multicurve, box_count
from .errors import AmbiguityError, AxiomViolationError, GeoCurrentsError, PreconditionError
from .functionals import CurveFunctional
from .hypgeom import BoundaryPoint, axis, circle_distance, normalizer
from .sgroup import (GroupElement, Presentation, ball_list, conjugacy_normal_form, get_presentation,
                     primitive_root)

TWO_PI = 2.0 * math.pi
Tuple4 = tuple[BoundaryPoint, BoundaryPoint, BoundaryPoint, BoundaryPoint]


@dataclass
class GeneralizedCrossRatio:
    """``evaluator(a, b, c, d)`` is called on counterclockwise distinct boundary points."""

    name: str
    evaluator: Callable[[BoundaryPoint, BoundaryPoint, BoundaryPoint, BoundaryPoint], float]

    def __call__(self, a, b, c, d) -> float:
        pts = tuple(_point(p) for p in (a, b, c, d))
        if not cyclic_order(*pts):
            raise PreconditionError("cross-ratio arguments must be in counterclockwise order")
        return float(self.evaluator(*pts))


def _point(p) -> BoundaryPoint:
    return p if isinstance(p, BoundaryPoint) else BoundaryPoint.from_value(float(p))


def _chord(t1: float, t2: float) -> float:
    return 2.0 * abs(math.sin((t1 - t2) / 2.0))


def _log_ratio(a: BoundaryPoint, b: BoundaryPoint, c: BoundaryPoint, d: BoundaryPoint) -> float:
    # log of (|d-b||a-c|)/(|d-c||a-b|) measured by chords; positive on ccw tuples
    ta, tb, tc, td = a.angle, b.angle, c.angle, d.angle
    return math.log((_chord(td, tb) * _chord(ta, tc)) / (_chord(td, tc) * _chord(ta, tb)))


def hyperbolic_crossratio() -> GeneralizedCrossRatio:
    """The Liouville mass of the box [d, a) x [b, c)."""
    return GeneralizedCrossRatio("hyperbolic", lambda a, b, c, d: abs(_log_ratio(a, b, c, d)))


def signed_crossratio() -> GeneralizedCrossRatio:
    """Log cross-ratio with the reciprocal pairing and no absolute value; negative everywhere."""
    return GeneralizedCrossRatio("signed", lambda a, b, c, d: -_log_ratio(a, b, c, d))


def zero_crossratio() -> GeneralizedCrossRatio:
    return GeneralizedCrossRatio("zero", lambda a, b, c, d: 0.0)


def multicurve_crossratio(C, sign: str = "+", pres: Presentation | None = None) -> GeneralizedCrossRatio:
    """Unoriented lift count of C in [d, a) x [b, c) for ``+`` or (d, a] x (b, c] for ``-``."""
    if sign not in ("+", "-"):
        raise PreconditionError(f"sign must be '+' or '-', got {sign!r}")
    C = as_multicurve(C, pres)
    closed = sign == "-"

    def evaluate(a, b, c, d) -> float:
        return box_count(C, GeodesicBox(d, a, b, c), oriented=False, closed_end=closed)

    return GeneralizedCrossRatio(f"multicurve{sign}", evaluate)


# ---------------------------------------------------------------------------
# periods
# ---------------------------------------------------------------------------

def _transversal(n_inv, length: float, frac: float) -> BoundaryPoint:
    # in the frame where the axis is 0 -> inf, put x at exp(-l/2) (scaled by frac) so that
    # x and g.x sit symmetrically between the two fixed points
    return n_inv.apply_boundary(BoundaryPoint.from_value(math.exp(frac - 0.5 - length / 2.0)))


def period(cr: GeneralizedCrossRatio, g: GroupElement, tol: float = 1e-9,
           fractions: Sequence[float] = (0.5, 0.37)) -> float:
    """[g-, x, g x, g+] with x on the ccw arc from g- to g+; x-independence is checked.

    The period only depends on the conjugacy class, so it is evaluated at the
    cyclically reduced representative, whose axis endpoints are well separated.
    """
    g = conjugacy_normal_form(g)
    if g.is_identity:
        return 0.0
    # powers share the axis of their root; stepping by the root keeps the endpoints accurate
    root, m = primitive_root(g)
    ax = axis(root.iso)
    rep, att = ax.repelling, ax.attracting
    n_inv = normalizer(rep, att).inverse()
    vals = []
    for frac in fractions:
        x = _transversal(n_inv, m * ax.length, frac)
        gx = x
        for _ in range(m):
            gx = root.iso.apply_boundary(gx)
        vals.append(cr(rep, x, gx, att))
    spread = max(vals) - min(vals)
    if spread > tol * max(1.0, abs(vals[0])):
        raise AxiomViolationError(f"period of {g} depends on the transversal point (spread {spread:.3g})")
    return vals[0]


def period_functional(cr: GeneralizedCrossRatio, tol: float = 1e-9) -> CurveFunctional:
    return CurveFunctional(f"period({cr.name})", lambda g: period(cr, g, tol), symmetric=True,
                           claims_smoothing=True)


# ---------------------------------------------------------------------------
# axiom checks
# ---------------------------------------------------------------------------

def sample_tuples(count: int, seed: int = 0, k: int = 4, min_gap: float = 1e-3) -> list[list[BoundaryPoint]]:
    """Seeded ccw k-tuples of boundary points with pairwise gaps at least ``min_gap``."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        ts = sorted(rng.uniform(0.0, TWO_PI) for _ in range(k))
        gaps = [ts[i + 1] - ts[i] for i in range(k - 1)] + [ts[0] + TWO_PI - ts[-1]]
        if min(gaps) < min_gap:
            continue
        start = rng.randrange(k)
        ts = ts[start:] + ts[:start]
        out.append([BoundaryPoint.from_angle(t) for t in ts])
    return out


def _fmt(pts) -> list[float]:
    return [round(p.angle, 12) for p in pts]


def check_crossratio_axioms(cr: GeneralizedCrossRatio, samples: int | Sequence = 200,
                            tol: float = 1e-9, pres: Presentation | str = "genus2",
                            seed: int = 0, radius: int = 2) -> list[AxiomReport]:
    """Flip, additivity, invariance and positivity residuals on sampled ccw tuples.

    ``samples`` is a count or an explicit list of ccw 5-tuples; the middle
    point of each 5-tuple is the interleaved point for additivity and is
    dropped for the other three checks.
    """
    if isinstance(pres, str):
        pres = get_presentation(pres)
    five = sample_tuples(samples, seed, k=5) if isinstance(samples, int) else [list(map(_point, s)) for s in samples]
    flip = _Tracker("crossratio:flip", -tol, tol)
    add = _Tracker("crossratio:additivity", -tol, tol)
    inv = _Tracker("crossratio:invariance", -tol, tol)
    pos = _Tracker("crossratio:positivity", -tol, tol)
    rng = random.Random(seed + 1)
    group = [g for g in ball_list(radius, pres) if not g.is_identity]
    skipped = 0
    for a, b, c, d, e in five:
        quad = (a, b, d, e)
        try:
            v = cr(*quad)
            w = {"tuple": _fmt(quad), "value": v}
            flip.add(-abs(v - cr(d, e, a, b)), w)
            split = cr(a, b, c, e) + cr(a, c, d, e)
            add.add(-abs(v - split), {"tuple": _fmt((a, b, c, d, e)), "lhs": v, "rhs": split})
            g = rng.choice(group)
            moved = tuple(g.iso.apply_boundary(p) for p in quad)
            vg = cr(*moved)
            inv.add(-abs(v - vg), {"tuple": _fmt(quad), "g": pres.format(g.word), "value": v, "moved": vg})
            pos.add(v, w)
        except (AmbiguityError, PreconditionError):
            skipped += 1
        except GeoCurrentsError as exc:
            for t in (flip, add, inv, pos):
                t.add(math.nan, {"tuple": _fmt(quad), "error": str(exc)})
    reports = []
    for t in (flip, add, inv, pos):
        t.skipped = skipped
        reports.append(t.report({"crossratio": cr.name}))
    return reports


def endpoint_conventions_differ(C, tuples: Sequence, pres: Presentation | None = None) -> list[dict]:
    """Tuples on which the + and - conventions disagree, i.e. a lift ends on a corner."""
    plus, minus = multicurve_crossratio(C, "+", pres), multicurve_crossratio(C, "-", pres)
    out = []
    for quad in tuples:
        vp, vm = plus(*quad), minus(*quad)
        if vp != vm:
            out.append({"tuple": _fmt(map(_point, quad)), "plus": vp, "minus": vm})
    return out


def registered_crossratios() -> dict[str, GeneralizedCrossRatio]:
    return {"hyperbolic": hyperbolic_crossratio(), "zero": zero_crossratio()}


__all__ = [
    "GeneralizedCrossRatio", "hyperbolic_crossratio", "signed_crossratio", "zero_crossratio",
    "multicurve_crossratio", "period", "period_functional", "check_crossratio_axioms",
    "sample_tuples", "endpoint_conventions_differ", "registered_crossratios",
]
