"""Cyclic order on the boundary circle and classification of axis pairs.

Every predicate works on circle angles.  Near-coincident angles raise an
:class:`AmbiguityError` instead of producing a guess.
"""
from __future__ import annotations

import enum

from .config import get_config
from .errors import (AmbiguityError, BoundExceededError, CommonPowerError,
                     DegeneratePairError, PreconditionError)
from .hypgeom import TWO_PI, BoundaryPoint, Isometry, circle_distance, fixed_points


class PairClass(enum.Enum):
    RCross = "RCross"
    LCross = "LCross"
    RParallel = "RParallel"
    LParallel = "LParallel"
    RAntiParallel = "RAntiParallel"
    LAntiParallel = "LAntiParallel"

    @property
    def crossing(self) -> bool:
        return self in (PairClass.RCross, PairClass.LCross)

    @property
    def parallel(self) -> bool:
        return self in (PairClass.RParallel, PairClass.LParallel)

    @property
    def antiparallel(self) -> bool:
        return self in (PairClass.RAntiParallel, PairClass.LAntiParallel)

    def swapped(self) -> "PairClass":
        return _SWAP[self]


_SWAP = {
    PairClass.RCross: PairClass.LCross, PairClass.LCross: PairClass.RCross,
    PairClass.RParallel: PairClass.LParallel, PairClass.LParallel: PairClass.RParallel,
    PairClass.RAntiParallel: PairClass.RAntiParallel,
    PairClass.LAntiParallel: PairClass.LAntiParallel,
}


class SplitState(enum.Enum):
    ASided = "ASided"
    Splitting = "Splitting"
    BSided = "BSided"



def as_isometry(g) -> Isometry:
    """Accept an Isometry or anything carrying one in ``.iso``."""
    return g if isinstance(g, Isometry) else g.iso


def _angle(p) -> float:
    return p.angle if isinstance(p, BoundaryPoint) else float(p) % TWO_PI


def _check_distinct(angles: list[float], labels: list[str]) -> None:
    eps = get_config().eps_bdy
    for i in range(len(angles)):
        for j in range(i + 1, len(angles)):
            if circle_distance(angles[i], angles[j]) < eps:
                raise AmbiguityError(
                    f"boundary points {labels[i]} and {labels[j]} are within {eps:g}",
                    (labels[i], labels[j]))


def ccw(x, y, z) -> bool:
    """True iff y lies on the counterclockwise arc from x to z."""
    tx, ty, tz = _angle(x), _angle(y), _angle(z)
    _check_distinct([tx, ty, tz], ["x", "y", "z"])
    return (ty - tx) % TWO_PI < (tz - tx) % TWO_PI


def cyclic_order(*points) -> bool:
    """True iff the points appear in this counterclockwise cyclic order."""
    ts = [_angle(p) for p in points]
    _check_distinct(ts, [f"p{i}" for i in range(len(ts))])
    offs = [(t - ts[0]) % TWO_PI for t in ts]
    return all(offs[i] < offs[i + 1] for i in range(len(offs) - 1))


def endpoint_angles(g) -> tuple[float, float]:
    """(repelling, attracting) angles of a hyperbolic element."""
    att, rep = fixed_points(as_isometry(g))
    return rep.angle, att.angle


_ORDERS = {
    ("a-", "b+", "b-"): PairClass.RAntiParallel,
    ("a-", "b-", "b+"): PairClass.RParallel,
    ("b+", "a-", "b-"): PairClass.RCross,
    ("b-", "a-", "b+"): PairClass.LCross,
    ("b+", "b-", "a-"): PairClass.LParallel,
    ("b-", "b+", "a-"): PairClass.LAntiParallel,
}


def classify_angles(a_neg: float, a_pos: float, b_neg: float, b_pos: float) -> PairClass:
    """Classify two oriented geodesics given by endpoint angles."""
    eps = get_config().eps_bdy
    same = circle_distance(a_pos, b_pos) < eps and circle_distance(a_neg, b_neg) < eps
    flipped = circle_distance(a_pos, b_neg) < eps and circle_distance(a_neg, b_pos) < eps
    if same or flipped:
        raise CommonPowerError("the two axes coincide")
    pts = {"a-": a_neg, "b+": b_pos, "b-": b_neg}
    for (l1, t1) in list(pts.items()) + [("a+", a_pos)]:
        for (l2, t2) in pts.items():
            if l1 != l2 and circle_distance(t1, t2) < eps:
                raise DegeneratePairError(f"axes share the endpoint {l1}~{l2}")
    order = tuple(sorted(pts, key=lambda k: (pts[k] - a_pos) % TWO_PI))
    return _ORDERS[order]


def classify_pair(g, h) -> PairClass:
    """Chirality class of the axes of two hyperbolic elements."""
    return classify_angles(*endpoint_angles(g), *endpoint_angles(h))


def axes_cross(g, h) -> bool:
    return classify_pair(g, h).crossing


def _arc_nested(u: float, p: float, q: float, v: float) -> bool:
    """Both p and q lie strictly inside the ccw arc (u, v)."""
    return ccw(u, p, v) and ccw(u, q, v)


def _split_right(a, b) -> SplitState:
    am, ap = endpoint_angles(a)
    bm, bp = endpoint_angles(b)
    ai, bi = as_isometry(a), as_isometry(b)
    abm, abp = endpoint_angles(ai @ bi.inverse())
    bam, bap = endpoint_angles(bi.inverse() @ ai)
    if _arc_nested(bp, abm, abp, ap) and _arc_nested(am, bam, bap, bm):
        return SplitState.Splitting
    if _arc_nested(bm, abm, abp, bp) and _arc_nested(bm, bam, bap, bp):
        return SplitState.BSided
    if _arc_nested(ap, abm, abp, am) and _arc_nested(ap, bam, bap, am):
        return SplitState.ASided
    raise AmbiguityError("no split state matched; endpoints too close to separate")


def split_state(a, b) -> SplitState:
    """Position of the axis of aB relative to a parallel pair (a, b)."""
    cls = classify_pair(a, b)
    if cls is PairClass.RParallel:
        return _split_right(a, b)
    if cls is PairClass.LParallel:
        st = _split_right(b, a)
        return {SplitState.ASided: SplitState.BSided,
                SplitState.BSided: SplitState.ASided}.get(st, st)
    raise PreconditionError(f"split state needs a parallel pair, got {cls.value}")


def find_splitting_exponent(a, b, smax: int = 30) -> int:
    """Least s with (a^s, b^s) splitting, confirmed at s+1 and s+2."""
    cls = classify_pair(a, b)
    if not cls.parallel:
        raise PreconditionError(f"pair is {cls.value}, not parallel")
    ai, bi = as_isometry(a), as_isometry(b)
    states: dict[int, SplitState] = {}

    def state(s: int) -> SplitState:
        if s not in states:
            states[s] = split_state(ai ** s, bi ** s)
        return states[s]

    for s in range(1, smax + 1):
        if all(state(t) is SplitState.Splitting for t in (s, s + 1, s + 2)):
            return s
    raise BoundExceededError(f"no splitting exponent up to {smax}")


def crossing_closure_check(a, b, x, n: int, k: int) -> bool:
    """Both (a x^n, x) and (a x^n b x^k, x) right-cross, given a, b right-cross x."""
    if classify_pair(a, x) is not PairClass.RCross or classify_pair(b, x) is not PairClass.RCross:
        raise PreconditionError("a and b must both right-cross x")
    ai, bi, xi = as_isometry(a), as_isometry(b), as_isometry(x)
    axn = ai @ xi ** n
    first = classify_pair(axn, xi) is PairClass.RCross
    second = classify_pair(axn @ bi @ xi ** k, xi) is PairClass.RCross
    return first and second
