"""Right-handed lift systems, their boxes and the box-mass estimator of a functional.

A system (p1, q1, p2, q2) over a simple base class x produces four elements
a = p1 q1, b = p1 q2, c = p2 q1, d = p2 q2 and the box of oriented geodesics
[l1-, l2-) x [r2+, r1+) with l_i = p_i^-1 . axis(x) and r_j = q_j . axis(x).
The mass a functional assigns to the box is the limit of

    s_n = (f(b x^n) + f(c x^n) - f(a x^n) - f(d x^n)) / 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import PairClass, classify_angles, classify_pair, cyclic_order
from .config import get_config, using
from .curves import GeodesicBox
from .errors import (AmbiguityError, CommonPowerError, DegeneratePairError, GeoCurrentsError,
                     NotHyperbolicError, PreconditionError, RHConditionError, SearchExhaustedError)
from .functionals import CurveFunctional
from .hypgeom import TWO_PI, BoundaryPoint, axis, circle_distance
from .lifts import apply_homogeneous, vector_angles
from .sgroup import GroupElement, Presentation
from .tiling import flat, mat_mul

DEFAULT_NMAX = 40
DEFAULT_TOL = 1e-6
PLATEAU = 3
RECOVERY_EPS_BDY = 1e-13


def _oriented_axis(g: GroupElement, x: GroupElement) -> tuple[BoundaryPoint, BoundaryPoint]:
    """(repelling, attracting) of g . axis(x)."""
    ax = axis(x.iso)
    return g.iso.apply_boundary(ax.repelling), g.iso.apply_boundary(ax.attracting)


def _is_power_of(g: GroupElement, x: GroupElement) -> bool:
    if g.is_identity or g.iso.close_to(g.pres.identity.iso, 1e-9):
        return True
    try:
        ag, ax = axis(g.iso), axis(x.iso)
    except NotHyperbolicError:
        return False
    eps = 1e-9
    same = (circle_distance(ag.repelling.angle, ax.repelling.angle) < eps
            and circle_distance(ag.attracting.angle, ax.attracting.angle) < eps)
    flipped = (circle_distance(ag.repelling.angle, ax.attracting.angle) < eps
               and circle_distance(ag.attracting.angle, ax.repelling.angle) < eps)
    return same or flipped


@dataclass(frozen=True)
class RHLiftSystem:
    x: GroupElement
    p1: GroupElement
    q1: GroupElement
    p2: GroupElement
    q2: GroupElement
    window: tuple[int, int]
    box: GeodesicBox
    kind: int

    @property
    def a(self) -> GroupElement:
        return self.p1 * self.q1

    @property
    def b(self) -> GroupElement:
        return self.p1 * self.q2

    @property
    def c(self) -> GroupElement:
        return self.p2 * self.q1

    @property
    def d(self) -> GroupElement:
        return self.p2 * self.q2

    def words(self) -> dict[str, str]:
        fmt = self.x.pres.format
        return {"x": fmt(self.x.word), "p1": fmt(self.p1.word), "q1": fmt(self.q1.word),
                "p2": fmt(self.p2.word), "q2": fmt(self.q2.word)}

    def translated(self, g: GroupElement) -> "RHLiftSystem":
        G = g.inverse()
        return validate_rh_system(self.x, self.p1 * G, g * self.q1, self.p2 * G, g * self.q2)

    def lifts(self) -> dict[str, tuple[BoundaryPoint, BoundaryPoint]]:
        return {"l1": _oriented_axis(self.p1.inverse(), self.x),
                "l2": _oriented_axis(self.p2.inverse(), self.x),
                "r1": _oriented_axis(self.q1, self.x),
                "r2": _oriented_axis(self.q2, self.x)}


def _box_kind(lifts: dict) -> int:
    """1 plus the number of nested (parallel) pairs among the l- and r-lifts."""
    kind = 1
    for u, v in (("l1", "l2"), ("r1", "r2")):
        (un, up), (vn, vp) = lifts[u], lifts[v]
        if classify_angles(un.angle, up.angle, vn.angle, vp.angle).parallel:
            kind += 1
    return kind


def validate_rh_system(x: GroupElement, p1: GroupElement, q1: GroupElement, p2: GroupElement,
                       q2: GroupElement, window: tuple[int, int] | None = None) -> RHLiftSystem:
    """Check the right-handed conditions and build the box; raise naming the failed condition."""
    pres = x.pres
    p1, q1, p2, q2 = (pres.element(w) for w in (p1, q1, p2, q2))
    if window is None:
        cfg = get_config()
        window = (cfg.crossing_window_start, cfg.crossing_window_start + cfg.crossing_window_width)
    if _is_power_of(p1 * p2.inverse(), x) or _is_power_of(q1.inverse() * q2, x):
        raise RHConditionError("p1 P2 or Q1 q2 is a power of x", "nontrivial")
    try:
        for p in (p1, p2):
            for q in (q1, q2):
                cls = classify_pair(p * q, x)
                if cls is not PairClass.RCross:
                    raise RHConditionError(f"axis of p q is {cls.value} against x", "edges")
        for n in range(*window):
            xn = x ** n
            cls = classify_pair(q2 * xn * p1, q1 * xn * p2)
            if cls is not PairClass.RCross:
                raise RHConditionError(f"diagonals are {cls.value} at n={n}", "diagonals")
        lifts = {"l1": _oriented_axis(p1.inverse(), x), "l2": _oriented_axis(p2.inverse(), x),
                 "r1": _oriented_axis(q1, x), "r2": _oriented_axis(q2, x)}
        corners = (lifts["l1"][0], lifts["l2"][0], lifts["r2"][1], lifts["r1"][1])
        if not cyclic_order(*corners):
            raise RHConditionError("box corners are not counterclockwise", "corners")
        kind = _box_kind(lifts)
    except (CommonPowerError, DegeneratePairError, AmbiguityError, NotHyperbolicError) as exc:
        raise RHConditionError(f"degenerate configuration: {exc}", "degenerate") from exc
    return RHLiftSystem(x, p1, q1, p2, q2, tuple(window), GeodesicBox(*corners), kind)


# ---------------------------------------------------------------------------
# searching for systems
# ---------------------------------------------------------------------------

@dataclass
class _WordTree:
    """All freely reduced words up to a length, as matrices with parent pointers."""

    pres: Presentation
    mats: np.ndarray
    parent: np.ndarray
    letter: np.ndarray
    length: np.ndarray

    def word(self, i: int) -> tuple[int, ...]:
        out = []
        while self.parent[i] >= 0:
            out.append(int(self.letter[i]))
            i = int(self.parent[i])
        return tuple(reversed(out))

    def element(self, i: int) -> GroupElement:
        return self.pres.element(self.word(i))


def word_tree(pres: Presentation, L: int) -> _WordTree:
    letters = np.array(pres.alphabet)
    gens = np.array([flat(pres.letter_iso(s)) for s in letters])
    mats = [np.array([[1.0, 0.0, 0.0, 1.0]])]
    parent = [np.array([-1])]
    letter = [np.array([0])]
    length = [np.array([0])]
    offset = 0
    for k in range(1, L + 1):
        prev_m, prev_l = mats[-1], letter[-1]
        rows, cols = np.meshgrid(np.arange(len(prev_m)), np.arange(len(letters)), indexing="ij")
        rows, cols = rows.ravel(), cols.ravel()
        keep = prev_l[rows] != -letters[cols]
        rows, cols = rows[keep], cols[keep]
        mats.append(mat_mul(prev_m[rows], gens[cols]))
        parent.append(rows + offset)
        letter.append(letters[cols])
        length.append(np.full(len(rows), k))
        offset += len(prev_m)
    return _WordTree(pres, np.concatenate(mats), np.concatenate(parent),
                     np.concatenate(letter), np.concatenate(length))


def _translate_angles(tree: _WordTree, x: GroupElement) -> tuple[np.ndarray, np.ndarray]:
    ax = axis(x.iso)
    neg = apply_homogeneous(tree.mats, np.array([[ax.repelling.v1, ax.repelling.v2]]))[:, 0]
    pos = apply_homogeneous(tree.mats, np.array([[ax.attracting.v1, ax.attracting.v2]]))[:, 0]
    return vector_angles(neg), vector_angles(pos)


def _near(theta: np.ndarray, target: float, eps: float) -> np.ndarray:
    return np.abs((theta - target + math.pi) % TWO_PI - math.pi) < eps


def _candidates(tree, tn, tp, target: float, eps: float, backwards: bool, limit: int) -> list[int]:
    """Indices of translates with both ends near the target, ordered by word length.

    ``backwards`` asks for the attracting end to come first counterclockwise.
    """
    ok = _near(tn, target, eps) & _near(tp, target, eps)
    gap = (tn - tp) % TWO_PI if backwards else (tp - tn) % TWO_PI
    ok &= gap < math.pi
    idx = np.nonzero(ok)[0]
    idx = idx[np.argsort(tree.length[idx], kind="stable")]
    return [int(i) for i in idx[:limit]]


def _check_targets(angles: list[float], eps: float) -> None:
    if not cyclic_order(*angles):
        raise PreconditionError("targets must be in counterclockwise order")
    for i in range(len(angles)):
        gap = (angles[(i + 1) % len(angles)] - angles[i]) % TWO_PI
        if gap <= 2 * eps:
            raise PreconditionError("target neighbourhoods overlap")


def _as_angle(t) -> float:
    if isinstance(t, BoundaryPoint):
        return t.angle
    return float(t) % TWO_PI


def find_rh_box(x: GroupElement, targets, eps: float, L_max: int | None = None,
                per_target: int = 6) -> RHLiftSystem:
    """Search translates of axis(x) near four ccw targets for a type-1 right-handed system."""
    systems = find_lift_chain(x, targets, eps, L_max, per_target)
    return systems[0]


def find_lift_chain(x: GroupElement, targets, eps: float, L_max: int | None = None,
                    per_target: int = 6) -> list[RHLiftSystem]:
    """Systems sharing p1, p2 whose r-lifts sit near targets[2:], abutting side by side.

    With four targets this is one system; with k > 4 targets it returns the
    k - 3 boxes [l1-, l2-) x [r_{j+1}+, r_j+), listed from the last target backwards.
    """
    angles = [_as_angle(t) for t in targets]
    if len(angles) < 4:
        raise PreconditionError("at least four targets are needed")
    _check_targets(angles, eps)
    if L_max is None:
        L_max = 6 if x.pres.mode == "genus2" else 8
    last_error: Exception | None = None
    for L in range(2, L_max + 1):
        tree = word_tree(x.pres, L)
        tn, tp = _translate_angles(tree, x)
        ls = [_candidates(tree, tn, tp, t, eps, True, per_target) for t in angles[:2]]
        rs = [_candidates(tree, tn, tp, t, eps, False, per_target) for t in angles[2:]]
        if not all(ls) or not all(rs):
            continue
        for i1 in ls[0]:
            for i2 in ls[1]:
                p1, p2 = tree.element(i1).inverse(), tree.element(i2).inverse()
                chain = _complete_chain(x, p1, p2, [[tree.element(j) for j in r] for r in rs])
                if isinstance(chain, Exception):
                    last_error = chain
                    continue
                return chain
    raise SearchExhaustedError(f"no right-handed system within word length {L_max}"
                               + (f" (last rejection: {last_error})" if last_error else ""))


def _complete_chain(x, p1, p2, r_options):
    """Pick one q per r-target (ccw order) so that consecutive pairs form valid systems.

    Returns the systems from the outermost box inwards, or the last rejection.
    """
    error: Exception = SearchExhaustedError("no compatible lift")

    def extend(k: int, q_outer: GroupElement, acc: list):
        nonlocal error
        if k < 0:
            return acc
        for q in r_options[k]:
            try:
                sys = validate_rh_system(x, p1, q_outer, p2, q)
            except GeoCurrentsError as exc:
                error = exc
                continue
            found = extend(k - 1, q, acc + [sys])
            if found is not None:
                return found
        return None

    last = len(r_options) - 1
    for q_top in r_options[last]:
        found = extend(last - 1, q_top, [])
        if found is not None:
            return found
    return error


# ---------------------------------------------------------------------------
# the estimator
# ---------------------------------------------------------------------------

@dataclass
class MeasureEstimate:
    value: float
    n_used: int
    last_delta: float
    converged: bool
    tail: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"value": self.value, "n_used": self.n_used, "last_delta": self.last_delta,
                "converged": self.converged, "tail": self.tail}


def estimator_term(f: CurveFunctional, sys: RHLiftSystem, n: int) -> float:
    xn = sys.x ** n
    return 0.5 * (f(sys.b * xn) + f(sys.c * xn) - f(sys.a * xn) - f(sys.d * xn))


def plateau_limit(terms, nmax: int, tol: float, start: int = 1) -> MeasureEstimate:
    seq: list[float] = []
    streak = 0
    for n in range(start, nmax + 1):
        seq.append(float(terms(n)))
        if len(seq) >= 2 and abs(seq[-1] - seq[-2]) <= tol:
            streak += 1
        else:
            streak = 0
        if streak >= PLATEAU:
            return MeasureEstimate(seq[-1], n, abs(seq[-1] - seq[-2]), True, seq[-5:])
    delta = abs(seq[-1] - seq[-2]) if len(seq) >= 2 else math.inf
    return MeasureEstimate(seq[-1], nmax, delta, False, seq[-5:])


def box_measure_estimate(f: CurveFunctional, sys: RHLiftSystem, Nmax: int = DEFAULT_NMAX,
                         tol: float = DEFAULT_TOL) -> MeasureEstimate:
    return plateau_limit(lambda n: estimator_term(f, sys, n), Nmax, tol)


def invariance_check(f: CurveFunctional, sys: RHLiftSystem, g: GroupElement,
                     Nmax: int = DEFAULT_NMAX, tol: float = DEFAULT_TOL) -> float:
    """Largest change of the estimate under translation by g and under the reparametrisations."""
    base = box_measure_estimate(f, sys, Nmax, tol).value
    x = sys.x
    X = x.inverse()
    variants = [sys.translated(g),
                validate_rh_system(x, x * sys.p1, sys.q1, x * sys.p2, sys.q2, sys.window),
                validate_rh_system(x, sys.p1, sys.q1 * X, sys.p2, sys.q2 * X, sys.window)]
    return max(abs(box_measure_estimate(f, v, Nmax, tol).value - base) for v in variants)


def join_side_by_side(sys1: RHLiftSystem, sys2: RHLiftSystem) -> RHLiftSystem:
    """The system of the union box of two abutting systems."""
    same = lambda u, v: u.same_element(v)
    if same(sys1.p1, sys2.p1) and same(sys1.p2, sys2.p2):
        if same(sys1.q2, sys2.q1):
            return validate_rh_system(sys1.x, sys1.p1, sys1.q1, sys1.p2, sys2.q2, sys1.window)
        if same(sys2.q2, sys1.q1):
            return validate_rh_system(sys1.x, sys1.p1, sys2.q1, sys1.p2, sys1.q2, sys1.window)
    if same(sys1.q1, sys2.q1) and same(sys1.q2, sys2.q2):
        if same(sys1.p2, sys2.p1):
            return validate_rh_system(sys1.x, sys1.p1, sys1.q1, sys2.p2, sys1.q2, sys1.window)
        if same(sys2.p2, sys1.p1):
            return validate_rh_system(sys1.x, sys2.p1, sys1.q1, sys1.p2, sys1.q2, sys1.window)
    raise PreconditionError("the two boxes do not share three defining lifts")


def sidebyside_check(f: CurveFunctional, sys1: RHLiftSystem, sys2: RHLiftSystem,
                     Nmax: int = DEFAULT_NMAX, tol: float = DEFAULT_TOL) -> float:
    union = join_side_by_side(sys1, sys2)
    parts = [box_measure_estimate(f, s, Nmax, tol).value for s in (union, sys1, sys2)]
    return abs(parts[0] - parts[1] - parts[2])


# ---------------------------------------------------------------------------
# length recovery
# ---------------------------------------------------------------------------

@dataclass
class Recovery:
    value: float
    converged: bool
    outer: list[float]
    p: str
    q: str

    def to_dict(self) -> dict:
        return {"value": self.value, "converged": self.converged, "outer": self.outer,
                "p": self.p, "q": self.q}


def find_recovery_conjugators(x: GroupElement, y: GroupElement,
                              L_max: int = 4) -> tuple[GroupElement, GroupElement]:
    """p, q with (p^-1 . axis(x), axis(y)) and (axis(y), q . axis(x)) both R-parallel."""
    from .sgroup import ball_list

    ps, qs = [], []
    pres = x.pres
    for g in ball_list(L_max, pres):
        conj = g * x * g.inverse()
        try:
            if classify_pair(conj, y) is PairClass.RParallel:
                ps.append(g)
            if classify_pair(y, conj) is PairClass.RParallel:
                qs.append(g)
        except GeoCurrentsError:
            continue
    if not ps or not qs:
        raise SearchExhaustedError("no R-parallel translates of x around y")
    return ps[0].inverse(), qs[0]


def recovery_system(x, y, p, q, n: int, window=None) -> RHLiftSystem:
    """The n-th box of the family with a = p y^n q, b = p y^-(n+1) q, c = p y^(n+1) q, d = p y^-n q.

    The lifts are placed symmetrically (l-lifts fixed, r-lifts at y^n and
    y^-(n+1)) so that corner separations shrink like exp(-n l(y)) only.
    """
    # boundary angles of y^k-translates carry absolute (not relative) rounding error,
    # so the corner tests can use a much finer tolerance than the global one
    with using(eps_bdy=RECOVERY_EPS_BDY):
        return validate_rh_system(x, p, y ** n * q, p * y, y ** (-(n + 1)) * q, window)


def recover_length(f: CurveFunctional, y: GroupElement, Nmax: int = DEFAULT_NMAX,
                   tol: float = DEFAULT_TOL, x: GroupElement | None = None,
                   outer_max: int = 12) -> Recovery:
    """Recover f([y]) from box masses of the nested family around the axis of y."""
    pres = y.pres
    if x is None:
        x = pres.element((1,))
    p, q = find_recovery_conjugators(x, y)
    outer: list[float] = []
    failures = 0
    for n in range(1, outer_max + 1):
        try:
            sys = recovery_system(x, y, p, q, n)
        except RHConditionError:
            # once the corners degenerate they stay degenerate
            failures += 1
            if outer and failures >= 2:
                break
            continue
        outer.append(box_measure_estimate(f, sys, Nmax, tol).value)
        if len(outer) > PLATEAU and all(abs(outer[-k] - outer[-k - 1]) <= tol for k in range(1, PLATEAU + 1)):
            break
    if not outer:
        raise SearchExhaustedError("no valid box in the recovery family")
    converged = len(outer) >= 2 and abs(outer[-1] - outer[-2]) <= tol
    return Recovery(outer[-1], converged, outer, pres.format(p.word), pres.format(q.word))


# ---------------------------------------------------------------------------
# Liouville masses
# ---------------------------------------------------------------------------

def _chord(t1: float, t2: float) -> float:
    return 2.0 * abs(math.sin((t1 - t2) / 2.0))


def liouville_box_measure(box: GeodesicBox) -> float:
    """Liouville mass of [s1, s2) x [t2, t1): the log of a boundary cross-ratio."""
    x, y, z, w = box.angles
    for i, u in enumerate((x, y, z, w)):
        for v in (x, y, z, w)[i + 1:]:
            if circle_distance(u, v) < get_config().eps_bdy:
                raise PreconditionError("box corners must be distinct")
    ratio = (_chord(x, z) * _chord(y, w)) / (_chord(x, w) * _chord(y, z))
    return abs(math.log(ratio))


def bonahon_residual(box: GeodesicBox) -> float:
    return math.exp(-liouville_box_measure(box)) + math.exp(-liouville_box_measure(box.complement())) - 1.0
