"""Enumeration of the lifts of closed geodesics near the base point.

Long words are never applied to points.  A class is handled through the
cyclic rotations of its cyclically reduced word: the axis of each rotation
passes close to the base point, and one period of the original axis is the
union of translates of short pieces of these rotated axes.

Two services are built on this:

* :func:`lift_family` - a finite set of lifts of a class containing every lift
  that meets the base tile;
* :func:`crossing_count` - the number of distinct lifts of one class crossing
  one period of the axis of another, split into short pieces near the base
  point whose signed counts telescope.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import get_config
from .errors import AmbiguityError, NumericDegradationError, PreconditionError
from .hypgeom import BoundaryPoint, Isometry, axis, normalizer
from .sgroup import GroupElement, conjugacy_normal_form, primitive_root
from .tiling import BASE_POINT, Tiling, flat, mat_inv, mat_mul, tiling_for

DUPLICATE_TOL = 1e-9  # same lift reached through different tiles drifts by ~2e-10
AMBIGUOUS_TOL = 1e-8
BREAKPOINT_TOL = 1e-9
FAMILY_MARGIN = 0.1

# generic base points inside the octagon / Schottky domain, tried in turn
_BASE_CANDIDATES = (0.0731 + 1.0583j, -0.1127 + 0.9214j, 0.1613 + 0.8872j,
                    -0.0412 + 1.1934j, 0.2107 + 1.0311j)


def apply_homogeneous(mats: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply stacked flat matrices (k,4) to stacked vectors (n,2): result (k,n,2), unit length."""
    out = np.empty((mats.shape[0], v.shape[0], 2))
    out[..., 0] = mats[:, None, 0] * v[None, :, 0] + mats[:, None, 1] * v[None, :, 1]
    out[..., 1] = mats[:, None, 2] * v[None, :, 0] + mats[:, None, 3] * v[None, :, 1]
    out /= np.linalg.norm(out, axis=-1, keepdims=True)
    return out


def circle_coords(v: np.ndarray) -> np.ndarray:
    """(cos, sin) of the circle angle of homogeneous unit vectors, sign independent."""
    return np.stack([v[..., 0] ** 2 - v[..., 1] ** 2, -2.0 * v[..., 0] * v[..., 1]], axis=-1)


def vector_angles(v: np.ndarray) -> np.ndarray:
    c = circle_coords(v)
    return np.mod(np.arctan2(c[..., 1], c[..., 0]), 2.0 * math.pi)


def dedupe(neg: np.ndarray, pos: np.ndarray, check: bool = True,
           dup_tol: float = DUPLICATE_TOL, amb_tol: float = AMBIGUOUS_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Drop repeated oriented geodesics; raise if two distinct ones are unresolvably close."""
    if len(neg) == 0:
        return neg, pos
    keys = np.concatenate([circle_coords(neg), circle_coords(pos)], axis=1)
    labels, ambiguous = _kernels.cluster_keys(keys, dup_tol, max(dup_tol, amb_tol))
    if check and ambiguous:
        raise AmbiguityError(f"{ambiguous} pairs of distinct lifts are closer than {amb_tol:g}")
    keep = np.unique(labels)
    return neg[keep], pos[keep]


def _vec(p: BoundaryPoint) -> np.ndarray:
    return np.array([p.v1, p.v2])


# ---------------------------------------------------------------------------
# rotations of a cyclic word
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rotation:
    iso: Isometry
    normalizer: Isometry
    neg: np.ndarray
    pos: np.ndarray
    base_distance: float
    base_height: float  # log-height of the projection of the base point


def rotations(g: GroupElement) -> list[Rotation]:
    """Cyclic rotations of the (cyclically reduced) word of g with their axes."""
    word = g.word
    out = []
    for i in range(len(word)):
        rot = g.pres.evaluate(word[i:] + word[:i])
        ax = axis(rot)
        n = normalizer(ax.repelling, ax.attracting)
        w = n.apply(BASE_POINT)
        out.append(Rotation(rot, n, _vec(ax.repelling), _vec(ax.attracting),
                            math.asinh(abs(w.real) / w.imag), math.log(abs(w))))
    return out


# ---------------------------------------------------------------------------
# lift families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LiftFamily:
    """Lifts of the primitive root of a class; contains every lift meeting the base tile."""

    root: GroupElement
    multiplicity: int
    neg: np.ndarray
    pos: np.ndarray

    def __len__(self) -> int:
        return len(self.neg)


def _disk_arcs(tiling: Tiling) -> list[tuple[float, float]]:
    arcs = []
    for _, centre, radius, contains_inf in tiling.schottky_disks():
        a = BoundaryPoint.from_value(centre - radius).angle
        b = BoundaryPoint.from_value(centre + radius).angle
        arcs.append((b, a) if contains_inf else (a, b))
    return arcs


def _meets_domain_mask(tiling: Tiling, neg: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """Cheap necessary condition for a lift to meet the base tile."""
    tn, tp = vector_angles(neg), vector_angles(pos)
    if tiling.kind == "dirichlet":
        # in the disk model centred at the base point, cosh d = 1 / sin(gap / 2)
        half = np.abs(np.sin((tp - tn) / 2.0))
        d = np.arccosh(np.maximum(1.0 / np.maximum(half, 1e-300), 1.0))
        return d <= tiling.covering_radius + 1e-6
    mask = np.ones(len(neg), dtype=bool)
    for lo, hi in _disk_arcs(tiling):
        span = (hi - lo) % (2 * math.pi)
        inside_n = (tn - lo) % (2 * math.pi) < span
        inside_p = (tp - lo) % (2 * math.pi) < span
        mask &= ~(inside_n & inside_p)
    return mask


_family_lock = threading.Lock()
_family_cache: dict[tuple[str, tuple[int, ...]], LiftFamily] = {}


def lift_family(h: GroupElement) -> LiftFamily:
    nf = conjugacy_normal_form(h)
    if nf.is_identity:
        raise PreconditionError("the trivial class has no lifts")
    key = (nf.pres.mode, nf.word)
    with _family_lock:
        fam = _family_cache.get(key)
    if fam is not None:
        return fam
    fam = _build_family(nf)
    with _family_lock:
        _family_cache.setdefault(key, fam)
    return fam


def _build_family(nf: GroupElement) -> LiftFamily:
    # every lift meeting the base tile is t^-1 applied to a rotated axis, where t
    # is the tile of a point on the short piece of that axis near the base point
    root, mult = primitive_root(nf)
    tiling = tiling_for(nf.pres)
    negs, poss = [], []
    for rot, piece in zip(rotations(root), _pieces(root, BASE_POINT)):
        pts = piece.points(tiling.step, margin=FAMILY_MARGIN)
        tiles = tiling.closure(tiling.tiles_of(pts))
        mats = mat_inv(tiles)
        negs.append(apply_homogeneous(mats, rot.neg[None, :])[:, 0, :])
        poss.append(apply_homogeneous(mats, rot.pos[None, :])[:, 0, :])
    neg = np.concatenate(negs)
    pos = np.concatenate(poss)
    mask = _meets_domain_mask(tiling, neg, pos)
    neg, pos = dedupe(neg[mask], pos[mask], check=False)
    return LiftFamily(root, mult, neg, pos)


def clear_caches() -> None:
    with _family_lock:
        _family_cache.clear()


# ---------------------------------------------------------------------------
# segments and crossings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentPiece:
    """A piece [u0, u1) of log-height on the geodesic normalizer^-1(0 -> inf)."""

    normalizer: Isometry
    u0: float
    u1: float

    @property
    def sign(self) -> int:
        return 1 if self.u1 >= self.u0 else -1

    @property
    def lo(self) -> float:
        return min(self.u0, self.u1)

    @property
    def hi(self) -> float:
        return max(self.u0, self.u1)

    def points(self, step: float, margin: float = 0.0) -> np.ndarray:
        lo, hi = self.lo - margin, self.hi + margin
        count = max(2, int(math.ceil((hi - lo) / step)) + 1)
        us = np.linspace(lo, hi, count)
        n_inv = self.normalizer.inverse()
        w = 1j * np.exp(us)
        return (n_inv.a * w + n_inv.b) / (n_inv.c * w + n_inv.d)


def _pieces(word_el: GroupElement, base: complex) -> list[SegmentPiece]:
    out = []
    for i, rot in enumerate(rotations(word_el)):
        nxt = word_el.pres.letter_iso(word_el.word[i]).apply(base)
        out.append(SegmentPiece(rot.normalizer, math.log(abs(rot.normalizer.apply(base))),
                                math.log(abs(rot.normalizer.apply(nxt)))))
    return out


def segment_pieces(g: GroupElement, base: complex = _BASE_CANDIDATES[0]) -> list[SegmentPiece]:
    """Pieces near the base point whose signed union is one period of the axis of g."""
    nf = conjugacy_normal_form(g)
    if nf.is_identity:
        raise PreconditionError("the trivial class has no axis")
    return _pieces(nf, base)


class _NearBreakpoint(Exception):
    pass


def _candidates_near(fam: LiftFamily, pts: np.ndarray, frame: Isometry,
                     tiling: Tiling) -> tuple[np.ndarray, np.ndarray]:
    """Lifts of the family meeting tiles that touch the sampled points, in the given frame."""
    tiles = tiling.closure(tiling.tiles_of(pts))
    mats = mat_mul(flat(frame)[None, :], tiles)
    neg = apply_homogeneous(mats, fam.neg).reshape(-1, 2)
    pos = apply_homogeneous(mats, fam.pos).reshape(-1, 2)
    return neg, pos


def crossing_heights(neg: np.ndarray, pos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mask of lifts crossing the imaginary axis transversally, and their log crossing heights."""
    eps = 1e-12
    away = ((np.abs(neg[:, 0]) > eps) & (np.abs(neg[:, 1]) > eps)
            & (np.abs(pos[:, 0]) > eps) & (np.abs(pos[:, 1]) > eps))
    prod = neg[:, 0] * neg[:, 1] * pos[:, 0] * pos[:, 1]
    mask = away & (prod < 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        xn = neg[:, 0] / neg[:, 1]
        xp = pos[:, 0] / pos[:, 1]
        logh = 0.5 * np.log(np.where(mask, -xn * xp, 1.0))
    return mask, logh


def piece_crossings(fam: LiftFamily, piece: SegmentPiece, tiling: Tiling,
                    hand: int = 0) -> int:
    """Distinct lifts of the family crossing [u0, u1) of the piece (unsigned).

    ``hand=+1`` keeps only lifts crossing the piece's geodesic to the right
    (attracting end on the positive reals of the frame), ``hand=-1`` only
    those crossing to the left.
    """
    neg, pos = _candidates_near(fam, piece.points(tiling.step), piece.normalizer, tiling)
    mask, logh = crossing_heights(neg, pos)
    window = mask & (logh > piece.lo - 1e-6) & (logh < piece.hi + 1e-6)
    if hand:
        window &= hand * pos[:, 0] * pos[:, 1] > 0
    neg, pos, logh = neg[window], pos[window], logh[window]
    if len(neg) == 0:
        return 0
    keys = np.concatenate([circle_coords(neg), circle_coords(pos)], axis=1)
    labels, ambiguous = _kernels.cluster_keys(keys, DUPLICATE_TOL, AMBIGUOUS_TOL)
    if ambiguous:
        raise AmbiguityError("distinct lifts crossing a segment are unresolvably close")
    keep = np.unique(labels)
    logh = logh[keep]
    if np.any(np.abs(logh - piece.u0) < BREAKPOINT_TOL) or np.any(np.abs(logh - piece.u1) < BREAKPOINT_TOL):
        raise _NearBreakpoint
    return int(np.count_nonzero((logh >= piece.lo) & (logh < piece.hi)))


def lift_crossing_count(lifted: GroupElement, segment: GroupElement, hand: int = 0) -> int:
    """Distinct lifts of the primitive root of ``lifted`` crossing one period of ``segment``.

    The lift equal to the axis of the segment itself is never counted.
    """
    fam = lift_family(lifted)
    tiling = tiling_for(segment.pres)
    for base in _BASE_CANDIDATES:
        try:
            total = 0
            for piece in segment_pieces(segment, base):
                total += piece.sign * piece_crossings(fam, piece, tiling, hand)
            return total
        except _NearBreakpoint:
            continue
    raise NumericDegradationError("every base point put a crossing on a segment breakpoint")


def intersection_count(g: GroupElement, h: GroupElement) -> int:
    """Geometric intersection number of the classes of g and h (with multiplicity)."""
    lg = axis(g.iso).length
    lh = axis(h.iso).length
    # the shorter class is lifted: its distinct lifts stay well separated near the base point
    if lg < lh - 1e-12:
        lifted, segment = g, h
    else:
        lifted, segment = h, g
    fam = lift_family(lifted)
    return fam.multiplicity * lift_crossing_count(lifted, segment)


# ---------------------------------------------------------------------------
# lifts inside a box of geodesics
# ---------------------------------------------------------------------------

def _ccw_gap_mid(a: float, b: float) -> float:
    return (a + ((b - a) % (2 * math.pi)) / 2.0) % (2 * math.pi)


def _in_half_open(theta: np.ndarray, start: float, end: float, eps: float,
                  closed_end: bool = False) -> np.ndarray:
    """Membership in [start, end), or in (start, end] when ``closed_end``; ties within eps go to the closed side."""
    two_pi = 2 * math.pi
    span = (end - start) % two_pi
    off = (theta - start) % two_pi
    near_start = np.minimum(off, two_pi - off) < eps
    d_end = (theta - end) % two_pi
    near_end = np.minimum(d_end, two_pi - d_end) < eps
    if closed_end:
        return (near_end | (off < span)) & ~near_start
    return (near_start | (off < span)) & ~near_end


def box_lift_count(fam: LiftFamily, corners: tuple[float, float, float, float],
                   oriented: bool = True, closed_end: bool = False) -> int:
    """Distinct lifts with (repelling, attracting) in [s1, s2) x [t2, t1).

    ``corners`` are circle angles (s1, s2, t2, t1) in counterclockwise order.
    With ``oriented=False`` reversed lifts are counted as well; ``closed_end``
    switches both intervals to (s1, s2] x (t2, t1].
    """
    s1, s2, t2, t1 = corners
    tiling = tiling_for(fam.root.pres)
    m1 = BoundaryPoint.from_angle(_ccw_gap_mid(s2, t2))
    m2 = BoundaryPoint.from_angle(_ccw_gap_mid(t1, s1))
    frame = normalizer(m2, m1)
    heights = []
    for p in (s1, s2):
        for q in (t2, t1):
            vp = _vec(frame.apply_boundary(BoundaryPoint.from_angle(p)))
            vq = _vec(frame.apply_boundary(BoundaryPoint.from_angle(q)))
            xp, xq = vp[0] / vp[1], vq[0] / vq[1]
            heights.append(0.5 * math.log(-xp * xq))
    piece = SegmentPiece(frame, min(heights) - 0.05, max(heights) + 0.05)
    neg, pos = _candidates_near(fam, piece.points(tiling.step), frame, tiling)
    inv = frame.inverse()
    back = flat(inv)[None, :]
    neg = apply_homogeneous(back, neg)[0]
    pos = apply_homogeneous(back, pos)[0]
    neg, pos = dedupe(neg, pos)
    tn, tp = vector_angles(neg), vector_angles(pos)
    eps = get_config().eps_bdy
    ce = closed_end
    count = int(np.count_nonzero(_in_half_open(tn, s1, s2, eps, ce) & _in_half_open(tp, t2, t1, eps, ce)))
    if not oriented:
        count += int(np.count_nonzero(_in_half_open(tp, s1, s2, eps, ce) & _in_half_open(tn, t2, t1, eps, ce)))
    return count

