"""Weighted multicurves, their intersection numbers and box counts."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .boundary import cyclic_order
from .errors import (NonConvergenceError, ParseError, PreconditionError)
from .hypgeom import BoundaryPoint, axis, normalizer
from .lifts import (apply_homogeneous, box_lift_count, crossing_heights, dedupe,
                    lift_crossing_count, lift_family)
from .sgroup import (GroupElement, Presentation, ball_list, conjugacy_normal_form,
                     primitive_root)
from .tiling import flat

BALL_DUP_TOL = 1e-7
# generic point, so that no crossing of the standard generators sits on a segment end
SEGMENT_BASE = 0.0731 + 1.0583j


@dataclass(frozen=True)
class MultiCurve:
    """Finite weighted union of conjugacy classes, stored by normal form."""

    pres: Presentation
    components: tuple[tuple[GroupElement, float], ...]

    @classmethod
    def build(cls, pres: Presentation, items: Iterable[tuple[GroupElement | str, float]]) -> "MultiCurve":
        merged: dict[tuple[int, ...], list] = {}
        for word, weight in items:
            weight = float(weight)
            if weight < 0 or not math.isfinite(weight):
                raise PreconditionError(f"weights must be finite and nonnegative, got {weight}")
            nf = conjugacy_normal_form(pres.element(word))
            if nf.is_identity or weight == 0.0:
                continue
            entry = merged.setdefault(nf.word, [nf, 0.0])
            entry[1] += weight
        comps = tuple((g, w) for g, w in sorted(merged.values(), key=lambda e: (len(e[0].word), e[0].word)))
        return cls(pres, comps)

    @classmethod
    def single(cls, g: GroupElement | str, weight: float = 1.0,
               pres: Presentation | None = None) -> "MultiCurve":
        if pres is None:
            if not isinstance(g, GroupElement):
                raise PreconditionError("a presentation is needed to parse a word")
            pres = g.pres
        return cls.build(pres, [(g, weight)])

    @classmethod
    def from_json(cls, pres: Presentation, data: str | list) -> "MultiCurve":
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, list):
            raise ParseError("a multicurve is a JSON list of {word, weight} records")
        try:
            return cls.build(pres, [(d["word"], d.get("weight", 1.0)) for d in data])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed multicurve record: {exc}") from exc

    def to_json(self) -> list[dict]:
        return [{"word": self.pres.format(g.word), "weight": w} for g, w in self.components]

    def reversed(self) -> "MultiCurve":
        return MultiCurve.build(self.pres, [(g.inverse(), w) for g, w in self.components])

    def union(self, other: "MultiCurve") -> "MultiCurve":
        return MultiCurve.build(self.pres, list(self.components) + list(other.components))

    def scaled(self, factor: float) -> "MultiCurve":
        return MultiCurve.build(self.pres, [(g, w * factor) for g, w in self.components])

    def __iter__(self):
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)


def as_multicurve(x, pres: Presentation | None = None) -> MultiCurve:
    if isinstance(x, MultiCurve):
        return x
    if isinstance(x, GroupElement):
        return MultiCurve.single(x)
    if pres is None:
        raise PreconditionError("a presentation is needed to interpret this curve")
    return MultiCurve.single(pres.element(x), pres=pres)


class GeodesicBox:
    """The set of oriented geodesics with repelling end in [s1, s2) and attracting end in [t2, t1)."""

    __slots__ = ("s1", "s2", "t2", "t1")

    def __init__(self, s1: BoundaryPoint, s2: BoundaryPoint, t2: BoundaryPoint, t1: BoundaryPoint):
        pts = [_as_point(p) for p in (s1, s2, t2, t1)]
        if not cyclic_order(*pts):
            raise PreconditionError("box corners must be in counterclockwise order s1, s2, t2, t1")
        self.s1, self.s2, self.t2, self.t1 = pts

    @classmethod
    def from_values(cls, *values: float) -> "GeodesicBox":
        return cls(*(BoundaryPoint.from_value(v) for v in values))

    @classmethod
    def from_angles(cls, *angles: float) -> "GeodesicBox":
        return cls(*(BoundaryPoint.from_angle(t) for t in angles))

    @property
    def corners(self) -> tuple[BoundaryPoint, BoundaryPoint, BoundaryPoint, BoundaryPoint]:
        return self.s1, self.s2, self.t2, self.t1

    @property
    def angles(self) -> tuple[float, float, float, float]:
        return tuple(p.angle for p in self.corners)

    def complement(self) -> "GeodesicBox":
        """The box [s2, t2) x [t1, s1) formed by the other pairing of the corners."""
        return GeodesicBox(self.s2, self.t2, self.t1, self.s1)

    def __repr__(self) -> str:
        return "GeodesicBox(" + ", ".join(f"{p.value:.6g}" for p in self.corners) + ")"


def _as_point(p) -> BoundaryPoint:
    if isinstance(p, BoundaryPoint):
        return p
    return BoundaryPoint.from_value(float(p))


# ---------------------------------------------------------------------------
# intersection numbers
# ---------------------------------------------------------------------------

def _pair_count(g: GroupElement, h: GroupElement) -> int:
    from .lifts import intersection_count

    return intersection_count(g, h)


def intersection_number(C, D) -> float:
    """Geometric intersection number, bilinear in the weights."""
    C = as_multicurve(C)
    D = as_multicurve(D, C.pres)
    total = 0.0
    for g, wg in C:
        for h, wh in D:
            total += wg * wh * _pair_count(g, h)
    return total


def self_intersection(g: GroupElement) -> int:
    """Transverse self-crossings of the closed geodesic of g, each unordered pair of lifts once."""
    nf = conjugacy_normal_form(g)
    if nf.is_identity:
        return 0
    return _pair_count(nf, nf) // 2


def _exponent_vector(g: GroupElement) -> np.ndarray:
    v = np.zeros(g.pres.rank)
    for s in g.word:
        v[abs(s) - 1] += 1 if s > 0 else -1
    return v


def _symplectic(pres: Presentation) -> np.ndarray:
    n = pres.rank
    J = np.zeros((n, n))
    for k in range(0, n - 1, 2):
        J[k, k + 1] = 1.0
        J[k + 1, k] = -1.0
    return J


def homology_class(C) -> np.ndarray:
    C = as_multicurve(C)
    out = np.zeros(C.pres.rank)
    for g, w in C:
        out += w * _exponent_vector(g)
    return out


def algebraic_intersection(C, D) -> float:
    """Symplectic pairing of homology classes in the basis of generators."""
    C = as_multicurve(C)
    D = as_multicurve(D, C.pres)
    return float(homology_class(C) @ _symplectic(C.pres) @ homology_class(D))


def right_handed_count(g: GroupElement, h: GroupElement) -> int:
    """Pairs of lifts (l of g, l' of h), up to the group action, where l crosses l' to the right."""
    lg = axis(g.iso).length
    lh = axis(h.iso).length
    if lh < lg - 1e-12:
        # lifts of h crossing a period of g, with the handedness seen from h
        _, m = primitive_root(h)
        return m * lift_crossing_count(h, g, hand=-1)
    _, m = primitive_root(g)
    return m * lift_crossing_count(g, h, hand=+1)


def right_handed_intersection(C, D) -> float:
    """Direct count of right-handed crossings, bilinear in the weights."""
    C = as_multicurve(C)
    D = as_multicurve(D, C.pres)
    return sum(wg * wh * right_handed_count(g, h) for g, wg in C for h, wh in D)


def asymmetric_intersection(C, D) -> float:
    return 0.5 * intersection_number(C, D) + 0.5 * algebraic_intersection(C, D)


# ---------------------------------------------------------------------------
# box counts
# ---------------------------------------------------------------------------

def box_count(C, box: GeodesicBox, oriented: bool = True, closed_end: bool = False) -> float:
    """Weighted number of lifts of C with (repelling, attracting) in the box.

    With ``oriented=False`` each lift is counted once for each orientation
    lying in the box, which is the mass of the flip-symmetric current.
    """
    C = as_multicurve(C)
    total = 0.0
    for g, w in C:
        fam = lift_family(g)
        total += w * fam.multiplicity * box_lift_count(fam, box.angles, oriented=oriented, closed_end=closed_end)
    return total


def unoriented_box_count(C, box: GeodesicBox) -> float:
    return box_count(C, box, oriented=False)


# ---------------------------------------------------------------------------
# word-ball enumeration, kept as an independent cross-check
# ---------------------------------------------------------------------------

def ball_crossings(g: GroupElement, h: GroupElement, L: int, base: complex = SEGMENT_BASE) -> int:
    """Distinct translates w.axis(h), w in ball(L), crossing the segment [p, g.p) of axis(g).

    The identical lift is excluded and the count is multiplied by the power
    of h over its primitive root.
    """
    pres = g.pres
    ax_g = axis(g.iso)
    n = normalizer(ax_g.repelling, ax_g.attracting)
    u0 = math.log(abs(n.apply(base)))
    u1 = u0 + ax_g.length
    ax_h = axis(h.iso)
    mats = np.array([flat(n @ w.iso) for w in ball_list(L, pres)])
    neg = apply_homogeneous(mats, np.array([[ax_h.repelling.v1, ax_h.repelling.v2]]))[:, 0]
    pos = apply_homogeneous(mats, np.array([[ax_h.attracting.v1, ax_h.attracting.v2]]))[:, 0]
    mask, logh = crossing_heights(neg, pos)
    mask &= (logh >= u0) & (logh < u1)
    # long words lose digits, so translates are merged on a coarse 1e-7 grid
    neg, pos = dedupe(neg[mask], pos[mask], dup_tol=BALL_DUP_TOL, amb_tol=BALL_DUP_TOL)
    _, m = primitive_root(h)
    return m * len(neg)


def ball_intersection(g: GroupElement, h: GroupElement, L_max: int = 6, plateau: int = 3) -> int:
    """Plateau of :func:`ball_crossings` over increasing radii."""
    history = []
    for L in range(1, L_max + 1):
        history.append(ball_crossings(g, h, L))
        if len(history) >= plateau and len(set(history[-plateau:])) == 1:
            return history[-1]
    raise NonConvergenceError("ball count did not settle", history)


def parse_curve_file(path: str, pres: Presentation) -> MultiCurve:
    with open(path, encoding="utf-8") as fh:
        return MultiCurve.from_json(pres, fh.read())


def curve_from_words(pres: Presentation, words: Sequence[str], weights: Sequence[float] | None = None) -> MultiCurve:
    weights = [1.0] * len(words) if weights is None else list(weights)
    return MultiCurve.build(pres, zip(words, weights))


__all__ = [
    "MultiCurve", "GeodesicBox", "as_multicurve", "intersection_number", "self_intersection",
    "algebraic_intersection", "asymmetric_intersection", "right_handed_count",
    "right_handed_intersection", "homology_class", "box_count", "unoriented_box_count",
    "ball_crossings", "ball_intersection", "parse_curve_file", "curve_from_words",
]
