"""Matrix-level hyperbolic geometry in the upper half-plane.

Isometries are unit-determinant real 2x2 matrices up to sign.  Boundary
points are stored as homogeneous unit vectors together with their circle
angle under the Cayley transform, so that an isometry can act on them
without ever forming a huge real number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import get_config
from .errors import NotHyperbolicError, NumericDegradationError, PreconditionError

TWO_PI = 2.0 * math.pi
_RESCALE_LIMIT = 1e4


def _canonical_sign(a: float, b: float, c: float, d: float) -> tuple[float, float, float, float]:
    for v in (a, b, c, d):
        if v != 0.0:
            if v < 0.0:
                return -a, -b, -c, -d
            break
    return a, b, c, d


def _normalize(a: float, b: float, c: float, d: float, eps_det: float | None = None,
               strict: bool = True) -> tuple[float, float, float, float]:
    eps = get_config().eps_det if eps_det is None else eps_det
    ad, bc = a * d, b * c
    det = ad - bc
    # rounding in det grows with the squared entry size, not with |ad|+|bc|
    norm2 = a * a + b * b + c * c + d * d
    if strict and abs(det - 1.0) > eps * max(1.0, norm2):
        raise NumericDegradationError(f"determinant drift: det = {det!r}")
    if strict and norm2 > _RESCALE_LIMIT:
        # det is pure rounding noise at this size; the product is already unimodular
        return _canonical_sign(a, b, c, d)
    if det <= 0.0:
        raise NumericDegradationError(f"non-positive determinant {det!r}")
    s = math.sqrt(det)
    return _canonical_sign(a / s, b / s, c / s, d / s)


@dataclass(frozen=True)
class Isometry:
    """Orientation-preserving isometry z -> (az+b)/(cz+d) with ad-bc = 1."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        a, b, c, d = _normalize(float(self.a), float(self.b), float(self.c), float(self.d))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def scaled(cls, a: float, b: float, c: float, d: float) -> "Isometry":
        """Build from any matrix with positive determinant by rescaling."""
        a, b, c, d = _normalize(a, b, c, d, strict=False)
        return cls(a, b, c, d)

    @classmethod
    def from_array(cls, m) -> "Isometry":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return compose(self, other)

    def __pow__(self, n: int) -> "Isometry":
        if n < 0:
            return self.inverse() ** (-n)
        result, base = IDENTITY, self
        while n:
            if n & 1:
                result = compose(result, base)
            n >>= 1
            if n:
                base = compose(base, base)
        return result

    def apply(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_boundary(self, p: "BoundaryPoint") -> "BoundaryPoint":
        return BoundaryPoint.from_homogeneous(self.a * p.v1 + self.b * p.v2,
                                              self.c * p.v1 + self.d * p.v2)

    def is_hyperbolic(self, eps_hyp: float | None = None) -> bool:
        eps = get_config().eps_hyp if eps_hyp is None else eps_hyp
        return abs(self.trace) > 2.0 + eps

    def close_to(self, other: "Isometry", tol: float = 1e-9) -> bool:
        scale = max(1.0, *(abs(v) for v in (self.a, self.b, self.c, self.d)))
        diff = max(abs(self.a - other.a), abs(self.b - other.b),
                   abs(self.c - other.c), abs(self.d - other.d))
        if diff <= tol * scale:
            return True
        # canonical sign can flip when a leading entry is ~0
        diff = max(abs(self.a + other.a), abs(self.b + other.b),
                   abs(self.c + other.c), abs(self.d + other.d))
        return diff <= tol * scale

    def __repr__(self) -> str:
        return f"Isometry([[{self.a:.6g}, {self.b:.6g}], [{self.c:.6g}, {self.d:.6g}]])"


IDENTITY = Isometry(1.0, 0.0, 0.0, 1.0)


def diag(lam: float) -> Isometry:
    return Isometry(lam, 0.0, 0.0, 1.0 / lam)


def rotation(theta: float) -> Isometry:
    """Counterclockwise rotation by ``theta`` about the point i."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return Isometry(c, s, -s, c)


def compose(m1: Isometry, m2: Isometry) -> Isometry:
    return Isometry(m1.a * m2.a + m1.b * m2.c, m1.a * m2.b + m1.b * m2.d,
                    m1.c * m2.a + m1.d * m2.c, m1.c * m2.b + m1.d * m2.d)


def circle_distance(t1: float, t2: float) -> float:
    """Shortest angular separation on the circle."""
    d = (t1 - t2) % TWO_PI
    return min(d, TWO_PI - d)


class BoundaryPoint:
    """A point of R u {inf} stored as a homogeneous unit vector (v1, v2), v2 >= 0.

    The circle angle is 2*atan2(-v2, v1) mod 2pi, so inf sits at angle 0 and
    increasing real values run counterclockwise.
    """

    __slots__ = ("v1", "v2", "angle")

    def __init__(self, v1: float, v2: float):
        n = math.hypot(v1, v2)
        if n == 0.0 or not math.isfinite(n):
            raise NumericDegradationError("degenerate homogeneous boundary vector")
        v1, v2 = v1 / n, v2 / n
        if v2 < 0.0 or (v2 == 0.0 and v1 < 0.0):
            v1, v2 = -v1, -v2
        self.v1 = v1
        self.v2 = v2
        self.angle = (2.0 * math.atan2(-v2, v1)) % TWO_PI

    @classmethod
    def from_homogeneous(cls, v1: float, v2: float) -> "BoundaryPoint":
        return cls(v1, v2)

    @classmethod
    def from_value(cls, x: float) -> "BoundaryPoint":
        if math.isinf(x):
            return cls(1.0, 0.0)
        return cls(x, 1.0)

    @classmethod
    def from_angle(cls, theta: float) -> "BoundaryPoint":
        return cls(math.cos(theta / 2.0), -math.sin(theta / 2.0))

    @property
    def value(self) -> float:
        return math.inf if self.v2 == 0.0 else self.v1 / self.v2

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoundaryPoint):
            return NotImplemented
        return circle_distance(self.angle, other.angle) < get_config().eps_bdy

    __hash__ = None  # tolerance equality is not transitive

    def __repr__(self) -> str:
        return f"BoundaryPoint({self.value:.9g})"


INFINITY = BoundaryPoint(1.0, 0.0)


@dataclass(frozen=True)
class Axis:
    repelling: BoundaryPoint
    attracting: BoundaryPoint
    length: float


def _require_hyperbolic(m: Isometry) -> None:
    if not m.is_hyperbolic():
        raise NotHyperbolicError(f"|tr| = {abs(m.trace):.12g} is not > 2 + eps_hyp")


def fixed_points(m: Isometry) -> tuple[BoundaryPoint, BoundaryPoint]:
    """Return (attracting, repelling) fixed points of a hyperbolic isometry."""
    _require_hyperbolic(m)
    t = m.trace
    root = math.sqrt(t * t - 4.0)
    big = (t + math.copysign(root, t)) / 2.0
    small = 1.0 / big

    def eigvec(lam: float) -> BoundaryPoint:
        u = (m.b, lam - m.a)
        w = (lam - m.d, m.c)
        if math.hypot(*u) >= math.hypot(*w):
            return BoundaryPoint(*u)
        return BoundaryPoint(*w)

    return eigvec(big), eigvec(small)


def translation_length(m: Isometry) -> float:
    _require_hyperbolic(m)
    return 2.0 * math.acosh(abs(m.trace) / 2.0)


def axis(m: Isometry) -> Axis:
    att, rep = fixed_points(m)
    return Axis(rep, att, translation_length(m))


def parallelogram_residual(g: Isometry, h: Isometry) -> float:
    """2cosh(l(g)/2)cosh(l(h)/2) - cosh(l(gh)/2) - cosh(l(gh^-1)/2) for crossing axes."""
    from .boundary import axes_cross

    if not axes_cross(g, h):
        raise PreconditionError("axes of g and h do not cross")
    lam = [abs(m.trace) / 2.0 for m in (g, h, g @ h, g @ h.inverse())]
    return 2.0 * lam[0] * lam[1] - lam[2] - lam[3]


# --- points and geodesics inside the plane -----------------------------------

def distance(z: complex, w: complex) -> float:
    return 2.0 * math.asinh(abs(z - w) / (2.0 * math.sqrt(z.imag * w.imag)))


def normalizer(neg: BoundaryPoint, pos: BoundaryPoint) -> Isometry:
    """An isometry sending ``neg`` to 0 and ``pos`` to inf."""
    det = pos.v1 * neg.v2 - neg.v1 * pos.v2
    if abs(det) < 1e-15:
        raise PreconditionError("geodesic endpoints coincide")
    w1, w2 = (neg.v1, neg.v2) if det > 0 else (-neg.v1, -neg.v2)
    return Isometry.scaled(w2, -w1, -pos.v2, pos.v1)


def distance_to_geodesic(z: complex, neg: BoundaryPoint, pos: BoundaryPoint) -> float:
    w = normalizer(neg, pos).apply(z)
    return math.asinh(abs(w.real) / w.imag)


def project_to_geodesic(z: complex, neg: BoundaryPoint, pos: BoundaryPoint) -> complex:
    """Nearest point on the geodesic, returned in the original coordinates."""
    n = normalizer(neg, pos)
    w = n.apply(z)
    return n.inverse().apply(complex(0.0, abs(w)))
