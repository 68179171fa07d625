"""Fundamental domains and the tilings they generate.

``genus2`` uses the Dirichlet octagon centred at i; ``free2`` uses the
complement of the four ping-pong disks.  The main service is
:meth:`Tiling.reduce`, which writes a point z as t.z' with z' in the base
tile, and the neighbour set used to close tile collections.
"""
from __future__ import annotations

import functools
import math

import numpy as np

from . import _kernels
from .errors import NumericDegradationError, PreconditionError
from .hypgeom import Isometry, distance, rotation
from .sgroup import GroupElement, Presentation, ball, get_presentation

BASE_POINT = 1j
MAX_REDUCTION_STEPS = 400


def flat(m: Isometry) -> np.ndarray:
    return np.array([m.a, m.b, m.c, m.d])


def mat_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise product of stacked flat 2x2 matrices (broadcasting)."""
    return np.stack([p[..., 0] * q[..., 0] + p[..., 1] * q[..., 2],
                     p[..., 0] * q[..., 1] + p[..., 1] * q[..., 3],
                     p[..., 2] * q[..., 0] + p[..., 3] * q[..., 2],
                     p[..., 2] * q[..., 1] + p[..., 3] * q[..., 3]], axis=-1)


def mat_inv(p: np.ndarray) -> np.ndarray:
    return np.stack([p[..., 3], -p[..., 1], -p[..., 2], p[..., 0]], axis=-1)


def mat_apply(p: np.ndarray, z: np.ndarray) -> np.ndarray:
    return (p[..., 0] * z + p[..., 1]) / (p[..., 2] * z + p[..., 3])


def point_keys(z: np.ndarray) -> np.ndarray:
    """Coordinates (x/y, log y) in which Euclidean separation tracks hyperbolic distance."""
    return np.stack([z.real / z.imag, np.log(z.imag)], axis=-1)


def unique_tiles(mats: np.ndarray) -> np.ndarray:
    if len(mats) == 0:
        return mats.reshape(0, 4)
    centres = mat_apply(mats, np.full(len(mats), BASE_POINT))
    labels, _ = _kernels.cluster_keys(point_keys(centres), 1e-6, 1e-6)
    keep = np.unique(labels)
    return mats[keep]


class Tiling:
    def __init__(self, pres: Presentation):
        self.pres = pres
        letters = pres.alphabet
        self.letters = letters
        self.fwd = np.array([flat(pres.letter_iso(s)) for s in letters])
        self.inv = np.array([flat(pres.letter_iso(-s)) for s in letters])
        if pres.mode == "genus2":
            self.coef = self._dirichlet_coefficients()
            self.covering_radius = math.acosh(3.0 + 2.0 * math.sqrt(2.0))
            self.kind = "dirichlet"
        else:
            self.coef = self._schottky_coefficients()
            self.covering_radius = math.inf
            self.kind = "schottky"
        self.generator_displacement = max(distance(BASE_POINT, pres.letter_iso(s).apply(BASE_POINT))
                                          for s in letters)
        self.neighbours, self.neighbour_lengths = self._neighbours()
        self.step = self._step()

    # -- domain description --
    def _dirichlet_coefficients(self) -> np.ndarray:
        rows = []
        for s in self.letters:
            w = self.pres.letter_iso(s).apply(BASE_POINT)
            u, v = w.real, w.imag
            rows.append((1.0 / v - 1.0, -2.0 * u / v, (u * u + v * v) / v - 1.0))
        return np.array(rows)

    def schottky_disks(self) -> list[tuple[int, complex, float, bool]]:
        """(letter, centre, radius, contains_infinity) of the disk D_s for each letter.

        Points of D_s are moved by s^-1; the four disks are pairwise disjoint and
        s maps the outside of D_{s^-1} into D_s.
        """
        # real endpoints of each disk on the boundary line
        arcs = {1: (3.0, -3.0), -1: (-1.0 / 3.0, 1.0 / 3.0), 2: (-2.0, -0.5), -2: (0.5, 2.0)}
        out = []
        for s in self.letters:
            lo, hi = arcs[s]
            centre = (lo + hi) / 2.0
            out.append((s, centre, abs(hi - lo) / 2.0, lo > hi))
        return out

    def _schottky_coefficients(self) -> np.ndarray:
        rows = []
        for _, centre, radius, outside in self.schottky_disks():
            row = (1.0, -2.0 * centre, centre * centre - radius * radius)
            rows.append(tuple(-v for v in row) if outside else row)
        return np.array(rows)

    def check_ping_pong(self, samples: int = 64) -> float:
        """Worst violation of s(outside D_{s^-1}) <= D_s over boundary samples of D_{s^-1}."""
        worst = -math.inf
        disks = {s: (c, r, out) for s, c, r, out in self.schottky_disks()}
        for k, s in enumerate(self.letters):
            c, r, contains_inf = disks[-s]
            m = self.pres.letter_iso(s)
            factor = 0.999 if contains_inf else 1.001
            for j in range(samples):
                theta = math.pi * (j + 0.5) / samples
                w = m.apply(c + r * factor * complex(math.cos(theta), math.sin(theta)))
                val = self.coef[k, 0] * abs(w) ** 2 + self.coef[k, 1] * w.real + self.coef[k, 2]
                worst = max(worst, val)
        return worst

    # -- reduction --
    def reduce(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Return (z', t) with z = t.z' and z' in the base tile."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(z.imag <= 0):
            raise PreconditionError("points must lie in the upper half-plane")
        xr, xi, t, steps = _kernels.reduce_points(z.real.copy(), z.imag.copy(), self.coef,
                                                  self.inv, self.fwd, MAX_REDUCTION_STEPS)
        if np.any(steps > MAX_REDUCTION_STEPS):
            raise NumericDegradationError("point reduction did not terminate")
        return xr + 1j * xi, t

    def in_base_tile(self, z: complex, slack: float = 1e-9) -> bool:
        r2 = abs(z) ** 2
        vals = self.coef[:, 0] * r2 + self.coef[:, 1] * z.real + self.coef[:, 2]
        return bool(np.all(vals >= -slack))

    def tiles_of(self, points: np.ndarray) -> np.ndarray:
        _, t = self.reduce(points)
        return unique_tiles(t)

    def closure(self, tiles: np.ndarray) -> np.ndarray:
        """All tiles touching one of the given tiles."""
        prods = mat_mul(tiles[:, None, :], self.neighbours[None, :, :]).reshape(-1, 4)
        return unique_tiles(prods)

    # -- neighbours --
    def _neighbours(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "schottky":
            els = [self.pres.identity] + [self.pres.element((s,)) for s in self.letters]
        else:
            els = self._octagon_neighbours()
        return (np.array([flat(g.iso) for g in els]),
                np.array([len(g.word) for g in els], dtype=np.int64))

    def octagon_vertices(self) -> list[complex]:
        rc = self.covering_radius
        v0 = rotation(math.pi / 8.0).apply(BASE_POINT * math.exp(rc))
        return [rotation(k * math.pi / 4.0).apply(v0) for k in range(8)]

    def _octagon_neighbours(self) -> list[GroupElement]:
        verts = self.octagon_vertices()
        out = []
        for g in ball(4, self.pres):
            if g.is_identity:
                out.append(g)
                continue
            if any(distance(g.iso.apply(v), w) < 1e-7 for v in verts for w in verts):
                out.append(g)
        return out

    def _step(self) -> float:
        if self.kind == "dirichlet":
            return 0.05
        disks = [d[1:] for d in self.schottky_disks()]
        gaps = [_circle_gap(disks[i], disks[j])
                for i in range(len(disks)) for j in range(i + 1, len(disks))]
        return min(0.05, min(gaps) / 4.0)


def _circle_gap(c1: tuple, c2: tuple) -> float:
    """Hyperbolic distance between two disjoint geodesics given as (centre, radius, ...)."""
    from .hypgeom import BoundaryPoint, normalizer

    ends = []
    for centre, radius in (c1[:2], c2[:2]):
        ends.append((BoundaryPoint.from_value(centre - radius), BoundaryPoint.from_value(centre + radius)))
    n = normalizer(*ends[0])
    p, q = (n.apply_boundary(e).value for e in ends[1])
    p, q = sorted((abs(p), abs(q)))
    return math.acosh((q + p) / (q - p))


@functools.lru_cache(maxsize=None)
def get_tiling(mode: str) -> Tiling:
    return Tiling(get_presentation(mode))


def tiling_for(pres: Presentation) -> Tiling:
    return get_tiling(pres.mode)


# ---------------------------------------------------------------------------
# walls of the octagon tiling
# ---------------------------------------------------------------------------

def _walls_on_path(tiling: Tiling, pts: np.ndarray) -> int:
    """Walls separating the tiles of the first and last sample, counted along the path."""
    tiles = tiling.reduce(pts)[1]
    total = 0
    nb = tiling.neighbours
    for j in range(len(tiles) - 1):
        rel = mat_mul(mat_inv(tiles[j]), tiles[j + 1])
        diffs = np.max(np.abs(nb - rel[None, :]), axis=1)
        diffs = np.minimum(diffs, np.max(np.abs(nb + rel[None, :]), axis=1))
        k = int(np.argmin(diffs))
        if diffs[k] > 1e-6 * max(1.0, float(np.max(np.abs(rel)))):
            raise NumericDegradationError("sampling step too coarse for the tiling")
        total += int(tiling.neighbour_lengths[k])
    return total


def wall_crossings(g: GroupElement, offset: float = 1e-7) -> int:
    """Number of tiling walls crossed by one period of the axis of g (genus 2)."""
    from .lifts import segment_pieces

    tiling = tiling_for(g.pres)
    if tiling.kind != "dirichlet":
        raise PreconditionError("wall counts are defined for the octagon tiling")
    total = 0
    for piece in segment_pieces(g):
        n_inv = piece.normalizer.inverse()
        lo, hi = sorted((piece.u0, piece.u1))
        count = max(2, int(math.ceil((hi - lo) / tiling.step)) + 1)
        us = np.linspace(piece.u0, piece.u1, count)
        # walk a curve at constant tiny distance to the left of the axis
        pts = np.array([n_inv.apply(complex(-offset, 1.0) * math.exp(u)) for u in us])
        total += piece.sign * _walls_on_path(tiling, pts)
    return total
