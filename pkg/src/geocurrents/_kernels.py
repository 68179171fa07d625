"""Hot loops: point reduction into a fundamental domain and key clustering.

Each kernel has a numba version and a plain numpy/python version with the
same signature.  Setting ``GEOCURRENTS_DISABLE_NUMBA=1`` (or running without
numba installed) selects the fallback.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("GEOCURRENTS_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

try:  # pragma: no cover - exercised through both code paths in tests
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False
    njit = None


def _reduce_points_py(zr: np.ndarray, zi: np.ndarray, coef: np.ndarray, inv: np.ndarray,
                      fwd: np.ndarray, max_steps: int):
    """Move each point into the domain {A|z|^2 + Bx + D >= 0 for every region}.

    ``coef[k] = (A, B, D)`` describes the region handled by generator k,
    ``inv[k]`` and ``fwd[k]`` are the 2x2 matrices of s_k^-1 and s_k as
    flat (a, b, c, d).  Returns reduced points, the accumulated t (z = t.z')
    and the number of steps taken (``max_steps + 1`` on failure).
    """
    n = zr.shape[0]
    m = coef.shape[0]
    out_r = zr.copy()
    out_i = zi.copy()
    t = np.zeros((n, 4))
    t[:, 0] = 1.0
    t[:, 3] = 1.0
    steps = np.zeros(n, dtype=np.int64)
    for p in range(n):
        x = out_r[p]
        y = out_i[p]
        ta, tb, tc, td = 1.0, 0.0, 0.0, 1.0
        k_steps = 0
        while True:
            r2 = x * x + y * y
            best = 0.0
            best_k = -1
            for k in range(m):
                v = coef[k, 0] * r2 + coef[k, 1] * x + coef[k, 2]
                scale = abs(coef[k, 0]) * r2 + abs(coef[k, 1] * x) + abs(coef[k, 2])
                if v < -1e-12 * scale and v < best:
                    best = v
                    best_k = k
            if best_k < 0:
                break
            if k_steps >= max_steps:
                k_steps += 1
                break
            a, b, c, d = inv[best_k, 0], inv[best_k, 1], inv[best_k, 2], inv[best_k, 3]
            nr = a * x + b
            ni = a * y
            dr = c * x + d
            di = c * y
            den = dr * dr + di * di
            x = (nr * dr + ni * di) / den
            y = (ni * dr - nr * di) / den
            fa, fb, fc, fd = fwd[best_k, 0], fwd[best_k, 1], fwd[best_k, 2], fwd[best_k, 3]
            ta, tb, tc, td = (ta * fa + tb * fc, ta * fb + tb * fd,
                              tc * fa + td * fc, tc * fb + td * fd)
            k_steps += 1
        out_r[p] = x
        out_i[p] = y
        t[p, 0] = ta
        t[p, 1] = tb
        t[p, 2] = tc
        t[p, 3] = td
        steps[p] = k_steps
    return out_r, out_i, t, steps


def _cluster_py(keys: np.ndarray, dup_tol: float, amb_tol: float):
    """Label rows of ``keys`` so rows within ``dup_tol`` (max-norm) share a label.

    Returns (labels, ambiguous) where ``ambiguous`` counts row pairs whose
    separation falls in [dup_tol, amb_tol).
    """
    n = keys.shape[0]
    order = np.argsort(keys[:, 0], kind="mergesort")
    labels = -np.ones(n, dtype=np.int64)
    ambiguous = 0
    d = keys.shape[1]
    for ii in range(n):
        i = order[ii]
        if labels[i] < 0:
            labels[i] = i
        jj = ii + 1
        while jj < n:
            j = order[jj]
            if keys[j, 0] - keys[i, 0] >= amb_tol:
                break
            sep = 0.0
            for c in range(d):
                s = abs(keys[j, c] - keys[i, c])
                if s > sep:
                    sep = s
            if sep < dup_tol:
                if labels[j] < 0:
                    labels[j] = labels[i]
            elif sep < amb_tol:
                ambiguous += 1
            jj += 1
    return labels, ambiguous


def _reduce_points_np(zr: np.ndarray, zi: np.ndarray, coef: np.ndarray, inv: np.ndarray,
                      fwd: np.ndarray, max_steps: int):
    """Vectorised counterpart of the scalar loop: all active points step together."""
    x = zr.astype(float).copy()
    y = zi.astype(float).copy()
    n = x.shape[0]
    t = np.tile(np.array([1.0, 0.0, 0.0, 1.0]), (n, 1))
    steps = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    while active.size:
        xa, ya = x[active], y[active]
        r2 = xa * xa + ya * ya
        vals = coef[:, 0][None, :] * r2[:, None] + coef[:, 1][None, :] * xa[:, None] + coef[:, 2][None, :]
        scale = (np.abs(coef[:, 0])[None, :] * r2[:, None] + np.abs(coef[:, 1][None, :] * xa[:, None])
                 + np.abs(coef[:, 2])[None, :])
        vals = np.where(vals < -1e-12 * scale, vals, 0.0)
        k = np.argmin(vals, axis=1)
        moving = vals[np.arange(active.size), k] < 0.0
        over = moving & (steps[active] >= max_steps)
        steps[active[over]] = max_steps + 1
        moving &= ~over
        if not moving.any():
            break
        idx = active[moving]
        k = k[moving]
        a, b, c, d = inv[k, 0], inv[k, 1], inv[k, 2], inv[k, 3]
        z = x[idx] + 1j * y[idx]
        z = (a * z + b) / (c * z + d)
        x[idx], y[idx] = z.real, z.imag
        f = fwd[k]
        ta, tb, tc, td = t[idx, 0].copy(), t[idx, 1].copy(), t[idx, 2].copy(), t[idx, 3].copy()
        t[idx, 0] = ta * f[:, 0] + tb * f[:, 2]
        t[idx, 1] = ta * f[:, 1] + tb * f[:, 3]
        t[idx, 2] = tc * f[:, 0] + td * f[:, 2]
        t[idx, 3] = tc * f[:, 1] + td * f[:, 3]
        steps[idx] += 1
        active = idx
    return x, y, t, steps


if HAVE_NUMBA:
    reduce_points = njit(cache=True, nogil=True)(_reduce_points_py)
    cluster_keys = njit(cache=True, nogil=True)(_cluster_py)
else:
    reduce_points = _reduce_points_np
    cluster_keys = _cluster_py

reduce_points_fallback = _reduce_points_np
cluster_keys_fallback = _cluster_py
BACKEND = "numba" if HAVE_NUMBA else "python"
