"""Time the numba kernels against their numpy/python fallbacks.

    python benchmarks/bench_kernels.py [--radius 4] [--repeat 5]

Both backends are imported in the same process, so the comparison does not
depend on GEOCURRENTS_DISABLE_NUMBA.  Results are checked for agreement
before timing.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from geocurrents import _kernels
from geocurrents.sgroup import ball_list, get_presentation
from geocurrents.tiling import BASE_POINT, MAX_REDUCTION_STEPS, flat, mat_apply, point_keys, tiling_for


def _best(fn, repeat):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--mode", default="genus2", choices=["genus2", "free2"])
    args = ap.parse_args(argv)

    pres = get_presentation(args.mode)
    til = tiling_for(pres)
    rng = np.random.default_rng(0)
    mats = np.array([flat(g.iso) for g in ball_list(args.radius, pres)])
    base = BASE_POINT + 0.05 * (rng.normal(size=len(mats)) + 1j * rng.normal(size=len(mats)))
    z = mat_apply(mats, base)
    extra = (til.coef, til.inv, til.fwd, MAX_REDUCTION_STEPS)
    keys = point_keys(z)
    keys = np.concatenate([keys, keys + 1e-9])

    rows = []
    if _kernels.HAVE_NUMBA:
        r1 = _kernels.reduce_points(z.real.copy(), z.imag.copy(), *extra)
        r2 = _kernels.reduce_points_fallback(z.real.copy(), z.imag.copy(), *extra)
        assert np.array_equal(r1[3], r2[3]), "reduction backends disagree"
        l1, _ = _kernels.cluster_keys(keys, 1e-6, 1e-4)
        l2, _ = _kernels.cluster_keys_fallback(keys, 1e-6, 1e-4)
        assert np.array_equal(l1, l2), "cluster backends disagree"

    for name, fast, slow, call in (
        ("reduce_points", _kernels.reduce_points, _kernels.reduce_points_fallback,
         lambda f: f(z.real.copy(), z.imag.copy(), *extra)),
        ("cluster_keys", _kernels.cluster_keys, _kernels.cluster_keys_fallback,
         lambda f: f(keys, 1e-6, 1e-4)),
    ):
        t_slow = _best(lambda: call(slow), args.repeat)
        t_fast = _best(lambda: call(fast), args.repeat) if _kernels.HAVE_NUMBA else float("nan")
        rows.append((name, t_fast, t_slow))

    print(f"backend={_kernels.BACKEND} mode={args.mode} points={len(z)} keys={len(keys)}")
    print(f"{'kernel':<16}{'numba [s]':>12}{'fallback [s]':>14}{'speedup':>10}")
    for name, tf, ts in rows:
        print(f"{name:<16}{tf:>12.5f}{ts:>14.5f}{ts / tf:>10.1f}")


if __name__ == "__main__":
    main()
