import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geocurrents import _kernels
from geocurrents.sgroup import ball_list
from geocurrents.tiling import BASE_POINT, MAX_REDUCTION_STEPS, flat, mat_apply, point_keys, tiling_for


def _orbit_points(pres, L, jitter, seed):
    rng = np.random.default_rng(seed)
    mats = np.array([flat(g.iso) for g in ball_list(L, pres)])
    base = BASE_POINT + jitter * (rng.normal(size=len(mats)) + 1j * rng.normal(size=len(mats)))
    return mat_apply(mats, base)


@pytest.mark.parametrize("mode", ["genus2", "free2"])
def test_reduction_backends_agree(mode, g2, fr):
    pres = g2 if mode == "genus2" else fr
    til = tiling_for(pres)
    z = _orbit_points(pres, 3, 0.05, 7)
    args = (til.coef, til.inv, til.fwd, MAX_REDUCTION_STEPS)
    r1 = _kernels.reduce_points(z.real.copy(), z.imag.copy(), *args)
    r2 = _kernels.reduce_points_fallback(z.real.copy(), z.imag.copy(), *args)
    assert np.array_equal(r1[3], r2[3])
    np.testing.assert_allclose(r1[0], r2[0], atol=1e-9)
    np.testing.assert_allclose(r1[1], r2[1], atol=1e-9)
    np.testing.assert_allclose(r1[2], r2[2], rtol=1e-9, atol=1e-9)


def test_reduction_lands_in_base_tile(g2):
    til = tiling_for(g2)
    z = _orbit_points(g2, 3, 0.05, 3)
    zr, t = til.reduce(z)
    assert all(til.in_base_tile(complex(w)) for w in zr)
    np.testing.assert_allclose(mat_apply(t, zr), z, rtol=1e-8, atol=1e-8)


def test_cluster_backends_agree(g2):
    z = _orbit_points(g2, 2, 0.0, 0)
    k = point_keys(z)
    keys = np.concatenate([k, k + 1e-9])
    l1, a1 = _kernels.cluster_keys(keys, 1e-6, 1e-4)
    l2, a2 = _kernels.cluster_keys_fallback(keys, 1e-6, 1e-4)
    assert np.array_equal(l1, l2) and a1 == a2
    assert len(np.unique(l1)) == len(z)


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=40))
def test_cluster_labels_are_partition(rows):
    keys = np.array(rows, dtype=float)
    labels, _ = _kernels.cluster_keys(keys, 1e-6, 1e-3)
    ref, _ = _kernels.cluster_keys_fallback(keys, 1e-6, 1e-3)
    assert np.array_equal(labels, ref)
    for i, lab in enumerate(labels):
        assert np.max(np.abs(keys[i] - keys[lab])) < 1e-6 or lab == i


def test_environment_switch_selects_fallback():
    env = dict(os.environ, GEOCURRENTS_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from geocurrents import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_benchmark_script_runs():
    script = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_kernels.py")
    out = subprocess.run([sys.executable, script, "--radius", "2", "--repeat", "1"],
                         capture_output=True, text=True, timeout=300)
    assert out.returncode == 0, out.stderr
    assert "reduce_points" in out.stdout and "cluster_keys" in out.stdout
