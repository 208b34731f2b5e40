import os
import subprocess
import sys

import numpy as np
import pytest

from khop import kernels
from khop.engine import _group_step
from khop.graph import from_edges
from khop.prf import prf_draw

pytestmark = pytest.mark.skipif(
    not kernels.numba_available(),
    reason="both lanes required for equality checks")


def _random_graph(n, m, seed):
    rng = np.random.default_rng(seed)
    edges = rng.integers(0, n, size=(m, 2))
    edges = edges[edges[:, 0] != edges[:, 1]]
    return from_edges(n, edges)


def test_prf_array_matches_scalar():
    rng = np.random.default_rng(1)
    sids = rng.integers(0, 2**40, size=200).astype(np.int64)
    slots = rng.integers(0, 2**20, size=200).astype(np.int64)
    bounds = rng.integers(1, 2**62, size=200).astype(np.int64)
    for lane in ("numpy", "numba"):
        with kernels.use_lane(lane):
            got = kernels.prf_draw_array(77, sids, 3, slots, bounds)
        want = [prf_draw(77, int(a), 3, int(b), int(c))
                for a, b, c in zip(sids, slots, bounds)]
        assert got.tolist() == want, lane


def _run_expand(lane, g, T, f, unique, seed=5, step=1):
    R, w = T.shape
    out = np.full((R, w * f), -1, dtype=np.int64)
    with kernels.use_lane(lane):
        fetches, draws = kernels.expand_step_samples(
            g.row_offsets, g.col_indices, T, out, seed, step, f, unique,
            0, R, g.max_degree())
    return out, fetches, draws


@pytest.mark.parametrize("unique", [False, True])
def test_expand_lanes_bit_equal(unique):
    g = _random_graph(40, 300, 2)
    rng = np.random.default_rng(3)
    T = rng.integers(0, 40, size=(12, 3)).astype(np.int64)
    T[0, 1] = -1
    T[5] = -1
    out_np, f_np, d_np = _run_expand("numpy", g, T, 4, unique)
    out_nb, f_nb, d_nb = _run_expand("numba", g, T, 4, unique)
    assert np.array_equal(out_np, out_nb)
    assert (f_np, d_np) == (f_nb, d_nb)
    # sentinel transits yield sentinel slots and no fetch
    assert (out_np[5] == -1).all()
    live = int((T >= 0).sum())
    assert f_np == live


def test_groups_match_samples():
    g = _random_graph(30, 200, 4)
    rng = np.random.default_rng(5)
    T = rng.integers(0, 30, size=(9, 2)).astype(np.int64)
    T[2, 0] = -1
    f = 3
    for unique in (False, True):
        want, _, _ = _run_expand("numpy", g, T, f, unique)
        g_transit, g_start, mem_sample, mem_tidx = _group_step(T)
        for lane in ("numpy", "numba"):
            out = np.full((T.shape[0], T.shape[1] * f), -1, dtype=np.int64)
            with kernels.use_lane(lane):
                fetches, _ = kernels.expand_step_groups(
                    g.row_offsets, g.col_indices, out, 5, 1, f, unique,
                    g_transit, g_start, mem_sample, mem_tidx,
                    0, len(g_transit), g.max_degree())
            assert np.array_equal(out, want), (lane, unique)
            assert fetches == len(g_transit)


def test_dedup_rows_first():
    src = np.array([[3, 1, 3, 1, 7], [2, 2, 2, 2, 2], [-1, -1, 4, 4, -1]],
                   dtype=np.int64)
    want = np.array([[3, 1, 7, -1, -1], [2, -1, -1, -1, -1],
                     [4, -1, -1, -1, -1]], dtype=np.int64)
    for lane in ("numpy", "numba"):
        dst = np.full_like(src, -1)
        with kernels.use_lane(lane):
            kernels.dedup_rows_first(src, dst, 0, src.shape[0])
        assert np.array_equal(dst, want), lane


def test_csr_mean_aggregate():
    g = from_edges(4, [(0, 1), (0, 2), (2, 3)])
    h = np.array([[1.0], [2.0], [4.0], [8.0]])
    want = np.array([[3.0], [0.0], [8.0], [0.0]])
    for lane in ("numpy", "numba"):
        with kernels.use_lane(lane):
            got = kernels.csr_mean_aggregate(g.row_offsets, g.col_indices, h)
        assert np.allclose(got, want), lane


def test_arc_mean_aggregate():
    src = np.array([0, 1, 1, 2], dtype=np.int64)
    dst = np.array([0, 0, 1, 1], dtype=np.int64)
    h = np.array([[2.0, 0.0], [4.0, 1.0], [6.0, 5.0]])
    want = np.array([[3.0, 0.5], [5.0, 3.0], [0.0, 0.0]])
    for lane in ("numpy", "numba"):
        with kernels.use_lane(lane):
            got = kernels.arc_mean_aggregate(src, dst, h, 3)
        assert np.allclose(got, want), lane


def test_aggregate_lanes_close_random():
    g = _random_graph(60, 400, 7)
    rng = np.random.default_rng(8)
    h = rng.normal(size=(60, 5))
    with kernels.use_lane("numpy"):
        a = kernels.csr_mean_aggregate(g.row_offsets, g.col_indices, h)
    with kernels.use_lane("numba"):
        b = kernels.csr_mean_aggregate(g.row_offsets, g.col_indices, h)
    assert np.allclose(a, b, atol=1e-12)


def test_lane_dispatch():
    prev = kernels.active_lane()
    try:
        old = kernels.set_lane("numpy")
        assert kernels.active_lane() == "numpy"
        kernels.set_lane(old)
    finally:
        kernels.set_lane(prev)
    with kernels.use_lane("numpy"):
        assert kernels.active_lane() == "numpy"
    assert kernels.active_lane() == prev
    with pytest.raises(ValueError):
        kernels.set_lane("cuda")


def test_env_flag_selects_lane():
    env = dict(os.environ, KHOP_KERNELS="numpy")
    code = "from khop import kernels; print(kernels.active_lane())"
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
