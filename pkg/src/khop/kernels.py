"""Kernel lane dispatch.

Two interchangeable implementations of the hot loops live in
_kernels_numba (JIT, default when numba imports cleanly) and
_kernels_numpy (vectorized fallback).  The KHOP_KERNELS environment
variable picks the lane at import time:

    KHOP_KERNELS=auto    numba if available, else numpy (default)
    KHOP_KERNELS=numba   require the JIT lane, fail if unavailable
    KHOP_KERNELS=numpy   force the fallback lane

Integer kernel outputs are bit-identical across lanes; float
aggregation kernels agree to rounding.  Tests and the benchmark switch
lanes at runtime via set_lane / use_lane.
"""

import os
from contextlib import contextmanager

import numpy as np

from . import _kernels_numpy

_MASK = (1 << 64) - 1

_numba_mod = None
_numba_error = None
_numba_tried = False


def _try_numba():
    global _numba_mod, _numba_error, _numba_tried
    if not _numba_tried:
        _numba_tried = True
        try:
            from . import _kernels_numba as mod
            _numba_mod = mod
        except Exception as exc:
            _numba_error = exc
    return _numba_mod


def numba_available():
    return _try_numba() is not None


def _resolve(name):
    if name == "numpy":
        return _kernels_numpy
    if name == "numba":
        mod = _try_numba()
        if mod is None:
            raise ImportError(
                "KHOP_KERNELS=numba but the numba lane failed to import: %r"
                % (_numba_error,)
            )
        return mod
    if name == "auto":
        return _try_numba() or _kernels_numpy
    raise ValueError(
        "unknown kernel lane %r (expected auto, numba, or numpy)" % (name,)
    )


_lane = _resolve(os.environ.get("KHOP_KERNELS", "auto").strip().lower() or "auto")


def active_lane():
    """Name of the lane currently dispatched to ('numba' or 'numpy')."""
    return _lane.LANE_NAME


def set_lane(name):
    """Switch lanes at runtime; returns the previous lane name."""
    global _lane
    prev = _lane.LANE_NAME
    _lane = _resolve(name)
    return prev


@contextmanager
def use_lane(name):
    prev = set_lane(name)
    try:
        yield
    finally:
        set_lane(prev)


def _seed_u64(seed):
    return np.uint64(int(seed) & _MASK)


def prf_draw_array(seed, sample_ids, step, slots, bounds):
    """Vectorized prf_draw over parallel 1-D arrays of equal length."""
    sids = np.ascontiguousarray(sample_ids, dtype=np.int64)
    sl = np.ascontiguousarray(slots, dtype=np.int64)
    b = np.ascontiguousarray(bounds, dtype=np.int64)
    return _lane.prf_draw_array(_seed_u64(seed), sids, int(step), sl, b)


def expand_step_samples(ro, ci, T, out, seed, step, f, unique, i_lo, i_hi, max_deg):
    """Sample-ordered step expansion over rows [i_lo, i_hi) of T/out.

    out must be SENTINEL-prefilled, int64, C-contiguous; written in
    place.  Returns (adjacency_fetches, draws).
    """
    return _lane.expand_step_samples(
        ro, ci, T, out, _seed_u64(seed), int(step), int(f), bool(unique),
        int(i_lo), int(i_hi), int(max_deg))


def expand_step_groups(ro, ci, out, seed, step, f, unique,
                       g_transit, g_start, mem_sample, mem_tidx,
                       g_lo, g_hi, max_deg):
    """Transit-grouped step expansion over groups [g_lo, g_hi).

    Produces bytes identical to expand_step_samples for the same step
    because the draw keying depends only on (sample, slot)."""
    return _lane.expand_step_groups(
        ro, ci, out, _seed_u64(seed), int(step), int(f), bool(unique),
        g_transit, g_start, mem_sample, mem_tidx,
        int(g_lo), int(g_hi), int(max_deg))


def dedup_rows_first(src, dst, i_lo, i_hi):
    """Row-wise first-occurrence compaction of non-negative values."""
    _lane.dedup_rows_first(src, dst, int(i_lo), int(i_hi))


def csr_mean_aggregate(ro, ci, h):
    """Mean of neighbor rows of h per CSR vertex; zeros for sinks."""
    return _lane.csr_mean_aggregate(ro, ci, h)


def arc_mean_aggregate(src, dst, h_src, num_dst):
    """Mean of h_src[src] grouped by dst over an explicit arc list."""
    return _lane.arc_mean_aggregate(src, dst, h_src, int(num_dst))


def warmup():
    """Run every kernel once on tiny inputs (triggers JIT compilation)."""
    ro = np.array([0, 1, 2], dtype=np.int64)
    ci = np.array([1, 0], dtype=np.int64)
    T = np.array([[0]], dtype=np.int64)
    for uq in (False, True):
        out = np.full((1, 2), -1, dtype=np.int64)
        expand_step_samples(ro, ci, T, out, 1, 0, 2, uq, 0, 1, 1)
        out2 = np.full((1, 2), -1, dtype=np.int64)
        expand_step_groups(
            ro, ci, out2, 1, 0, 2, uq,
            np.array([0], dtype=np.int64), np.array([0, 1], dtype=np.int64),
            np.array([0], dtype=np.int64), np.array([0], dtype=np.int64), 0, 1, 1)
    dst = np.full((1, 2), -1, dtype=np.int64)
    dedup_rows_first(out, dst, 0, 1)
    h = np.zeros((2, 1), dtype=np.float64)
    csr_mean_aggregate(ro, ci, h)
    arc_mean_aggregate(np.array([0], dtype=np.int64),
                       np.array([0], dtype=np.int64), h, 1)
    prf_draw_array(1, np.array([0], dtype=np.int64), 0,
                   np.array([0], dtype=np.int64), np.array([5], dtype=np.int64))
