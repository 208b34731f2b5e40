"""Pure-numpy kernel lane.

Fallback implementations of the hot inner loops, selected by the
KHOP_KERNELS environment flag (see kernels.py).  Sampling kernels are
bit-identical to the numba lane; float aggregation kernels agree to
rounding (summation order differs: reduceat vs sequential loop).
"""

import numpy as np

from .prf import _mix64 as _mix64_int, _MASK, _GOLDEN as _GOLDEN_INT, _INIT as _INIT_INT

LANE_NAME = "numpy"

_U = np.uint64
_GOLDEN = _U(_GOLDEN_INT)
_MUL1 = _U(0xBF58476D1CE4E5B9)
_MUL2 = _U(0x94D049BB133111EB)
_S30 = _U(30)
_S27 = _U(27)
_S31 = _U(31)
_S32 = _U(32)
_LO32 = _U(0xFFFFFFFF)


def _mix64(x):
    # array-only arithmetic: uint64 arrays wrap mod 2**64 without warnings
    x = (x ^ (x >> _S30)) * _MUL1
    x = (x ^ (x >> _S27)) * _MUL2
    return x ^ (x >> _S31)


def _scale(h, bound):
    # floor(h * bound / 2**64) via 32-bit split multiply, no 128-bit ints
    hi = h >> _S32
    lo = h & _LO32
    bhi = bound >> _S32
    blo = bound & _LO32
    a = hi * blo
    b = lo * bhi
    t = ((lo * blo) >> _S32) + (a & _LO32) + (b & _LO32)
    return hi * bhi + (a >> _S32) + (b >> _S32) + (t >> _S32)


def prf_draw_array(seed, sample_ids, step, slots, bounds):
    """Vectorized counter-based draws; int64 in, int64 out."""
    sids = np.asarray(sample_ids, dtype=np.int64).astype(np.uint64)
    sl = np.asarray(slots, dtype=np.int64).astype(np.uint64)
    b = np.asarray(bounds, dtype=np.int64).astype(np.uint64)
    # scalar stages in plain ints; switch to arrays once sample_ids enter
    h1 = _mix64_int((int(seed) ^ _INIT_INT) & _MASK)
    hp = _U((h1 + _GOLDEN_INT) & _MASK)
    h = _mix64(hp + sids)
    h = _mix64(h + _GOLDEN + _U(int(step)))
    h = _mix64(h + _GOLDEN + sl)
    return _scale(h, b).astype(np.int64)


def expand_step_samples(ro, ci, T, out, seed, step, f, unique, i_lo, i_hi, max_deg):
    """Fill out[i_lo:i_hi] for one step, iterating sample by sample.

    T holds the step's transits per sample (SENTINEL-padded); out has
    f slots per transit and is prefilled with SENTINEL.  Returns
    (adjacency_fetches, draws) for the processed rows.
    """
    if unique:
        return _expand_unique_rows(ro, ci, T, out, seed, step, f, i_lo, i_hi)
    Tc = T[i_lo:i_hi]
    tv = np.repeat(Tc, f, axis=1)
    valid = tv >= 0
    fetches = int((Tc >= 0).sum())
    deg = np.zeros(tv.shape, dtype=np.int64)
    vv = tv[valid]
    deg[valid] = ro[vv + 1] - ro[vv]
    live = deg > 0
    if not live.any():
        return fetches, 0
    n_slots = tv.shape[1]
    sids = np.broadcast_to(np.arange(i_lo, i_hi, dtype=np.int64)[:, None], tv.shape)[live]
    slots = np.broadcast_to(np.arange(n_slots, dtype=np.int64)[None, :], tv.shape)[live]
    draws = prf_draw_array(seed, sids, step, slots, deg[live])
    out[i_lo:i_hi][live] = ci[ro[tv[live]] + draws]
    return fetches, int(live.sum())


def _expand_unique_rows(ro, ci, T, out, seed, step, f, i_lo, i_hi):
    # without-replacement block draws: swap-remove from a scratch copy
    fetches = 0
    ndraws = 0
    for i in range(i_lo, i_hi):
        for t in range(T.shape[1]):
            v = T[i, t]
            if v < 0:
                continue
            fetches += 1
            lo = int(ro[v])
            d = int(ro[v + 1]) - lo
            if d == 0:
                continue
            scratch = ci[lo:lo + d].copy()
            base = t * f
            m = min(f, d)
            rr = prf_draw_array(
                seed,
                np.full(m, i, dtype=np.int64),
                step,
                base + np.arange(m, dtype=np.int64),
                d - np.arange(m, dtype=np.int64),
            )
            for j in range(m):
                r = rr[j]
                out[i, base + j] = scratch[r]
                scratch[r] = scratch[d - 1 - j]
            ndraws += m
    return fetches, ndraws


def expand_step_groups(ro, ci, out, seed, step, f, unique,
                       g_transit, g_start, mem_sample, mem_tidx, g_lo, g_hi, max_deg):
    """Fill out for the transit groups [g_lo, g_hi).

    Each group fetches its transit's neighbor list once and serves every
    member (sample, transit-index) block from it.  Same keying as the
    sample-ordered kernel, so outputs are identical.
    """
    fetches = g_hi - g_lo
    if unique:
        ndraws = 0
        for gixd in range(g_lo, g_hi):
            v = g_transit[gixd]
            lo = int(ro[v])
            d = int(ro[v + 1]) - lo
            if d == 0:
                continue
            nbrs = ci[lo:lo + d]
            for m in range(g_start[gixd], g_start[gixd + 1]):
                i = int(mem_sample[m])
                t = int(mem_tidx[m])
                scratch = nbrs.copy()
                base = t * f
                k = min(f, d)
                rr = prf_draw_array(
                    seed,
                    np.full(k, i, dtype=np.int64),
                    step,
                    base + np.arange(k, dtype=np.int64),
                    d - np.arange(k, dtype=np.int64),
                )
                for j in range(k):
                    r = rr[j]
                    out[i, base + j] = scratch[r]
                    scratch[r] = scratch[d - 1 - j]
                ndraws += k
        return fetches, ndraws
    m_lo = int(g_start[g_lo])
    m_hi = int(g_start[g_hi])
    if m_lo == m_hi:
        return fetches, 0
    sizes = np.diff(g_start[g_lo:g_hi + 1])
    tv = np.repeat(g_transit[g_lo:g_hi], sizes)
    ms = mem_sample[m_lo:m_hi]
    mt = mem_tidx[m_lo:m_hi]
    deg = ro[tv + 1] - ro[tv]
    sid = np.repeat(ms, f)
    slots = np.repeat(mt * f, f) + np.tile(np.arange(f, dtype=np.int64), len(ms))
    degs = np.repeat(deg, f)
    starts = np.repeat(ro[tv], f)
    live = degs > 0
    if not live.any():
        return fetches, 0
    draws = prf_draw_array(seed, sid[live], step, slots[live], degs[live])
    out[sid[live], slots[live]] = ci[starts[live] + draws]
    return fetches, int(live.sum())


def dedup_rows_first(src, dst, i_lo, i_hi):
    """Compact each row of src to its distinct non-SENTINEL values in
    first-occurrence order; dst is prefilled with SENTINEL."""
    for i in range(i_lo, i_hi):
        seen = set()
        k = 0
        for v in src[i]:
            if v >= 0 and v not in seen:
                seen.add(v)
                dst[i, k] = v
                k += 1


def csr_mean_aggregate(ro, ci, h):
    """Per-vertex mean of neighbor feature rows; zero vector for sinks."""
    n = ro.size - 1
    out = np.zeros((n, h.shape[1]), dtype=np.float64)
    deg = np.diff(ro)
    nz = deg > 0
    if nz.any():
        sums = np.add.reduceat(h[ci], ro[:-1][nz], axis=0)
        out[nz] = sums / deg[nz, None]
    return out


def arc_mean_aggregate(src, dst, h_src, num_dst):
    """Mean of h_src[src] rows grouped by dst over the given arc list."""
    out = np.zeros((num_dst, h_src.shape[1]), dtype=np.float64)
    if len(src):
        np.add.at(out, dst, h_src[src])
        cnt = np.bincount(dst, minlength=num_dst)
        nz = cnt > 0
        out[nz] /= cnt[nz, None]
    return out
