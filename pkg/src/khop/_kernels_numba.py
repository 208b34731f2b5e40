"""Numba kernel lane.

JIT mirrors of the numpy lane.  Integer outputs are bit-identical to
the numpy implementations; float aggregation agrees to rounding.  All
kernels release the GIL so the executors can fan work out over a
thread pool.
"""

import numpy as np
from numba import njit

LANE_NAME = "numba"

_INIT = np.uint64(0xD1B54A32D192ED03)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_LO32 = np.uint64(0xFFFFFFFF)


@njit(cache=True, inline="always")
def _mix(x):
    x ^= x >> np.uint64(30)
    x *= _MUL1
    x ^= x >> np.uint64(27)
    x *= _MUL2
    return x ^ (x >> np.uint64(31))


@njit(cache=True, inline="always")
def _prf(seed, sid, step, slot, bound):
    h = _mix(seed ^ _INIT)
    h = _mix(h + _GOLDEN + sid)
    h = _mix(h + _GOLDEN + step)
    h = _mix(h + _GOLDEN + slot)
    hi = h >> np.uint64(32)
    lo = h & _LO32
    bhi = bound >> np.uint64(32)
    blo = bound & _LO32
    a = hi * blo
    b = lo * bhi
    t = ((lo * blo) >> np.uint64(32)) + (a & _LO32) + (b & _LO32)
    return hi * bhi + (a >> np.uint64(32)) + (b >> np.uint64(32)) + (t >> np.uint64(32))


@njit(cache=True, nogil=True)
def prf_draw_array(seed, sample_ids, step, slots, bounds):
    n = sample_ids.shape[0]
    out = np.empty(n, dtype=np.int64)
    stepu = np.uint64(step)
    for i in range(n):
        out[i] = np.int64(_prf(seed, np.uint64(sample_ids[i]), stepu,
                                np.uint64(slots[i]), np.uint64(bounds[i])))
    return out


@njit(cache=True, nogil=True)
def expand_step_samples(ro, ci, T, out, seed, step, f, unique, i_lo, i_hi, max_deg):
    fetches = 0
    draws = 0
    stepu = np.uint64(step)
    scratch = np.empty(max_deg, dtype=np.int64)
    for i in range(i_lo, i_hi):
        sid = np.uint64(i)
        for t in range(T.shape[1]):
            v = T[i, t]
            if v < 0:
                continue
            fetches += 1
            lo = ro[v]
            d = ro[v + 1] - lo
            if d == 0:
                continue
            base = t * f
            if unique:
                for j in range(d):
                    scratch[j] = ci[lo + j]
                m = f if f < d else d
                for j in range(m):
                    r = np.int64(_prf(seed, sid, stepu,
                                      np.uint64(base + j), np.uint64(d - j)))
                    out[i, base + j] = scratch[r]
                    scratch[r] = scratch[d - 1 - j]
                draws += m
            else:
                for j in range(f):
                    r = np.int64(_prf(seed, sid, stepu,
                                      np.uint64(base + j), np.uint64(d)))
                    out[i, base + j] = ci[lo + r]
                draws += f
    return fetches, draws


@njit(cache=True, nogil=True)
def expand_step_groups(ro, ci, out, seed, step, f, unique,
                       g_transit, g_start, mem_sample, mem_tidx, g_lo, g_hi, max_deg):
    fetches = g_hi - g_lo
    draws = 0
    stepu = np.uint64(step)
    scratch = np.empty(max_deg, dtype=np.int64)
    for gix in range(g_lo, g_hi):
        v = g_transit[gix]
        lo = ro[v]
        d = ro[v + 1] - lo
        if d == 0:
            continue
        for m in range(g_start[gix], g_start[gix + 1]):
            i = mem_sample[m]
            t = mem_tidx[m]
            sid = np.uint64(i)
            base = t * f
            if unique:
                for j in range(d):
                    scratch[j] = ci[lo + j]
                k = f if f < d else d
                for j in range(k):
                    r = np.int64(_prf(seed, sid, stepu,
                                      np.uint64(base + j), np.uint64(d - j)))
                    out[i, base + j] = scratch[r]
                    scratch[r] = scratch[d - 1 - j]
                draws += k
            else:
                for j in range(f):
                    r = np.int64(_prf(seed, sid, stepu,
                                      np.uint64(base + j), np.uint64(d)))
                    out[i, base + j] = ci[lo + r]
                draws += f
    return fetches, draws


@njit(cache=True, nogil=True)
def dedup_rows_first(src, dst, i_lo, i_hi):
    for i in range(i_lo, i_hi):
        k = 0
        for c in range(src.shape[1]):
            v = src[i, c]
            if v < 0:
                continue
            dup = False
            for q in range(k):
                if dst[i, q] == v:
                    dup = True
                    break
            if not dup:
                dst[i, k] = v
                k += 1


@njit(cache=True, nogil=True)
def csr_mean_aggregate(ro, ci, h):
    n = ro.shape[0] - 1
    d = h.shape[1]
    out = np.zeros((n, d), dtype=np.float64)
    for v in range(n):
        lo = ro[v]
        hi = ro[v + 1]
        if hi > lo:
            for e in range(lo, hi):
                u = ci[e]
                for c in range(d):
                    out[v, c] += h[u, c]
            deg = np.float64(hi - lo)
            for c in range(d):
                out[v, c] /= deg
    return out


@njit(cache=True, nogil=True)
def arc_mean_aggregate(src, dst, h_src, num_dst):
    d = h_src.shape[1]
    out = np.zeros((num_dst, d), dtype=np.float64)
    cnt = np.zeros(num_dst, dtype=np.int64)
    for e in range(src.shape[0]):
        t = dst[e]
        s = src[e]
        cnt[t] += 1
        for c in range(d):
            out[t, c] += h_src[s, c]
    for v in range(num_dst):
        if cnt[v] > 0:
            for c in range(d):
                out[v, c] /= cnt[v]
    return out
