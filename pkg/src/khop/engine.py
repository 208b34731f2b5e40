"""Generic sampling API and its two parallel executors.

A SamplingSpec describes an algorithm (steps, per-step fanout, the
next-vertex rule, transit selection).  Two executors run it:
sample-parallel partitions work by sample, transit-parallel groups all
samples crossing the same transit vertex and fetches that vertex's
neighbor list once.  Randomness is counter-based, keyed by
(seed, sample_id, step, slot), so both executors produce identical
SampleSets for any worker count; only their access statistics differ.
"""

import hashlib
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import ConfigError, FormatError, InvariantError
from .prf import FORMAT_VERSION, prf_draw

SENTINEL = -1
_SENTINEL_U32 = 0xFFFFFFFF
_SAMPLESET_MAGIC = b"KSMP"

TRANSITS_PREV = "prev"
TRANSITS_CUMULATIVE = "cumulative"


class SamplingType(Enum):
    INDIVIDUAL = "individual"
    COLLECTIVE = "collective"


class Strategy(Enum):
    SAMPLE_PARALLEL = "sample"
    TRANSIT_PARALLEL = "transit"


def _never_unique(step):
    return False


@dataclass(frozen=True)
class SamplingSpec:
    """User-programmable sampling algorithm.

    next, when given, is called per slot as
    next(state, transit, neighbors, step, draw) and must return a
    neighbor of transit or SENTINEL; draw(bound) yields deterministic
    values in [0, bound).  next=None selects the built-in uniform
    neighbor draw, which the fast kernel lanes implement.

    step_transits, when given, remaps transit indices:
    step_transits(step, state, transit_index) -> vertex id (restricted
    to the sample's root or prior outputs, or SENTINEL).  The number of
    transit indices per step is fixed by transit_mode: "prev" uses the
    previous step's slots (one root slot at step 0), "cumulative"
    appends each step's outputs to the running transit list, so every
    earlier frontier vertex is revisited.

    Collective specs ignore next/step_transits and instead pool a
    candidate set per step (collective_candidates, default: union of
    the previous set's out-neighbors) and call
    collective_next(candidate_set, step, quota, rng) -> distinct
    vertices.
    """

    steps: int
    sample_size: Callable[[int], int]
    unique: Callable[[int], bool] = _never_unique
    sampling_type: SamplingType = SamplingType.INDIVIDUAL
    next: Optional[Callable] = None
    step_transits: Optional[Callable] = None
    transit_mode: str = TRANSITS_PREV
    collective_next: Optional[Callable] = None
    collective_candidates: Optional[Callable] = None
    spec_id: str = "custom"

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("steps must be >= 1, got %d" % (self.steps,))
        if self.transit_mode not in (TRANSITS_PREV, TRANSITS_CUMULATIVE):
            raise ConfigError("unknown transit_mode %r" % (self.transit_mode,))


@dataclass(frozen=True)
class CandidateSet:
    """Pooled per-step candidates handed to collective_next.

    vertices is ascending and distinct; weights (optional, positive
    int64, parallel to vertices) drive weighted draws; prev is the
    previous layer's chosen set; graph is the sampled graph.
    """

    vertices: np.ndarray
    weights: Optional[np.ndarray]
    prev: np.ndarray
    graph: object


@dataclass(frozen=True)
class TransitGroup:
    transit: int
    members: tuple  # of (sample_id, slot) pairs, ordered


@dataclass
class AccessStats:
    adjacency_fetches: int = 0
    draws: int = 0
    wall_time: float = 0.0
    per_step_fetches: list = field(default_factory=list)


class SampleSet:
    """Execution output: per-sample, per-step vertex arrays.

    outputs[s] is int64 of shape (num_samples, slots(s)) with SENTINEL
    for unfilled slots; transits[s] is the step-s transit array the
    slots were drawn from (slots(s) = fanout(s) * transits[s].shape[1]).
    Collective runs store a single shared row (the batch is one
    sample).  Immutable once returned.
    """

    __slots__ = ("spec_id", "seed", "sampling_type", "transit_mode",
                 "roots", "unique_flags", "outputs", "transits",
                 "derivable_transits")

    def __init__(self, spec_id, seed, sampling_type, transit_mode, roots,
                 unique_flags, outputs, transits, derivable_transits=True):
        self.spec_id = spec_id
        self.seed = int(seed)
        self.sampling_type = sampling_type
        self.transit_mode = transit_mode
        self.roots = roots
        self.unique_flags = tuple(bool(u) for u in unique_flags)
        self.outputs = outputs
        self.transits = transits
        self.derivable_transits = bool(derivable_transits)
        for arr in [roots] + outputs + transits:
            if arr.flags.writeable:
                arr.flags.writeable = False

    @property
    def steps(self):
        return len(self.outputs)

    @property
    def num_samples(self):
        return self.outputs[0].shape[0] if self.outputs else self.roots.size

    def step_slots(self, s):
        return self.outputs[s].shape[1]

    def sample_vertices(self, i):
        """Distinct vertex set of sample i: its root plus every
        non-SENTINEL drawn vertex, ascending."""
        parts = [np.array([self.roots[i]], dtype=np.int64)]
        row = 0 if self.sampling_type is SamplingType.COLLECTIVE else i
        for out in self.outputs:
            vals = out[row]
            parts.append(vals[vals >= 0])
        return np.unique(np.concatenate(parts))

    def step_vertices(self, s):
        """Distinct non-SENTINEL vertices drawn at step s, ascending
        (union over samples)."""
        vals = self.outputs[s].ravel()
        return np.unique(vals[vals >= 0])

    def to_bytes(self):
        return _sampleset_bytes(self)

    def digest(self):
        return hashlib.sha256(self.to_bytes()).hexdigest()

    def equals(self, other):
        if (self.spec_id != other.spec_id or self.seed != other.seed
                or self.sampling_type is not other.sampling_type
                or self.transit_mode != other.transit_mode
                or self.unique_flags != other.unique_flags
                or self.steps != other.steps
                or not np.array_equal(self.roots, other.roots)):
            return False
        return (all(np.array_equal(a, b)
                    for a, b in zip(self.outputs, other.outputs))
                and all(np.array_equal(a, b)
                        for a, b in zip(self.transits, other.transits)))


class SampleState:
    """Read-only view of one sample mid-execution, handed to custom
    next / step_transits callbacks."""

    __slots__ = ("sample_id", "root", "_outputs", "_transits")

    def __init__(self, sample_id, root):
        self.sample_id = sample_id
        self.root = root
        self._outputs = []
        self._transits = []

    def output(self, step):
        return self._outputs[step]

    def transits(self, step):
        return self._transits[step]

    @property
    def prev_output(self):
        return self._outputs[-1] if self._outputs else None


class _SlotDraw:
    """draw(bound) handle for one slot; repeated calls advance a
    sub-counter so a callback may consume several values."""

    __slots__ = ("seed", "sample_id", "step", "slot", "count")
    _STRIDE = 1 << 44

    def __init__(self, seed, sample_id, step, slot):
        self.seed = seed
        self.sample_id = sample_id
        self.step = step
        self.slot = slot
        self.count = 0

    def __call__(self, bound):
        r = prf_draw(self.seed, self.sample_id, self.step,
                     self.slot + self.count * self._STRIDE, bound)
        self.count += 1
        return r


class CollectiveRng:
    """Deterministic draw stream for one collective step: draw(bound)
    with an incrementing slot counter, keyed to sample 0."""

    __slots__ = ("seed", "step", "count")

    def __init__(self, seed, step):
        self.seed = seed
        self.step = step
        self.count = 0

    def __call__(self, bound):
        r = prf_draw(self.seed, 0, self.step, self.count, bound)
        self.count += 1
        return r

    draw = __call__


def _as_roots(g, roots):
    r = np.array(roots, dtype=np.int64, copy=True)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("roots must be a non-empty 1-D sequence")
    if r.min() < 0 or r.max() >= g.num_vertices:
        raise ValueError("root out of range [0, %d)" % (g.num_vertices,))
    return r


def _eval_sizes(spec):
    sizes = []
    uniqs = []
    for s in range(spec.steps):
        f = int(spec.sample_size(s))
        if f < 1:
            raise ConfigError("sample_size(%d) must be >= 1, got %d" % (s, f))
        sizes.append(f)
        uniqs.append(bool(spec.unique(s)))
    return sizes, uniqs


def _chunk_bounds(total, workers):
    k = max(1, min(workers, total))
    base, rem = divmod(total, k)
    bounds = []
    lo = 0
    for c in range(k):
        hi = lo + base + (1 if c < rem else 0)
        if hi > lo:
            bounds.append((lo, hi))
        lo = hi
    return bounds


def _group_step(T):
    """Group the (sample, transit-index) pairs of T by transit vertex.

    Returns (g_transit, g_start, mem_sample, mem_tidx) with groups
    ordered by transit id and members by (sample, transit-index);
    SENTINEL entries are excluded (the skip group does no work)."""
    ii, tt = np.nonzero(T >= 0)
    tv = T[ii, tt]
    order = np.lexsort((tt, ii, tv))
    tv = tv[order]
    ii = np.ascontiguousarray(ii[order], dtype=np.int64)
    tt = np.ascontiguousarray(tt[order], dtype=np.int64)
    if tv.size:
        starts = np.flatnonzero(np.r_[True, tv[1:] != tv[:-1]])
        g_transit = np.ascontiguousarray(tv[starts], dtype=np.int64)
        g_start = np.append(starts, tv.size).astype(np.int64)
    else:
        g_transit = np.empty(0, dtype=np.int64)
        g_start = np.zeros(1, dtype=np.int64)
    return g_transit, g_start, ii, tt


def _next_transits(T, out, mode, uq, num_rows):
    cand = out if mode == TRANSITS_PREV else np.concatenate([T, out], axis=1)
    if uq:
        dst = np.full_like(cand, SENTINEL)
        kernels.dedup_rows_first(cand, dst, 0, num_rows)
        return dst
    return cand


def _run_fast_step(g, T, out, seed, s, f, uq, strategy, pool, workers, maxdeg):
    ro, ci = g.row_offsets, g.col_indices
    if strategy is Strategy.SAMPLE_PARALLEL:
        R = T.shape[0]
        bounds = _chunk_bounds(R, workers)
        if pool is None or len(bounds) <= 1:
            results = [kernels.expand_step_samples(ro, ci, T, out, seed, s, f,
                                                   uq, lo, hi, maxdeg)
                       for lo, hi in bounds]
        else:
            futs = [pool.submit(kernels.expand_step_samples, ro, ci, T, out,
                                seed, s, f, uq, lo, hi, maxdeg)
                    for lo, hi in bounds]
            results = [fu.result() for fu in futs]
    else:
        g_transit, g_start, mem_s, mem_t = _group_step(T)
        bounds = _chunk_bounds(len(g_transit), workers)
        if pool is None or len(bounds) <= 1:
            results = [kernels.expand_step_groups(ro, ci, out, seed, s, f, uq,
                                                  g_transit, g_start, mem_s,
                                                  mem_t, lo, hi, maxdeg)
                       for lo, hi in bounds]
        else:
            futs = [pool.submit(kernels.expand_step_groups, ro, ci, out, seed,
                                s, f, uq, g_transit, g_start, mem_s, mem_t,
                                lo, hi, maxdeg)
                    for lo, hi in bounds]
            results = [fu.result() for fu in futs]
    fetches = sum(r[0] for r in results)
    draws = sum(r[1] for r in results)
    return fetches, draws


def _expand_slot_block(out, nbrs, nextfn, state, t, seed, i, s, tidx, f, uq):
    """Fill one (sample, transit) block in the generic lane; returns
    the number of draws consumed."""
    d = len(nbrs)
    base = tidx * f
    if nextfn is None:
        if uq:
            scratch = list(nbrs)
            m = min(f, d)
            for j in range(m):
                r = prf_draw(seed, i, s, base + j, d - j)
                out[i, base + j] = scratch[r]
                scratch[r] = scratch[d - 1 - j]
            return m
        for j in range(f):
            r = prf_draw(seed, i, s, base + j, d)
            out[i, base + j] = nbrs[r]
        return f
    draws = 0
    for j in range(f):
        slot = base + j
        draw = _SlotDraw(seed, i, s, slot)
        v = nextfn(state, t, nbrs, s, draw)
        draws += draw.count
        if v == SENTINEL:
            continue
        pos = np.searchsorted(nbrs, v)
        if pos >= len(nbrs) or nbrs[pos] != v:
            raise InvariantError(
                "next returned %d, not a neighbor of transit %d (sample %d, "
                "step %d, slot %d)" % (v, t, i, s, slot))
        out[i, slot] = v
    return draws


def _run_generic_step(g, spec, T, out, seed, s, f, uq, strategy, states):
    fetches = 0
    draws = 0
    nextfn = spec.next
    if strategy is Strategy.SAMPLE_PARALLEL:
        for i in range(T.shape[0]):
            state = states[i]
            for tidx in range(T.shape[1]):
                t = T[i, tidx]
                if t < 0:
                    continue
                fetches += 1
                nbrs = g.neighbors(int(t))
                if len(nbrs) == 0:
                    continue
                draws += _expand_slot_block(out, nbrs, nextfn, state, int(t),
                                            seed, i, s, tidx, f, uq)
    else:
        g_transit, g_start, mem_s, mem_t = _group_step(T)
        fetches = len(g_transit)
        for gix in range(len(g_transit)):
            t = int(g_transit[gix])
            nbrs = g.neighbors(t)
            if len(nbrs) == 0:
                continue
            for m in range(g_start[gix], g_start[gix + 1]):
                i = int(mem_s[m])
                draws += _expand_slot_block(out, nbrs, nextfn, states[i], t,
                                            seed, i, s, int(mem_t[m]), f, uq)
    return fetches, draws


def _build_transit_array(spec, states, T_default, s):
    """Apply a custom step_transits callback over the engine-defined
    transit width, validating the prior-outputs-or-root restriction."""
    R, w = T_default.shape
    T = np.full((R, w), SENTINEL, dtype=np.int64)
    for i in range(R):
        state = states[i]
        allowed = {int(state.root)}
        for prev in state._outputs:
            allowed.update(int(v) for v in prev[prev >= 0])
        for j in range(w):
            v = int(spec.step_transits(s, state, j))
            if v == SENTINEL:
                continue
            if v not in allowed:
                raise InvariantError(
                    "step_transits returned %d at step %d, which is neither "
                    "the root nor a prior output of sample %d" % (v, s, i))
            T[i, j] = v
    return T


def _execute_individual(g, spec, roots, seed, workers, strategy):
    roots = _as_roots(g, roots)
    sizes, uniqs = _eval_sizes(spec)
    R = roots.size
    fast = spec.next is None and spec.step_transits is None
    maxdeg = g.max_degree()
    states = None
    if not fast:
        states = [SampleState(i, int(roots[i])) for i in range(R)]
    T = roots.reshape(R, 1)
    outputs = []
    transits = []
    stats = AccessStats()
    pool = None
    t0 = time.perf_counter()
    try:
        if fast and workers > 1:
            pool = ThreadPoolExecutor(max_workers=workers)
        for s in range(spec.steps):
            if spec.step_transits is not None:
                T = _build_transit_array(spec, states, T, s)
            f = sizes[s]
            out = np.full((R, T.shape[1] * f), SENTINEL, dtype=np.int64)
            if fast:
                nf, nd = _run_fast_step(g, T, out, seed, s, f, uniqs[s],
                                        strategy, pool, workers, maxdeg)
            else:
                nf, nd = _run_generic_step(g, spec, T, out, seed, s, f,
                                           uniqs[s], strategy, states)
            stats.adjacency_fetches += nf
            stats.draws += nd
            stats.per_step_fetches.append(nf)
            transits.append(T)
            outputs.append(out)
            if states is not None:
                for i in range(R):
                    states[i]._transits.append(T[i])
                    states[i]._outputs.append(out[i])
            if s + 1 < spec.steps:
                T = _next_transits(T, out, spec.transit_mode, uniqs[s], R)
    finally:
        if pool is not None:
            pool.shutdown(wait=True)
    stats.wall_time = time.perf_counter() - t0
    ss = SampleSet(spec.spec_id, seed, SamplingType.INDIVIDUAL,
                   spec.transit_mode, roots, uniqs, outputs, transits,
                   derivable_transits=spec.step_transits is None)
    return ss, stats


def default_collective_candidates(g, prev, step):
    """Union of out-neighbors of the previous set; returns
    (CandidateSet, adjacency fetch count)."""
    parts = []
    for v in prev:
        parts.append(np.asarray(g.neighbors(int(v))))
    cands = (np.unique(np.concatenate(parts)) if parts
             else np.empty(0, dtype=np.int64))
    return CandidateSet(cands, None, prev, g), len(parts)


def _execute_collective(g, spec, roots, seed, workers, strategy):
    if spec.collective_next is None:
        raise ConfigError("Collective spec %r has no collective_next"
                          % (spec.spec_id,))
    roots = _as_roots(g, roots)
    sizes, uniqs = _eval_sizes(spec)
    build = spec.collective_candidates or default_collective_candidates
    _, first_idx = np.unique(roots, return_index=True)
    prev = roots[np.sort(first_idx)]
    outputs = []
    transits = []
    stats = AccessStats()
    t0 = time.perf_counter()
    for s in range(spec.steps):
        transits.append(prev.reshape(1, -1))
        quota = sizes[s]
        cand_set, nf = build(g, prev, s)
        stats.adjacency_fetches += nf
        stats.per_step_fetches.append(nf)
        rng = CollectiveRng(seed, s)
        chosen = np.asarray(list(spec.collective_next(cand_set, s, quota, rng)),
                            dtype=np.int64)
        stats.draws += rng.count
        if chosen.size:
            if np.unique(chosen).size != chosen.size:
                raise InvariantError("collective_next returned duplicates at "
                                     "step %d" % (s,))
            cv = cand_set.vertices
            pos = np.searchsorted(cv, chosen)
            ok = (pos < cv.size) & (cv[np.minimum(pos, cv.size - 1)] == chosen)
            if not ok.all():
                raise InvariantError("collective_next chose a non-candidate "
                                     "at step %d" % (s,))
        if chosen.size > quota:
            raise InvariantError("collective_next exceeded quota at step %d"
                                 % (s,))
        row = np.full((1, quota), SENTINEL, dtype=np.int64)
        row[0, :chosen.size] = chosen
        outputs.append(row)
        prev = chosen
    stats.wall_time = time.perf_counter() - t0
    ss = SampleSet(spec.spec_id, seed, SamplingType.COLLECTIVE,
                   spec.transit_mode, roots, uniqs, outputs, transits)
    return ss, stats


def execute_sample_parallel(g, spec, roots, seed, workers=1):
    """Run spec with samples as the unit of parallel work."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if spec.sampling_type is SamplingType.COLLECTIVE:
        return _execute_collective(g, spec, roots, seed, workers,
                                   Strategy.SAMPLE_PARALLEL)
    return _execute_individual(g, spec, roots, seed, workers,
                               Strategy.SAMPLE_PARALLEL)


def execute_transit_parallel(g, spec, roots, seed, workers=1):
    """Run spec with transit groups as the unit of parallel work.

    Produces a SampleSet identical to execute_sample_parallel's for the
    same (g, spec, roots, seed); adjacency_fetches counts one fetch per
    non-skip group per step instead of one per transit occurrence.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if spec.sampling_type is SamplingType.COLLECTIVE:
        return _execute_collective(g, spec, roots, seed, workers,
                                   Strategy.TRANSIT_PARALLEL)
    return _execute_individual(g, spec, roots, seed, workers,
                               Strategy.TRANSIT_PARALLEL)


def run_sampling(g, spec, roots, seed, strategy=Strategy.SAMPLE_PARALLEL,
                 workers=1):
    """Dispatch to the selected executor (collective specs evaluate
    identically under either strategy)."""
    if not isinstance(strategy, Strategy):
        raise ConfigError("unknown strategy %r" % (strategy,))
    if strategy is Strategy.SAMPLE_PARALLEL:
        return execute_sample_parallel(g, spec, roots, seed, workers)
    return execute_transit_parallel(g, spec, roots, seed, workers)


def build_transit_groups(sample_set, step, spec=None):
    """Transit groups for one step of a (possibly in-progress)
    SampleSet: one group per distinct transit vertex ordered by id,
    members (sample, output-slot) ordered within, and a final skip
    group holding the slots of SENTINEL transits."""
    if step >= len(sample_set.transits):
        raise ValueError("step %d not yet executed" % (step,))
    T = sample_set.transits[step]
    w = T.shape[1]
    f = (int(spec.sample_size(step)) if spec is not None
         else sample_set.step_slots(step) // w)
    groups = []
    g_transit, g_start, mem_s, mem_t = _group_step(T)
    for gix in range(len(g_transit)):
        members = []
        for m in range(g_start[gix], g_start[gix + 1]):
            base = int(mem_t[m]) * f
            members.extend((int(mem_s[m]), base + j) for j in range(f))
        groups.append(TransitGroup(int(g_transit[gix]), tuple(members)))
    si, st = np.nonzero(T < 0)
    if si.size:
        members = []
        for i, tidx in zip(si, st):
            base = int(tidx) * f
            members.extend((int(i), base + j) for j in range(f))
        groups.append(TransitGroup(SENTINEL, tuple(members)))
    return groups


def _u32_rows(arr):
    if arr.size and arr.max() >= _SENTINEL_U32:
        raise FormatError("vertex id too large for the u32 dump format")
    return arr.astype(np.uint32)


def _sampleset_bytes(ss):
    out = bytearray()
    spec_id = ss.spec_id.encode("utf-8")
    mode = 1 if ss.transit_mode == TRANSITS_CUMULATIVE else 0
    if not ss.derivable_transits:
        mode |= 2
    out += struct.pack("<4sI", _SAMPLESET_MAGIC, FORMAT_VERSION)
    out += struct.pack("<BBQ", 1 if ss.sampling_type is SamplingType.COLLECTIVE
                       else 0, mode, ss.seed & 0xFFFFFFFFFFFFFFFF)
    out += struct.pack("<IQQ", len(ss.outputs), ss.num_samples, ss.roots.size)
    out += struct.pack("<I", len(spec_id)) + spec_id
    for s in range(len(ss.outputs)):
        out += struct.pack("<IB", ss.outputs[s].shape[1],
                           1 if ss.unique_flags[s] else 0)
    out += _u32_rows(ss.roots).tobytes()
    for arr in ss.outputs:
        out += _u32_rows(arr).tobytes()
    if not ss.derivable_transits:
        # custom step_transits cannot be replayed from the flags alone,
        # so the dump carries the transit arrays explicitly
        for T in ss.transits:
            out += struct.pack("<I", T.shape[1])
        for T in ss.transits:
            out += _u32_rows(T).tobytes()
    return bytes(out)


def save_sampleset(ss, path):
    with open(path, "wb") as fh:
        fh.write(ss.to_bytes())


def _from_u32(raw):
    arr = raw.astype(np.int64)
    arr[arr == _SENTINEL_U32] = SENTINEL
    return arr


def load_sampleset(path):
    """Read a KSMP dump and rebuild the SampleSet, including the
    per-step transit arrays implied by the stored flags."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        magic, version = struct.unpack_from("<4sI", data, 0)
        if magic != _SAMPLESET_MAGIC:
            raise FormatError("%s: not a sample set (bad magic)" % (path,))
        if version != FORMAT_VERSION:
            raise FormatError("%s: unsupported version %d" % (path, version))
        coll, mode_byte, seed = struct.unpack_from("<BBQ", data, 8)
        steps, num_rows, num_roots = struct.unpack_from("<IQQ", data, 18)
        off = 38
        (id_len,) = struct.unpack_from("<I", data, off)
        off += 4
        spec_id = data[off:off + id_len].decode("utf-8")
        off += id_len
        slots = []
        uniqs = []
        for _ in range(steps):
            w, u = struct.unpack_from("<IB", data, off)
            off += 5
            slots.append(w)
            uniqs.append(bool(u))
        roots = _from_u32(np.frombuffer(data, dtype="<u4", count=num_roots,
                                        offset=off))
        off += 4 * num_roots
        outputs = []
        for s in range(steps):
            cnt = num_rows * slots[s]
            arr = _from_u32(np.frombuffer(data, dtype="<u4", count=cnt,
                                          offset=off))
            outputs.append(arr.reshape(num_rows, slots[s]))
            off += 4 * cnt
        custom = bool(mode_byte & 2)
        stored_transits = None
        if custom:
            widths = []
            for _ in range(steps):
                (w,) = struct.unpack_from("<I", data, off)
                off += 4
                widths.append(w)
            stored_transits = []
            for s in range(steps):
                cnt = num_rows * widths[s]
                arr = _from_u32(np.frombuffer(data, dtype="<u4", count=cnt,
                                              offset=off))
                stored_transits.append(arr.reshape(num_rows, widths[s]))
                off += 4 * cnt
        if off != len(data):
            raise FormatError("%s: trailing bytes after sample data" % (path,))
    except (struct.error, ValueError) as exc:
        raise FormatError("%s: truncated sample set (%s)" % (path, exc)) from None
    mode = TRANSITS_CUMULATIVE if mode_byte & 1 else TRANSITS_PREV
    transits = []
    if coll:
        _, first_idx = np.unique(roots, return_index=True)
        prev = roots[np.sort(first_idx)]
        for s in range(steps):
            transits.append(prev.reshape(1, -1))
            vals = outputs[s][0]
            prev = vals[vals >= 0]
        stype = SamplingType.COLLECTIVE
    elif custom:
        transits = stored_transits
        stype = SamplingType.INDIVIDUAL
    else:
        T = roots.reshape(-1, 1)
        for s in range(steps):
            transits.append(T)
            if s + 1 < steps:
                T = _next_transits(T, outputs[s], mode, uniqs[s], num_rows)
        stype = SamplingType.INDIVIDUAL
    return SampleSet(spec_id, seed, stype, mode, roots, uniqs, outputs,
                     transits, derivable_transits=not custom)
