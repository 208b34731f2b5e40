"""Sampling-algorithm catalogue.

Each algorithm is expressed as a SamplingSpec over the engine (khop,
random walk, FastGCN, LADIES) or as a batcher producing vertex sets
(ClusterGCN, GraphSAINT random walk).
"""

from dataclasses import dataclass

import numpy as np

from .engine import (CandidateSet, SamplingSpec, SamplingType, Strategy,
                     TRANSITS_CUMULATIVE, run_sampling)
from .errors import ConfigError
from .prf import STREAM_ROOTS, STREAM_SHUFFLE, derive_stream, prf_draw


@dataclass(frozen=True)
class LayerQuota:
    """Per-layer vertex quotas, outermost first."""

    sizes: tuple

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not self.sizes:
            raise ConfigError("quotas must be non-empty")
        if any(s < 1 for s in self.sizes):
            raise ConfigError("layer quotas must be >= 1")

    def __len__(self):
        return len(self.sizes)


def _as_quota(quotas):
    return quotas if isinstance(quotas, LayerQuota) else LayerQuota(tuple(quotas))


def khop_spec(fanouts, unique=False):
    """Uniform neighbor sampling, fanouts[s] draws per transit at step
    s, transits = previous step's outputs (the root at step 0).

    With-replacement by default; unique=True switches to
    without-replacement draws per transit with duplicate collapse when
    forming the next step's transits (used by the exhaustive oracle).
    """
    fo = tuple(int(f) for f in fanouts)
    if not fo:
        raise ConfigError("fanouts must be non-empty")
    if any(f < 1 for f in fo):
        raise ConfigError("fanouts must be >= 1")
    return SamplingSpec(
        steps=len(fo),
        sample_size=fo.__getitem__,
        unique=lambda step, u=bool(unique): u,
        spec_id="khop-unique" if unique else "khop")


def exhaustive_spec(g, num_layers):
    """khop variant whose samples provably cover the full num_layers-hop
    neighborhood: fanout = max degree, without-replacement draws, and
    cumulative transits so every frontier vertex (including the root)
    is expanded at every step.  This is the mini-batch oracle's
    sampler."""
    if num_layers < 1:
        raise ConfigError("num_layers must be >= 1")
    f = max(1, g.max_degree())
    return SamplingSpec(
        steps=int(num_layers),
        sample_size=lambda s: f,
        unique=lambda s: True,
        transit_mode=TRANSITS_CUMULATIVE,
        spec_id="khop-exhaustive")


def random_walk_spec(length):
    """Length-step walk: one draw per step, transit = previous vertex,
    SENTINEL tail after a dead end."""
    if length < 1:
        raise ConfigError("walk length must be >= 1")
    return SamplingSpec(
        steps=int(length),
        sample_size=lambda s: 1,
        spec_id="walk")


def weighted_sample_without_replacement(vertices, weights, quota, draw):
    """quota distinct draws proportional to weights, by repeated
    cumulative-sum draws with rejection of duplicates.

    Takes all candidates (ascending) when quota covers them.  Only
    positive-weight entries are drawable; if they run out early the
    result is short.
    """
    vertices = np.asarray(vertices, dtype=np.int64)
    if quota >= vertices.size:
        return vertices.copy()
    if weights is None:
        weights = np.ones(vertices.size, dtype=np.int64)
    ws = np.asarray(weights, dtype=np.int64)
    pos = ws > 0
    vs = vertices[pos]
    cum = np.cumsum(ws[pos])
    total = int(cum[-1]) if cum.size else 0
    chosen = []
    seen = set()
    while len(chosen) < quota and len(seen) < vs.size and total > 0:
        r = draw(total)
        idx = int(np.searchsorted(cum, r, side="right"))
        v = int(vs[idx])
        if v not in seen:
            seen.add(v)
            chosen.append(v)
    return np.array(chosen, dtype=np.int64)


def fastgcn_spec(quotas, g):
    """Layer-wise sampling with layers drawn independently from all of
    V, weighted by out-degree squared (precomputed once)."""
    q = _as_quota(quotas)
    n = g.num_vertices
    if any(s > n for s in q.sizes):
        raise ConfigError("layer quota exceeds num_vertices (%d)" % (n,))
    deg = g.out_degrees().astype(np.int64)
    weights = deg * deg
    verts = np.arange(n, dtype=np.int64)

    def candidates(graph, prev, step):
        return CandidateSet(verts, weights, prev, graph), 0

    def cnext(cands, step, quota, rng):
        return weighted_sample_without_replacement(
            cands.vertices, cands.weights, quota, rng)

    return SamplingSpec(
        steps=len(q),
        sample_size=q.sizes.__getitem__,
        sampling_type=SamplingType.COLLECTIVE,
        collective_next=cnext,
        collective_candidates=candidates,
        spec_id="fastgcn")


def ladies_spec(quotas):
    """Layer-dependent sampling: candidates are the union of the upper
    layer's out-neighbors, weighted by each candidate's arc count into
    the upper set; candidates with no arc into it are excluded."""
    q = _as_quota(quotas)

    def candidates(graph, prev, step):
        fetches = 0
        parts = []
        for v in prev:
            parts.append(np.asarray(graph.neighbors(int(v))))
            fetches += 1
        if parts:
            cand = np.unique(np.concatenate(parts))
        else:
            cand = np.empty(0, dtype=np.int64)
        prev_sorted = np.sort(np.asarray(prev, dtype=np.int64))
        weights = np.zeros(cand.size, dtype=np.int64)
        for k, u in enumerate(cand):
            nbrs = graph.neighbors(int(u))
            fetches += 1
            p = np.searchsorted(prev_sorted, nbrs)
            hit = (p < prev_sorted.size) & \
                  (prev_sorted[np.minimum(p, prev_sorted.size - 1)] == nbrs)
            weights[k] = int(hit.sum())
        keep = weights > 0
        return CandidateSet(cand[keep], weights[keep], prev, graph), fetches

    def cnext(cands, step, quota, rng):
        return weighted_sample_without_replacement(
            cands.vertices, cands.weights, quota, rng)

    return SamplingSpec(
        steps=len(q),
        sample_size=q.sizes.__getitem__,
        sampling_type=SamplingType.COLLECTIVE,
        collective_next=cnext,
        collective_candidates=candidates,
        spec_id="ladies")


def clustergcn_batches(assign, clusters_per_batch, seed):
    """Shuffle part ids deterministically by seed, then emit consecutive
    groups of clusters_per_batch clusters as vertex sets (the last
    batch may be smaller).  Every cluster lands in exactly one batch."""
    p = assign.num_parts
    if not 1 <= clusters_per_batch <= p:
        raise ConfigError("clusters_per_batch must lie in [1, %d], got %d"
                          % (p, clusters_per_batch))
    order = list(range(p))
    stream = derive_stream(seed, STREAM_SHUFFLE)
    for i in range(p - 1, 0, -1):
        j = prf_draw(stream, 0, 0, i, i + 1)
        order[i], order[j] = order[j], order[i]
    batches = []
    for lo in range(0, p, clusters_per_batch):
        group = order[lo:lo + clusters_per_batch]
        batches.append(np.flatnonzero(np.isin(assign.part_of, group)))
    return batches


def graphsaint_rw_spec(num_roots, walk_length):
    """Batcher: picks num_roots roots uniformly, walks walk_length steps
    from each, and returns the union of roots and visited vertices as
    one subgraph vertex set (ascending)."""
    if num_roots < 1:
        raise ConfigError("num_roots must be >= 1")
    walk = random_walk_spec(walk_length)

    def batcher(g, seed, strategy=Strategy.SAMPLE_PARALLEL, workers=1):
        n = g.num_vertices
        stream = derive_stream(seed, STREAM_ROOTS)
        roots = np.array([prf_draw(stream, 0, 0, i, n)
                          for i in range(num_roots)], dtype=np.int64)
        ss, _ = run_sampling(g, walk, roots, seed, strategy, workers)
        verts = set(int(r) for r in roots)
        for out in ss.outputs:
            verts.update(int(v) for v in out[out >= 0].ravel())
        return np.array(sorted(verts), dtype=np.int64)

    return batcher
