import numpy as np
import pytest

from khop.algorithms import (LayerQuota, clustergcn_batches, exhaustive_spec,
                             fastgcn_spec, graphsaint_rw_spec, khop_spec,
                             ladies_spec, random_walk_spec,
                             weighted_sample_without_replacement)
from khop.engine import SamplingType, Strategy, run_sampling
from khop.errors import ConfigError
from khop.graph import from_edges, partition_bfs


def _sym(n, pairs):
    edges = list(pairs) + [(b, a) for a, b in pairs]
    return from_edges(n, edges)


def test_khop_spec_fields():
    spec = khop_spec([25, 10])
    assert spec.steps == 2
    assert spec.sample_size(0) == 25
    assert spec.sample_size(1) == 10
    assert spec.unique(0) is False and spec.unique(1) is False
    assert spec.sampling_type is SamplingType.INDIVIDUAL
    assert spec.transit_mode == "prev"
    assert spec.next is None and spec.step_transits is None
    uspec = khop_spec([5], unique=True)
    assert uspec.unique(0) is True
    with pytest.raises(ConfigError):
        khop_spec([])
    with pytest.raises(ConfigError):
        khop_spec([3, 0])


def test_khop_chain():
    g = from_edges(3, [(0, 1), (1, 2)])
    ss, _ = run_sampling(g, khop_spec([1, 1]), [0], seed=2)
    assert ss.outputs[0].tolist() == [[1]]
    assert ss.outputs[1].tolist() == [[2]]


def test_exhaustive_spec_shape():
    g = _sym(4, [(0, 1), (1, 2), (2, 3)])
    spec = exhaustive_spec(g, 2)
    assert spec.steps == 2
    assert spec.transit_mode == "cumulative"
    assert spec.unique(0) and spec.unique(1)
    assert spec.sample_size(0) == g.max_degree()
    with pytest.raises(ConfigError):
        exhaustive_spec(g, 0)


def test_exhaustive_covers_two_hop_ball():
    g = _sym(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    ss, _ = run_sampling(g, exhaustive_spec(g, 2), [0], seed=7)
    assert ss.sample_vertices(0).tolist() == [0, 1, 2]


def test_walk_cycle_and_dead_end():
    cyc = from_edges(3, [(0, 1), (1, 2), (2, 0)])
    ss, _ = run_sampling(cyc, random_walk_spec(3), [0], seed=5)
    assert [int(o[0, 0]) for o in ss.outputs] == [1, 2, 0]
    dead = from_edges(2, [(0, 1)])
    ss, st = run_sampling(dead, random_walk_spec(3), [1], seed=5)
    assert [int(o[0, 0]) for o in ss.outputs] == [-1, -1, -1]
    assert st.adjacency_fetches == 1
    with pytest.raises(ConfigError):
        random_walk_spec(0)


def test_walk_alternates_on_single_edge():
    g = _sym(2, [(0, 1)])
    ss, _ = run_sampling(g, random_walk_spec(4), [1], seed=3)
    assert [int(o[0, 0]) for o in ss.outputs] == [0, 1, 0, 1]


def test_layer_quota():
    q = LayerQuota([4, 2])
    assert len(q) == 2 and q.sizes == (4, 2)
    with pytest.raises(ConfigError):
        LayerQuota([])
    with pytest.raises(ConfigError):
        LayerQuota([1, 0])


def test_fastgcn_quota_and_take_all():
    g = from_edges(5, [(0, 1), (1, 2), (2, 3), (1, 0), (2, 1), (3, 2)])
    with pytest.raises(ConfigError):
        fastgcn_spec([6], g)
    spec = fastgcn_spec([5, 2], g)
    assert spec.sampling_type is SamplingType.COLLECTIVE
    ss, _ = run_sampling(g, spec, [0, 2], seed=11)
    # quota = n takes all of V, isolated vertex included
    assert ss.outputs[0][0].tolist() == [0, 1, 2, 3, 4]
    row = ss.outputs[1][0]
    live = row[row >= 0]
    assert live.size == 2 and len(set(live.tolist())) == 2
    # isolated vertex 4 has weight 0 and is never drawn under quota
    assert 4 not in set(live.tolist())


def test_fastgcn_weight_ratio():
    # degree-2 center vs degree-1 leaves: weights 4:1:1, center ~2/3
    g = _sym(4, [(1, 0), (1, 2)])
    spec = fastgcn_spec([1], g)
    hits = 0
    trials = 2000
    for t in range(trials):
        ss, _ = run_sampling(g, spec, [0], seed=40_000 + t)
        if int(ss.outputs[0][0, 0]) == 1:
            hits += 1
    assert abs(hits / trials - 4 / 6) < 0.05, hits / trials


def test_ladies_weights_and_containment():
    g = _sym(5, [(1, 3), (2, 3), (1, 4)])
    spec = ladies_spec([1])
    c3 = 0
    trials = 2000
    for t in range(trials):
        ss, _ = run_sampling(g, spec, [1, 2], seed=50_000 + t)
        v = int(ss.outputs[0][0, 0])
        assert v in (3, 4)  # always a neighbor of the previous layer
        if v == 3:
            c3 += 1
    assert abs(c3 / trials - 2 / 3) < 0.05, c3 / trials


def test_ladies_take_all_and_empty():
    g = _sym(5, [(1, 3), (2, 3), (1, 4)])
    ss, _ = run_sampling(g, ladies_spec([5]), [1, 2], seed=9)
    row = ss.outputs[0][0]
    assert row[row >= 0].tolist() == [3, 4]
    iso = from_edges(3, [(1, 2)])
    ss, _ = run_sampling(iso, ladies_spec([2]), [0], seed=9)
    assert (ss.outputs[0][0] == -1).all()


def test_weighted_wor_helper():
    vs = np.array([7, 8, 9], dtype=np.int64)
    ws = np.array([0, 5, 0], dtype=np.int64)
    got = weighted_sample_without_replacement(vs, ws, 2, lambda b: 0)
    assert got.tolist() == [8]
    assert weighted_sample_without_replacement(vs, ws, 3, None).tolist() \
        == [7, 8, 9]
    draws = iter([0, 2])
    uni = weighted_sample_without_replacement(
        vs, None, 2, lambda bound: next(draws))
    assert uni.tolist() == [7, 9]


def test_clustergcn_cover_and_determinism():
    g = _sym(12, [(i, i + 1) for i in range(11)])
    assign = partition_bfs(g, 4)
    batches = clustergcn_batches(assign, 2, seed=21)
    assert len(batches) == 2
    assert np.array_equal(np.sort(np.concatenate(batches)), np.arange(12))
    again = clustergcn_batches(assign, 2, seed=21)
    assert all(np.array_equal(a, b) for a, b in zip(batches, again))
    tail = clustergcn_batches(assign, 3, seed=21)
    assert len(tail) == 2
    assert len(tail[0]) + len(tail[1]) == 12
    with pytest.raises(ConfigError):
        clustergcn_batches(assign, 0, seed=1)
    with pytest.raises(ConfigError):
        clustergcn_batches(assign, 5, seed=1)


def test_graphsaint_batcher():
    g = _sym(20, [(i, i + 1) for i in range(19)])
    batcher = graphsaint_rw_spec(4, 3)
    a = batcher(g, seed=77)
    b = batcher(g, seed=77)
    assert np.array_equal(a, b)
    assert np.all(np.diff(a) > 0)
    assert 4 <= a.size <= 4 * 4
    c = batcher(g, seed=78, strategy=Strategy.TRANSIT_PARALLEL, workers=3)
    d = batcher(g, seed=78)
    assert np.array_equal(c, d)
    with pytest.raises(ConfigError):
        graphsaint_rw_spec(0, 2)
    with pytest.raises(ConfigError):
        graphsaint_rw_spec(2, 0)
