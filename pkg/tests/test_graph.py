import numpy as np
import pytest

from khop.errors import FormatError
from khop.graph import (Graph, from_edges, induced_subgraph, is_cache_file,
                        load_cache, load_edge_list, partition_bfs, save_cache)


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_from_edges_triangle():
    g = from_edges(3, [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)])
    assert g.num_vertices == 3
    assert g.num_arcs == 6
    assert g.neighbors(0).tolist() == [1, 2]
    assert g.neighbors(1).tolist() == [0, 2]
    assert g.out_degree(2) == 2
    assert g.max_degree() == 2


def test_neighbors_sorted_and_readonly():
    g = from_edges(4, [(0, 3), (0, 1), (0, 2)])
    nbrs = g.neighbors(0)
    assert nbrs.tolist() == [1, 2, 3]
    with pytest.raises(ValueError):
        nbrs[0] = 9
    with pytest.raises(ValueError):
        g.col_indices[0] = 9


def test_degree_sum_equals_num_arcs():
    rng = np.random.default_rng(0)
    edges = rng.integers(0, 50, size=(400, 2))
    g = from_edges(50, edges)
    assert int(g.out_degrees().sum()) == g.num_arcs == 400


def test_self_loops_and_duplicates():
    g = from_edges(2, [(0, 0), (0, 1), (0, 1)])
    assert g.neighbors(0).tolist() == [0, 1, 1]
    gd = from_edges(2, [(0, 0), (0, 1), (0, 1)], dedup=True)
    assert gd.neighbors(0).tolist() == [0, 1]


def test_from_edges_validation():
    with pytest.raises(ValueError):
        from_edges(2, [(0, 2)])
    with pytest.raises(ValueError):
        from_edges(2, [(-1, 0)])
    g = from_edges(3, [])
    assert g.num_arcs == 0 and g.num_vertices == 3


def test_neighbors_bounds():
    g = from_edges(2, [(0, 1)])
    with pytest.raises(IndexError):
        g.neighbors(2)
    with pytest.raises(IndexError):
        g.neighbors(-1)


def test_load_edge_list_undirected_default(tmp_path):
    p = _write(tmp_path, "g.el", "# comment\n0 1\n1 2\n")
    g = load_edge_list(p)
    assert g.num_vertices == 3
    assert g.num_arcs == 4
    assert g.neighbors(1).tolist() == [0, 2]


def test_load_edge_list_directed_and_header(tmp_path):
    p = _write(tmp_path, "g.el", "#n 5\n0 1\n1 2\n")
    g = load_edge_list(p, directed=True)
    assert g.num_vertices == 5
    assert g.num_arcs == 2
    assert g.neighbors(4).size == 0


def test_load_edge_list_errors(tmp_path):
    bad = _write(tmp_path, "bad.el", "0 1\nnope\n")
    with pytest.raises(FormatError) as err:
        load_edge_list(bad)
    assert ":2:" in str(err.value)
    neg = _write(tmp_path, "neg.el", "0 -1\n")
    with pytest.raises(FormatError):
        load_edge_list(neg)
    short = _write(tmp_path, "short.el", "#n 2\n0 5\n")
    with pytest.raises(FormatError):
        load_edge_list(short)
    lonely = _write(tmp_path, "lonely.el", "0\n")
    with pytest.raises(FormatError):
        load_edge_list(lonely)


def test_cache_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    edges = rng.integers(0, 80, size=(500, 2))
    g = from_edges(80, edges)
    path = str(tmp_path / "g.khop")
    save_cache(g, path)
    assert is_cache_file(path)
    back = load_cache(path)
    assert np.array_equal(back.row_offsets, g.row_offsets)
    assert np.array_equal(back.col_indices, g.col_indices)
    # byte-identical re-save
    path2 = str(tmp_path / "g2.khop")
    save_cache(back, path2)
    assert open(path, "rb").read() == open(path2, "rb").read()


def test_cache_rejects_garbage(tmp_path):
    p = tmp_path / "x.khop"
    p.write_bytes(b"NOPE" + b"\0" * 40)
    assert not is_cache_file(str(p))
    with pytest.raises(FormatError):
        load_cache(str(p))
    q = tmp_path / "t.khop"
    save_cache(from_edges(2, [(0, 1)]), str(q))
    q.write_bytes(q.read_bytes()[:-2])
    with pytest.raises(FormatError):
        load_cache(str(q))


def test_text_cache_reload_identical(tmp_path):
    p = _write(tmp_path, "g.el", "#n 6\n0 1\n2 3\n3 4\n")
    g = load_edge_list(p)
    cache = str(tmp_path / "g.khop")
    save_cache(g, cache)
    back = load_cache(cache)
    assert np.array_equal(back.row_offsets, g.row_offsets)
    assert np.array_equal(back.col_indices, g.col_indices)


def test_partition_k1_and_kn():
    g = from_edges(5, [(0, 1), (1, 0), (3, 4), (4, 3)])
    a = partition_bfs(g, 1)
    assert a.num_parts == 1 and (a.part_of == 0).all()
    b = partition_bfs(g, 5)
    assert sorted(b.part_of.tolist()) == [0, 1, 2, 3, 4]


def test_partition_path_hand_trace():
    edges = [(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2)]
    g = from_edges(4, edges)
    a = partition_bfs(g, 2)
    # seeds are 1 and 2 (highest degree, ties to smaller id)
    assert a.part_of[1] != a.part_of[2]
    assert a.part_of[0] == a.part_of[1]
    assert a.part_of[3] == a.part_of[2]


def test_partition_validation_and_cover():
    g = from_edges(3, [(0, 1)])
    with pytest.raises(ValueError):
        partition_bfs(g, 0)
    with pytest.raises(ValueError):
        partition_bfs(g, 4)
    rng = np.random.default_rng(9)
    for trial in range(3):
        n = int(rng.integers(10, 60))
        edges = rng.integers(0, n, size=(4 * n, 2))
        graph = from_edges(n, edges)
        for k in (1, 2, 7, n):
            assign = partition_bfs(graph, k)
            assert assign.part_of.min() >= 0
            assert assign.part_of.max() < k
            assert assign.part_of.size == n
            got = np.concatenate([assign.part_vertices(p) for p in range(k)])
            assert np.array_equal(np.sort(got), np.arange(n))


def test_partition_unreached_joins_smallest():
    # two seeds with no edges to vertex 4: it joins the smaller part
    g = from_edges(5, [(0, 1), (1, 0), (2, 3), (3, 2)])
    a = partition_bfs(g, 2)
    assert a.part_of[4] in (0, 1)
    sizes = [(a.part_of == p).sum() for p in range(2)]
    assert sorted(sizes) == [2, 3]


def test_induced_examples():
    tri = from_edges(3, [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)])
    sub, ltg = induced_subgraph(tri, {0, 1})
    assert ltg.tolist() == [0, 1]
    assert sub.num_arcs == 2
    assert sub.neighbors(0).tolist() == [1]
    whole, ident = induced_subgraph(tri, range(3))
    assert ident.tolist() == [0, 1, 2]
    assert np.array_equal(whole.col_indices, tri.col_indices)
    star = from_edges(4, [(0, 1), (1, 0), (0, 2), (2, 0), (0, 3), (3, 0)])
    leaves, _ = induced_subgraph(star, {1, 2})
    assert leaves.num_arcs == 0
    with pytest.raises(ValueError):
        induced_subgraph(tri, set())
    with pytest.raises(ValueError):
        induced_subgraph(tri, {0, 9})


def test_induced_brute_force():
    rng = np.random.default_rng(4)
    n = 40
    edges = rng.integers(0, n, size=(300, 2))
    g = from_edges(n, edges, dedup=True)
    keep = np.flatnonzero(rng.random(n) < 0.5)
    sub, ltg = induced_subgraph(g, keep)
    members = set(ltg.tolist())
    got = set()
    for lu in range(sub.num_vertices):
        for lv in sub.neighbors(lu):
            got.add((int(ltg[lu]), int(ltg[int(lv)])))
    want = set()
    for u in range(n):
        for v in g.neighbors(u):
            if u in members and int(v) in members:
                want.add((u, int(v)))
    assert got == want


def test_graph_constructor_validation():
    with pytest.raises(ValueError):
        Graph(np.array([0, 2, 1], dtype=np.int64),
              np.array([0, 0], dtype=np.int64))
