"""Immutable CSR graph storage, loading, partitioning, and subgraphs.

Graphs are directed internally; undirected inputs are stored as two
arcs.  Neighbor lists are kept sorted ascending (canonical form), so
loading, caching, and reloading are idempotent.
"""

import re
import struct

import numpy as np

from .errors import FormatError
from .prf import FORMAT_VERSION

_CACHE_MAGIC = b"KHOP"
_HEADER_RE = re.compile(r"n\s+(\d+)$")


class Graph:
    """Directed graph in compressed sparse row form.

    row_offsets has length num_vertices + 1; col_indices holds each
    vertex's out-neighbors sorted ascending.  Instances are immutable:
    the backing arrays are marked read-only at construction.
    """

    __slots__ = ("row_offsets", "col_indices", "_degrees")

    def __init__(self, row_offsets, col_indices):
        ro = np.ascontiguousarray(row_offsets, dtype=np.int64)
        ci = np.ascontiguousarray(col_indices, dtype=np.int64)
        if ro.ndim != 1 or ci.ndim != 1 or ro.size < 1:
            raise ValueError("row_offsets and col_indices must be 1-D, row_offsets non-empty")
        if ro[0] != 0 or ro[-1] != ci.size or np.any(np.diff(ro) < 0):
            raise ValueError("row_offsets must be non-decreasing from 0 to num_arcs")
        n = ro.size - 1
        if ci.size and (ci.min() < 0 or ci.max() >= n):
            raise ValueError("col_indices entries must be valid vertex ids")
        ro.flags.writeable = False
        ci.flags.writeable = False
        self.row_offsets = ro
        self.col_indices = ci
        degs = np.diff(ro)
        degs.flags.writeable = False
        self._degrees = degs

    @property
    def num_vertices(self):
        return self.row_offsets.size - 1

    @property
    def num_arcs(self):
        return int(self.col_indices.size)

    def neighbors(self, v):
        """Out-neighbors of v, sorted ascending (read-only view)."""
        n = self.num_vertices
        if not 0 <= v < n:
            raise IndexError("vertex id %d out of range [0, %d)" % (v, n))
        return self.col_indices[self.row_offsets[v]:self.row_offsets[v + 1]]

    def out_degree(self, v):
        if not 0 <= v < self.num_vertices:
            raise IndexError("vertex id %d out of range" % (v,))
        return int(self._degrees[v])

    def out_degrees(self):
        return self._degrees

    def max_degree(self):
        return int(self._degrees.max()) if self.num_vertices else 0

    def __repr__(self):
        return "Graph(num_vertices=%d, num_arcs=%d)" % (self.num_vertices, self.num_arcs)


class PartitionAssignment:
    """Disjoint cover of V: part_of[v] is the part id of vertex v."""

    __slots__ = ("part_of", "num_parts")

    def __init__(self, part_of, num_parts):
        part_of = np.ascontiguousarray(part_of, dtype=np.int64)
        if part_of.size and (part_of.min() < 0 or part_of.max() >= num_parts):
            raise ValueError("part ids must lie in [0, num_parts)")
        part_of.flags.writeable = False
        self.part_of = part_of
        self.num_parts = int(num_parts)

    def part_vertices(self, p):
        """Vertices of part p, ascending."""
        if not 0 <= p < self.num_parts:
            raise IndexError("part id %d out of range" % (p,))
        return np.flatnonzero(self.part_of == p)


def from_edges(num_vertices, edges, dedup=False):
    """Build a canonical Graph from an iterable/array of (src, dst) arcs.

    Arcs are taken as given (call twice-mirrored for undirected input);
    duplicates are kept unless dedup is set.  Self-loops are permitted.
    """
    n = int(num_vertices)
    if n < 0:
        raise ValueError("num_vertices must be non-negative")
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                   dtype=np.int64)
    if e.size == 0:
        e = e.reshape(0, 2)
    if e.ndim != 2 or e.shape[1] != 2:
        raise ValueError("edges must be pairs")
    if e.size and (e.min() < 0 or e.max() >= n):
        raise ValueError("edge endpoints must be valid vertex ids")
    order = np.lexsort((e[:, 1], e[:, 0]))
    e = e[order]
    if dedup and len(e):
        keep = np.ones(len(e), dtype=bool)
        keep[1:] = np.any(e[1:] != e[:-1], axis=1)
        e = e[keep]
    ro = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(e[:, 0], minlength=n), out=ro[1:])
    return Graph(ro, e[:, 1])


def load_edge_list(path, directed=False, dedup=False):
    """Parse a whitespace-separated edge list.

    Lines starting with '#' are comments; an optional '#n <count>'
    header fixes the vertex count (required for trailing isolated
    vertices).  Without a header the count is 1 + the largest id seen.
    """
    header = None
    us = []
    vs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _HEADER_RE.match(line[1:].strip())
                if m and header is None:
                    header = int(m.group(1))
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FormatError("%s:%d: expected two vertex ids, got %r"
                                  % (path, lineno, line))
            try:
                u = int(parts[0])
                v = int(parts[1])
            except ValueError:
                raise FormatError("%s:%d: non-integer vertex id in %r"
                                  % (path, lineno, line)) from None
            if u < 0 or v < 0:
                raise FormatError("%s:%d: negative vertex id in %r"
                                  % (path, lineno, line))
            us.append(u)
            vs.append(v)
    max_seen = max(max(us), max(vs)) + 1 if us else 0
    if header is not None:
        if header < max_seen:
            raise FormatError("%s: header '#n %d' smaller than largest id %d"
                              % (path, header, max_seen - 1))
        n = header
    else:
        n = max_seen
    e = np.array([us, vs], dtype=np.int64).T.reshape(-1, 2)
    if not directed and len(e):
        e = np.concatenate([e, e[:, ::-1]], axis=0)
    return from_edges(n, e, dedup=dedup)


def save_cache(g, path):
    """Write the binary CSR cache (bit-exact round trip)."""
    n = g.num_vertices
    if n > 0xFFFFFFFF:
        raise FormatError("cache format limits vertex ids to 32 bits")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sI", _CACHE_MAGIC, FORMAT_VERSION))
        fh.write(struct.pack("<QQ", n, g.num_arcs))
        fh.write(g.row_offsets.astype("<u8").tobytes())
        fh.write(g.col_indices.astype("<u4").tobytes())


def load_cache(path):
    with open(path, "rb") as fh:
        head = fh.read(24)
        if len(head) < 4 or head[:4] != _CACHE_MAGIC:
            raise FormatError("%s: not a graph cache (bad magic)" % (path,))
        if len(head) < 24:
            raise FormatError("%s: truncated cache header" % (path,))
        version, n, m = struct.unpack("<IQQ", head[4:])
        if version != FORMAT_VERSION:
            raise FormatError("%s: unsupported cache version %d (expected %d)"
                              % (path, version, FORMAT_VERSION))
        ro_bytes = fh.read(8 * (n + 1))
        ci_bytes = fh.read(4 * m)
        if len(ro_bytes) != 8 * (n + 1) or len(ci_bytes) != 4 * m or fh.read(1):
            raise FormatError("%s: truncated or oversized cache" % (path,))
    ro = np.frombuffer(ro_bytes, dtype="<u8").astype(np.int64)
    ci = np.frombuffer(ci_bytes, dtype="<u4").astype(np.int64)
    return Graph(ro, ci)


def is_cache_file(path):
    """True if path starts with the binary cache magic."""
    try:
        with open(path, "rb") as fh:
            return fh.read(4) == _CACHE_MAGIC
    except OSError:
        return False


def partition_bfs(g, k):
    """Deterministic multi-source BFS partition into k parts.

    Seeds are the k highest-degree vertices (ties to the smaller id).
    Frontiers expand level-synchronously in round-robin part order,
    each part claiming the unvisited neighbors of its current
    frontier.  Vertices no frontier reaches join the smallest part
    (ties to the smaller part id).
    """
    n = g.num_vertices
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= num_vertices, got %d" % (k,))
    degs = g.out_degrees()
    seed_order = np.lexsort((np.arange(n), -degs))
    seeds = seed_order[:k]
    part_of = np.full(n, -1, dtype=np.int64)
    frontiers = []
    for p, s in enumerate(seeds):
        part_of[s] = p
        frontiers.append([int(s)])
    sizes = [1] * k
    while any(frontiers):
        for p in range(k):
            nxt = []
            for v in frontiers[p]:
                for u in g.neighbors(v):
                    if part_of[u] < 0:
                        part_of[u] = p
                        nxt.append(int(u))
            sizes[p] += len(nxt)
            frontiers[p] = nxt
    unreached = np.flatnonzero(part_of < 0)
    for v in unreached:
        p = min(range(k), key=lambda q: (sizes[q], q))
        part_of[v] = p
        sizes[p] += 1
    return PartitionAssignment(part_of, k)


def induced_subgraph(g, vertex_set):
    """Subgraph on vertex_set with dense local ids in ascending
    global-id order; returns (Graph, local_to_global array)."""
    vs = np.unique(np.asarray(list(vertex_set), dtype=np.int64))
    if vs.size == 0:
        raise ValueError("vertex_set must be non-empty")
    if vs[0] < 0 or vs[-1] >= g.num_vertices:
        raise ValueError("vertex_set contains invalid vertex ids")
    edges = []
    for local_v, v in enumerate(vs):
        nbrs = g.neighbors(int(v))
        pos = np.searchsorted(vs, nbrs)
        hit = (pos < vs.size) & (vs[np.minimum(pos, vs.size - 1)] == nbrs)
        for u_local in pos[hit]:
            edges.append((local_v, int(u_local)))
    sub = from_edges(vs.size, np.array(edges, dtype=np.int64).reshape(-1, 2))
    return sub, vs
