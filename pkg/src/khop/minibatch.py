"""Mini-batch assembly.

Turns a SampleSet into per-layer bipartite blocks over batch-local
vertex ids, ready for a layered forward pass: layer k aggregates from
the step-k sampled vertices (sources) into that step's transits
(destinations).
"""

import struct

import numpy as np

from .engine import SamplingType
from .errors import FormatError
from .prf import FORMAT_VERSION

_MAGIC = b"KMBB"


class Block:
    """One layer's arcs as (src, dst) pairs over local ids, sorted by
    (dst, src) with multiplicity kept."""

    __slots__ = ("src", "dst", "num_src", "num_dst")

    def __init__(self, src, dst, num_src, num_dst):
        src = np.ascontiguousarray(src, dtype=np.int64)
        dst = np.ascontiguousarray(dst, dtype=np.int64)
        if src.shape != dst.shape or src.ndim != 1:
            raise ValueError("src and dst must be 1-D arrays of equal length")
        if src.size and (src.min() < 0 or src.max() >= num_src):
            raise ValueError("block src id out of range")
        if dst.size and (dst.min() < 0 or dst.max() >= num_dst):
            raise ValueError("block dst id out of range")
        for arr in (src, dst):
            if arr.flags.writeable:
                arr.flags.writeable = False
        self.src = src
        self.dst = dst
        self.num_src = int(num_src)
        self.num_dst = int(num_dst)

    @property
    def num_arcs(self):
        return self.src.size

    def equals(self, other):
        return (self.num_src == other.num_src
                and self.num_dst == other.num_dst
                and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst))


class MiniBatch:
    """Layered blocks (outermost first), the global ids behind the local
    numbering, and the batch's target vertices."""

    __slots__ = ("targets", "layers", "local_to_global")

    def __init__(self, targets, layers, local_to_global):
        self.targets = np.ascontiguousarray(targets, dtype=np.int64)
        self.layers = list(layers)
        self.local_to_global = np.ascontiguousarray(local_to_global,
                                                    dtype=np.int64)
        for arr in (self.targets, self.local_to_global):
            if arr.flags.writeable:
                arr.flags.writeable = False
        if not self.layers:
            raise ValueError("a mini-batch needs at least one layer")
        if self.local_to_global.size != self.layers[-1].num_src:
            raise ValueError("local_to_global must cover the innermost layer")

    @property
    def num_layers(self):
        return len(self.layers)

    @property
    def num_input_vertices(self):
        """Distinct vertices whose input features the batch gathers."""
        return self.local_to_global.size

    def layer_sizes(self):
        """Vertex-set sizes per level: [targets, ..., inputs]."""
        sizes = [blk.num_dst for blk in self.layers]
        sizes.append(self.layers[-1].num_src)
        return sizes

    def layer_vertices(self, level):
        """Global ids of the level-th vertex set (0 = targets' set)."""
        return self.local_to_global[:self.layer_sizes()[level]]

    def equals(self, other):
        return (np.array_equal(self.targets, other.targets)
                and np.array_equal(self.local_to_global,
                                   other.local_to_global)
                and len(self.layers) == len(other.layers)
                and all(a.equals(b)
                        for a, b in zip(self.layers, other.layers)))


def _assemble_individual(sample_set, group):
    loc = {}
    ltg = []

    def add(v):
        if v not in loc:
            loc[v] = len(ltg)
            ltg.append(v)

    targets = [int(sample_set.roots[i]) for i in group]
    for r in targets:
        add(r)
    sizes = [len(ltg)]
    raw = []
    for s in range(sample_set.steps):
        out = sample_set.outputs[s][group]
        tr = sample_set.transits[s][group]
        f = out.shape[1] // tr.shape[1]
        live = out >= 0
        for v in np.unique(out[live]):
            add(int(v))
        sizes.append(len(ltg))
        src_g = out[live]
        dst_g = np.repeat(tr, f, axis=1)[live]
        raw.append((src_g, dst_g))
    lookup = np.full(int(max(ltg)) + 1 if ltg else 1, -1, dtype=np.int64)
    for v, k in loc.items():
        lookup[v] = k
    layers = []
    for s, (src_g, dst_g) in enumerate(raw):
        src = lookup[src_g]
        dst = lookup[dst_g]
        order = np.lexsort((src, dst))
        layers.append(Block(src[order], dst[order],
                            num_src=sizes[s + 1], num_dst=sizes[s]))
    return MiniBatch(np.array(targets, dtype=np.int64), layers,
                     np.array(ltg, dtype=np.int64))


def _assemble_collective(sample_set, g):
    roots = sample_set.roots
    _, first = np.unique(roots, return_index=True)
    targets = roots.copy()
    loc = {}
    ltg = []

    def add(v):
        if v not in loc:
            loc[v] = len(ltg)
            ltg.append(v)

    for v in roots[np.sort(first)]:
        add(int(v))
    sizes = [len(ltg)]
    levels = [list(ltg)]
    for s in range(sample_set.steps):
        row = sample_set.outputs[s][0]
        for v in np.unique(row[row >= 0]):
            add(int(v))
        sizes.append(len(ltg))
        levels.append(list(ltg))
    layers = []
    for s in range(sample_set.steps):
        upper = levels[s][:sizes[s]]
        inner = np.array(levels[s + 1][:sizes[s + 1]], dtype=np.int64)
        inner_sorted = np.sort(inner)
        src_l = []
        dst_l = []
        for v in upper:
            nbrs = np.asarray(g.neighbors(int(v)))
            p = np.searchsorted(inner_sorted, nbrs)
            hit = (p < inner_sorted.size) & \
                  (inner_sorted[np.minimum(p, inner_sorted.size - 1)] == nbrs)
            for u in nbrs[hit]:
                src_l.append(loc[int(u)])
                dst_l.append(loc[int(v)])
        src = np.array(src_l, dtype=np.int64)
        dst = np.array(dst_l, dtype=np.int64)
        order = np.lexsort((src, dst))
        layers.append(Block(src[order], dst[order],
                            num_src=sizes[s + 1], num_dst=sizes[s]))
    return MiniBatch(targets, layers, np.array(ltg, dtype=np.int64))


def assemble(sample_set, g, num_layers, batch_size=1):
    """Build mini-batches from a SampleSet, batch_size samples each.

    Individual sampling emits exactly the sampled (drawn -> transit)
    arcs per step; collective sampling connects consecutive layer
    vertex sets with every graph arc between them.  Returns a list of
    MiniBatch, samples grouped in order.
    """
    if sample_set.steps != num_layers:
        raise ValueError("sample set has %d steps, expected %d layers"
                         % (sample_set.steps, num_layers))
    if sample_set.sampling_type is SamplingType.COLLECTIVE:
        return [_assemble_collective(sample_set, g)]
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    n = sample_set.num_samples
    batches = []
    for lo in range(0, n, batch_size):
        group = np.arange(lo, min(lo + batch_size, n))
        batches.append(_assemble_individual(sample_set, group))
    return batches


class ReplicationReport:
    """Input replication across batches plus per-level recomputation."""

    __slots__ = ("factor", "recomputed")

    def __init__(self, factor, recomputed):
        self.factor = float(factor)
        self.recomputed = list(recomputed)


def replication_factor(batches, g=None):
    """Sum of per-batch input sizes over distinct inputs overall.

    recomputed[k] counts vertices whose level-k vertex set (0 = inputs,
    deepest first) appears in two or more batches, i.e. whose layer-k
    activation is computed repeatedly.
    """
    if not batches:
        raise ValueError("need at least one batch")
    total = 0
    union = set()
    for mb in batches:
        total += mb.num_input_vertices
        union.update(int(v) for v in mb.local_to_global)
    levels = max(mb.num_layers for mb in batches) + 1
    recomputed = []
    for k in range(levels):
        counts = {}
        for mb in batches:
            level = mb.num_layers - k
            if level < 0:
                continue
            for v in mb.layer_vertices(level):
                counts[int(v)] = counts.get(int(v), 0) + 1
        recomputed.append(sum(1 for c in counts.values() if c >= 2))
    return ReplicationReport(total / len(union), recomputed)


def export_minibatch(mb, path):
    """Write a mini-batch block file plus a small text manifest beside
    it (path + ".manifest.txt")."""
    parts = [struct.pack("<4sI", _MAGIC, FORMAT_VERSION),
             struct.pack("<I", mb.num_layers)]
    for blk in mb.layers:
        parts.append(struct.pack("<IIQ", blk.num_src, blk.num_dst,
                                 blk.num_arcs))
        pairs = np.empty((blk.num_arcs, 2), dtype=np.uint32)
        pairs[:, 0] = blk.src
        pairs[:, 1] = blk.dst
        parts.append(pairs.tobytes())
    parts.append(struct.pack("<Q", mb.local_to_global.size))
    parts.append(mb.local_to_global.astype(np.uint32).tobytes())
    parts.append(struct.pack("<I", mb.targets.size))
    parts.append(mb.targets.astype(np.uint32).tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))
    sizes = mb.layer_sizes()
    lines = ["targets %d" % mb.targets.size,
             "layers %d" % mb.num_layers,
             "input_vertices %d" % mb.num_input_vertices]
    for k, blk in enumerate(mb.layers):
        lines.append("layer %d dst %d src %d arcs %d"
                     % (k, blk.num_dst, blk.num_src, blk.num_arcs))
    lines.append("level_sizes %s" % " ".join(str(s) for s in sizes))
    with open(str(path) + ".manifest.txt", "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_minibatch(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    off = 0

    def take(fmt):
        nonlocal off
        size = struct.calcsize(fmt)
        if off + size > len(blob):
            raise FormatError("%s: truncated block file" % (path,))
        vals = struct.unpack_from(fmt, blob, off)
        off += size
        return vals

    magic, version = take("<4sI")
    if magic != _MAGIC:
        raise FormatError("%s: bad magic %r" % (path, magic))
    if version != FORMAT_VERSION:
        raise FormatError("%s: unsupported version %d" % (path, version))
    (num_layers,) = take("<I")
    layers = []
    for _ in range(num_layers):
        num_src, num_dst, num_arcs = take("<IIQ")
        need = num_arcs * 8
        if off + need > len(blob):
            raise FormatError("%s: truncated arc section" % (path,))
        pairs = np.frombuffer(blob, dtype=np.uint32, count=num_arcs * 2,
                              offset=off).reshape(num_arcs, 2)
        off += need
        layers.append(Block(pairs[:, 0].astype(np.int64),
                            pairs[:, 1].astype(np.int64),
                            num_src=num_src, num_dst=num_dst))
    (num_local,) = take("<Q")
    if off + num_local * 4 > len(blob):
        raise FormatError("%s: truncated id section" % (path,))
    ltg = np.frombuffer(blob, dtype=np.uint32, count=num_local,
                        offset=off).astype(np.int64)
    off += num_local * 4
    (num_targets,) = take("<I")
    if off + num_targets * 4 != len(blob):
        raise FormatError("%s: trailing bytes" % (path,))
    targets = np.frombuffer(blob, dtype=np.uint32, count=num_targets,
                            offset=off).astype(np.int64)
    return MiniBatch(targets, layers, ltg)
