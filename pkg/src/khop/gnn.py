"""Reference GNN used to validate sampling output.

Layer k computes h_v = act(W_k . concat(h_v, a_v)) where a_v is the
mean of the previous layer's values over v's neighbors (zero vector
when there are none).  ReLU everywhere except the last layer.  The
whole-graph forward pass is the ground truth the mini-batch forward
pass is checked against.
"""

import struct

import numpy as np

from . import kernels
from .errors import FormatError
from .prf import (FORMAT_VERSION, STREAM_FEATURES, STREAM_WEIGHTS,
                  derive_stream, prf_draw)

_FEA_MAGIC = b"KFEA"


class Model:
    """Weight stack: weights[k] has shape (dims[k+1], 2 * dims[k])."""

    __slots__ = ("dims", "weights")

    def __init__(self, dims, weights):
        self.dims = tuple(int(d) for d in dims)
        self.weights = list(weights)
        if len(self.weights) != len(self.dims) - 1:
            raise ValueError("need one weight matrix per layer")
        for k, w in enumerate(self.weights):
            want = (self.dims[k + 1], 2 * self.dims[k])
            if w.shape != want:
                raise ValueError("layer %d weight shape %s, expected %s"
                                 % (k, w.shape, want))

    @property
    def num_layers(self):
        return len(self.weights)


def init_model(dims, seed, zero=False):
    """Deterministic weights in [-0.1, 0.1), one draw per entry keyed by
    (layer, row, col).  zero=True gives all-zero weights (test hook)."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise ValueError("need at least input and output dims")
    if any(d < 1 for d in dims):
        raise ValueError("layer dims must be >= 1")
    stream = derive_stream(seed, STREAM_WEIGHTS)
    scale = 1 << 24
    weights = []
    for k in range(len(dims) - 1):
        rows, cols = dims[k + 1], 2 * dims[k]
        w = np.zeros((rows, cols), dtype=np.float64)
        if not zero:
            for r in range(rows):
                for c in range(cols):
                    u = prf_draw(stream, k, r, c, scale)
                    w[r, c] = u / scale * 0.2 - 0.1
        weights.append(w)
    return Model(dims, weights)


def _layer(h, agg, w, last):
    z = np.concatenate([h, agg], axis=1) @ w.T
    return z if last else np.maximum(z, 0.0)


def forward_full(g, x, model):
    """Whole-graph forward pass; returns (num_vertices, dims[-1])."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != g.num_vertices:
        raise ValueError("features must be (num_vertices, dim)")
    if x.shape[1] != model.dims[0]:
        raise ValueError("feature dim %d, model expects %d"
                         % (x.shape[1], model.dims[0]))
    h = x
    for k, w in enumerate(model.weights):
        agg = kernels.csr_mean_aggregate(g.row_offsets, g.col_indices, h)
        h = _layer(h, agg, w, last=(k == model.num_layers - 1))
    return h


def forward_minibatch(mb, x_gather, model):
    """Mini-batch forward pass over the batch's blocks.

    x_gather holds input features for mb.local_to_global, one row per
    local id.  Returns one row per target, in target order.
    """
    x_gather = np.asarray(x_gather, dtype=np.float64)
    if x_gather.ndim != 2 or x_gather.shape[0] != mb.num_input_vertices:
        raise ValueError("x_gather must be (num_input_vertices, dim)")
    if x_gather.shape[1] != model.dims[0]:
        raise ValueError("feature dim %d, model expects %d"
                         % (x_gather.shape[1], model.dims[0]))
    if mb.num_layers != model.num_layers:
        raise ValueError("batch has %d layers, model %d"
                         % (mb.num_layers, model.num_layers))
    h = x_gather
    for k, blk in enumerate(reversed(mb.layers)):
        agg = kernels.arc_mean_aggregate(blk.src, blk.dst, h, blk.num_dst)
        h = _layer(h[:blk.num_dst], agg, model.weights[k],
                   last=(k == model.num_layers - 1))
    lookup = {int(v): i for i, v in enumerate(mb.local_to_global)}
    rows = np.array([lookup[int(t)] for t in mb.targets], dtype=np.int64)
    return h[rows]


def features_random(n, dim, seed):
    """Deterministic features in [0, 1), keyed per (row, col)."""
    if n < 1 or dim < 1:
        raise ValueError("need n >= 1 and dim >= 1")
    stream = derive_stream(seed, STREAM_FEATURES)
    scale = 1 << 53
    x = np.empty((n, dim), dtype=np.float64)
    for r in range(n):
        for c in range(dim):
            x[r, c] = prf_draw(stream, 0, r, c, scale) / scale
    return x


def features_onehot(n):
    return np.eye(n, dtype=np.float64)


def save_features(x, path):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("features must be 2-D")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIQI", _FEA_MAGIC, FORMAT_VERSION,
                             x.shape[0], x.shape[1]))
        fh.write(x.astype("<f8").tobytes())


def load_features(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    head = struct.calcsize("<4sIQI")
    if len(blob) < head:
        raise FormatError("%s: truncated feature file" % (path,))
    magic, version, rows, dim = struct.unpack_from("<4sIQI", blob, 0)
    if magic != _FEA_MAGIC:
        raise FormatError("%s: bad magic %r" % (path, magic))
    if version != FORMAT_VERSION:
        raise FormatError("%s: unsupported version %d" % (path, version))
    if len(blob) != head + rows * dim * 8:
        raise FormatError("%s: size mismatch" % (path,))
    x = np.frombuffer(blob, dtype="<f8", offset=head).reshape(rows, dim)
    return x.astype(np.float64)
