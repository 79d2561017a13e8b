"""Graph layers shared by the solvers: mean-aggregating convolution, single-head
attention, and trainable node embeddings, all built on the autodiff tape."""

import math

import numpy as np

from .autodiff import Tensor, gather_rows

__all__ = [
    "feature_dims",
    "init_weight",
    "NodeEmbedding",
    "embedding_init",
    "GcnLayer",
    "gcn_forward",
    "GatLayer",
    "gat_forward",
    "gat_attention",
    "mean_adjacency",
    "attention_mask",
]

_ACTIVATIONS = ("elu", "relu", "sigmoid", "identity")


def _ceil_sqrt(n):
    s = math.isqrt(n)
    return s if s * s == n else s + 1


def _ceil_cbrt(n):
    c = round(n ** (1.0 / 3.0))
    while c ** 3 < n:
        c += 1
    while (c - 1) ** 3 >= n:
        c -= 1
    return c


def feature_dims(n):
    """Layer widths from the node count: d1 = ceil(sqrt(n)) below 1e5, else
    ceil(cbrt(n)); d2 = ceil(d1 / 2)."""
    if n < 1:
        raise ValueError("node count must be positive")
    d1 = _ceil_cbrt(n) if n >= 10 ** 5 else _ceil_sqrt(n)
    return d1, (d1 + 1) // 2


def init_weight(rng, rows, cols, fan_in=None, name=""):
    """Trainable tensor with uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)]."""
    fan = cols if fan_in is None else fan_in
    bound = 1.0 / math.sqrt(max(fan, 1))
    data = rng.uniform(-bound, bound, size=(rows, cols))
    return Tensor(data, requires_grad=True, name=name)


class NodeEmbedding:
    """Trainable n x d1 table of node feature vectors."""

    def __init__(self, table):
        self.table = table

    @property
    def n(self):
        return self.table.shape[0]

    def params(self):
        return [self.table]


def embedding_init(n, d1, seed_or_rng):
    rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) \
        else np.random.default_rng(seed_or_rng)
    return NodeEmbedding(init_weight(rng, n, d1, fan_in=d1, name="embedding"))


def mean_adjacency(g):
    """Row-normalized adjacency: row v holds 1/deg(v) at v's neighbors.
    Degree-0 rows stay zero, so the neighbor aggregate of an isolated node is zero."""
    a = np.zeros((g.n, g.n))
    for v, nbrs in enumerate(g.adjacency):
        if nbrs:
            a[v, list(nbrs)] = 1.0 / len(nbrs)
    return a


def attention_mask(g):
    """Boolean n x n mask of neighbors plus self, the attention support set."""
    mask = np.eye(g.n, dtype=bool)
    for v, nbrs in enumerate(g.adjacency):
        mask[v, list(nbrs)] = True
    return mask


class GcnLayer:
    """Convolution h_v = act(W (mean of neighbor features) + B h_v).

    W and B are out_dim x in_dim trainable matrices.
    """

    def __init__(self, in_dim, out_dim, activation, rng, name="gcn"):
        if activation not in _ACTIVATIONS:
            raise ValueError(f"activation must be one of {_ACTIVATIONS}")
        self.W = init_weight(rng, out_dim, in_dim, name=f"{name}.W")
        self.B = init_weight(rng, out_dim, in_dim, name=f"{name}.B")
        self.activation = activation

    def params(self):
        return [self.W, self.B]


def _activate(x, kind):
    if kind == "elu":
        return x.elu()
    if kind == "relu":
        return x.relu()
    if kind == "sigmoid":
        return x.sigmoid()
    return x


def gcn_forward(layer, a_mean, h_in):
    """Apply a GcnLayer; a_mean is the (constant) row-normalized adjacency tensor."""
    if a_mean.shape[1] != h_in.shape[0]:
        raise ValueError("gcn_forward: adjacency and feature row counts differ")
    out = (a_mean @ h_in) @ layer.W.t() + h_in @ layer.B.t()
    return _activate(out, layer.activation)


class GatLayer:
    """Single-head graph attention.

    Theta is out_dim x in_dim; z is the length-2*out_dim attention vector,
    applied to the concatenated transformed pair with a LeakyReLU(0.2) before
    the softmax. Softmax is normalized over N(v) plus v itself so the self
    coefficient is defined.
    """

    def __init__(self, in_dim, out_dim, rng, name="gat", leaky_slope=0.2):
        self.theta = init_weight(rng, out_dim, in_dim, name=f"{name}.theta")
        self.z = init_weight(rng, 2 * out_dim, 1, fan_in=2 * out_dim, name=f"{name}.z")
        self.leaky_slope = leaky_slope
        self.out_dim = out_dim

    def params(self):
        return [self.theta, self.z]


def gat_attention(layer, mask, h_in):
    """(attention matrix A, transformed features G); A rows sum to 1 on the mask."""
    n = h_in.shape[0]
    if mask.shape != (n, n):
        raise ValueError("gat_attention: mask shape mismatch")
    d = layer.out_dim
    g_feat = h_in @ layer.theta.t()
    z_self = gather_rows(layer.z, range(d))
    z_other = gather_rows(layer.z, range(d, 2 * d))
    s_self = g_feat @ z_self   # contribution of the row (attending) node
    s_other = g_feat @ z_other  # contribution of the column (attended) node
    ones_row = Tensor(np.ones((1, n)))
    ones_col = Tensor(np.ones((n, 1)))
    logits = (s_self @ ones_row + ones_col @ s_other.t()).leaky_relu(layer.leaky_slope)
    # mask then shift by the per-row max (a constant: softmax is shift-invariant)
    off = np.where(mask, 0.0, -1e30)
    masked = logits * Tensor(mask.astype(float)) + Tensor(off)
    row_max = masked.data.max(axis=1, keepdims=True)
    shifted = masked + Tensor(np.repeat(-row_max, n, axis=1))
    weights = shifted.exp()
    denom = (weights @ ones_col) @ ones_row
    return weights / denom, g_feat


def gat_forward(layer, mask, h_in):
    """Apply a GatLayer; mask is attention_mask(g) (neighbors plus self)."""
    attn, g_feat = gat_attention(layer, mask, h_in)
    return attn @ g_feat
