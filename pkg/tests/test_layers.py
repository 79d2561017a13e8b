import numpy as np
import pytest

from qubograd import Graph, generate_graph
from qubograd.autodiff import Tensor, finite_diff_check
from qubograd.layers import (
    GatLayer,
    GcnLayer,
    attention_mask,
    embedding_init,
    feature_dims,
    gat_attention,
    gat_forward,
    gcn_forward,
    mean_adjacency,
)

K3 = Graph(3, [(0, 1), (0, 2), (1, 2)])


@pytest.mark.parametrize("n,d1,d2", [(50, 8, 4), (3000, 55, 28), (2, 2, 1), (100, 10, 5)])
def test_feature_dims_below_threshold(n, d1, d2):
    assert feature_dims(n) == (d1, d2)


def test_feature_dims_switches_to_cube_root():
    d1, d2 = feature_dims(10 ** 5)
    assert d1 == 47 and d2 == 24
    assert feature_dims(10 ** 5 - 1)[0] == 317


def test_embedding_is_seed_deterministic():
    a = embedding_init(50, 8, 7).table.data
    b = embedding_init(50, 8, 7).table.data
    assert (a == b).all()


def _zeroed(layer):
    for p in layer.params():
        p.data[:] = 0.0
    return layer


def test_gcn_zero_weights_sigmoid_gives_half():
    rng = np.random.default_rng(0)
    layer = _zeroed(GcnLayer(3, 2, "sigmoid", rng))
    out = gcn_forward(layer, Tensor(mean_adjacency(K3)), Tensor(np.ones((3, 3))))
    assert (out.data == 0.5).all()


def test_gcn_identity_weights_average_neighbors():
    rng = np.random.default_rng(0)
    layer = GcnLayer(3, 3, "identity", rng)
    layer.W.data[:] = np.eye(3)
    layer.B.data[:] = 0.0
    out = gcn_forward(layer, Tensor(mean_adjacency(K3)), Tensor(np.eye(3)))
    assert np.allclose(out.data[0], [0.0, 0.5, 0.5])
    assert np.allclose(out.data[1], [0.5, 0.0, 0.5])


def test_gcn_isolated_node_gets_zero_neighbor_term():
    g = Graph(3, [(0, 1)])  # node 2 isolated
    rng = np.random.default_rng(0)
    layer = GcnLayer(3, 3, "identity", rng)
    layer.W.data[:] = np.eye(3)
    layer.B.data[:] = 0.0
    out = gcn_forward(layer, Tensor(mean_adjacency(g)), Tensor(np.eye(3)))
    assert (out.data[2] == 0.0).all()


def test_gat_zero_attention_vector_is_uniform():
    rng = np.random.default_rng(0)
    layer = GatLayer(3, 2, rng)
    layer.z.data[:] = 0.0
    attn, _ = gat_attention(layer, attention_mask(K3), Tensor(np.eye(3)))
    assert np.allclose(attn.data, np.full((3, 3), 1.0 / 3.0))


def test_gat_rows_sum_to_one():
    rng = np.random.default_rng(3)
    g = generate_graph(8, 14, 5)
    layer = GatLayer(4, 3, rng)
    attn, _ = gat_attention(layer, attention_mask(g), Tensor(rng.normal(size=(8, 4))))
    assert (attn.data >= 0).all()
    assert np.allclose(attn.data.sum(axis=1), 1.0, atol=1e-12)
    assert (attn.data[~attention_mask(g)] == 0.0).all()


def test_gat_two_node_closed_form():
    g = Graph(2, [(0, 1)])
    rng = np.random.default_rng(0)
    layer = GatLayer(1, 1, rng)
    layer.theta.data[:] = 1.0
    z1, z2 = 0.7, -1.3
    layer.z.data[:] = np.array([[z1], [z2]])
    a, b = 0.4, -0.9
    h = Tensor(np.array([[a], [b]]))
    attn, _ = gat_attention(layer, attention_mask(g), h)

    def leaky(x):
        return x if x > 0 else 0.2 * x

    logits0 = np.array([leaky(z1 * a + z2 * a), leaky(z1 * a + z2 * b)])
    expected0 = np.exp(logits0) / np.exp(logits0).sum()
    assert np.allclose(attn.data[0], expected0, atol=1e-12)


def test_gat_output_includes_self_term():
    g = Graph(2, [(0, 1)])
    rng = np.random.default_rng(0)
    layer = GatLayer(1, 1, rng)
    layer.theta.data[:] = 2.0
    layer.z.data[:] = 0.0  # uniform attention over self and neighbor
    h = Tensor(np.array([[1.0], [3.0]]))
    out = gat_forward(layer, attention_mask(g), h)
    assert np.allclose(out.data, [[0.5 * 2.0 + 0.5 * 6.0], [0.5 * 6.0 + 0.5 * 2.0]])


def test_layer_gradients_match_finite_differences():
    g = generate_graph(6, 9, 2)
    rng = np.random.default_rng(4)
    h = Tensor(rng.normal(size=(6, 3)), requires_grad=True)
    gcn = GcnLayer(3, 2, "elu", rng)
    a_mean = Tensor(mean_adjacency(g))
    err = finite_diff_check(lambda: gcn_forward(gcn, a_mean, h).tanh().sum(),
                            gcn.params() + [h])
    assert err < 1e-4
    gat = GatLayer(3, 2, rng)
    mask = attention_mask(g)
    err = finite_diff_check(lambda: gat_forward(gat, mask, h).tanh().sum(),
                            gat.params() + [h])
    assert err < 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_layers_are_permutation_equivariant(seed):
    rng = np.random.default_rng(seed)
    g = generate_graph(8, 13, seed)
    perm = rng.permutation(8)
    g_perm = Graph(8, [(min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in g.edges])
    h = rng.normal(size=(8, 3))

    gcn = GcnLayer(3, 3, "elu", np.random.default_rng(99))
    out = gcn_forward(gcn, Tensor(mean_adjacency(g)), Tensor(h)).data
    out_perm = gcn_forward(gcn, Tensor(mean_adjacency(g_perm)), Tensor(h[np.argsort(perm)])).data
    assert np.allclose(out_perm, out[np.argsort(perm)], atol=1e-12)

    gat = GatLayer(3, 3, np.random.default_rng(98))
    out = gat_forward(gat, attention_mask(g), Tensor(h)).data
    out_perm = gat_forward(gat, attention_mask(g_perm), Tensor(h[np.argsort(perm)])).data
    assert np.allclose(out_perm, out[np.argsort(perm)], atol=1e-12)
