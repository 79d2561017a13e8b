import numpy as np
import pytest

from qubograd import Graph, GrlQuboSolver, build_maxcut_qubo, cut_size, generate_graph, hamiltonian
from qubograd.autodiff import Tensor
from qubograd.solvers.grl import (
    EncoderDecoderModel,
    EpisodeStep,
    EpisodeTrace,
    attention_score,
    decode_episode,
    incremental_reward,
    policy_loss,
)

K3 = Graph(3, [(0, 1), (0, 2), (1, 2)])
Q3 = build_maxcut_qubo(K3)


def zeroed_model(g, clip_c=10.0):
    model = EncoderDecoderModel(g, np.random.default_rng(0), clip_c=clip_c)
    for p in model.params():
        p.data[:] = 0.0
    return model


def test_zero_weights_give_half_probabilities():
    model = zeroed_model(K3)
    _, p0 = model.encode()
    assert (p0.data == 0.5).all()


def test_encoder_output_width_follows_sizing_rule():
    g = generate_graph(50, 89, 1)
    model = EncoderDecoderModel(g, np.random.default_rng(0))
    h, p0 = model.encode()
    assert h.shape == (50, 4)
    assert p0.shape == (50, 1)


def test_encoder_is_permutation_equivariant():
    rng = np.random.default_rng(5)
    g = generate_graph(8, 13, 4)
    perm = rng.permutation(8)
    inv = np.argsort(perm)
    g_perm = Graph(8, [(min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in g.edges])

    a = EncoderDecoderModel(g, np.random.default_rng(1))
    b = EncoderDecoderModel(g_perm, np.random.default_rng(2))
    for p, q in zip(a.params(), b.params()):
        q.data[:] = p.data
    b.embedding.table.data[:] = a.embedding.table.data[inv]
    b.phi3.data[:] = a.phi3.data[:, inv]

    ha, _ = a.encode()
    hb, _ = b.encode()
    assert np.allclose(hb.data, ha.data[inv], atol=1e-10)


def test_attention_score_zero_weights():
    model = zeroed_model(K3)
    h, _ = model.encode()
    alpha = attention_score(model, h, np.zeros(3, dtype=bool), 0)
    assert alpha.item() == 0.0
    assert alpha.sigmoid().item() == 0.5


def test_attention_score_is_clipped_by_c():
    rng = np.random.default_rng(9)
    g = generate_graph(8, 13, 4)
    model = EncoderDecoderModel(g, rng, clip_c=10.0)
    for p in model.params():
        p.data[:] = rng.normal(scale=5.0, size=p.data.shape)
    h, _ = model.encode()
    labeled = np.zeros(8, dtype=bool)
    labeled[[1, 5]] = True
    for i in range(8):
        if not labeled[i]:
            assert abs(attention_score(model, h, labeled, i).item()) <= 10.0


def test_attention_score_two_node_closed_form():
    g = Graph(2, [(0, 1)])
    model = EncoderDecoderModel(g, np.random.default_rng(0))  # d2 = d_h = 1
    phi1, phi2, phi3 = 0.8, -0.6, 0.35
    model.phi1.data[:] = phi1
    model.phi2.data[:] = phi2
    model.phi3.data[:] = np.array([[phi3, 0.0]])
    h = Tensor(np.array([[0.9], [-0.4]]))
    labeled = np.array([True, False])
    expected = 10.0 * np.tanh((-0.4 * phi1) * (1.0 * phi3 + 0.9 * phi2) / 1.0)
    assert attention_score(model, h, labeled, 1).item() == pytest.approx(expected, abs=1e-12)


def test_incremental_rewards_on_k3_sequence():
    labels = np.zeros(3, dtype=np.int8)
    labeled = np.zeros(3, dtype=bool)
    rewards = []
    for node, lab in [(0, 1), (1, 0), (2, 0)]:
        labels[node] = lab
        labeled[node] = True
        rewards.append(incremental_reward(Q3, labels, labeled, node))
    assert rewards == [-2.0, 0.0, 0.0]
    assert sum(rewards) == hamiltonian(Q3, labels)


def test_first_label_zero_has_zero_reward():
    labels = np.zeros(5, dtype=np.int8)
    labeled = np.zeros(5, dtype=bool)
    labeled[3] = True
    q = build_maxcut_qubo(generate_graph(5, 7, 1))
    assert incremental_reward(q, labels, labeled, 3) == 0.0


def test_zero_decoder_weights_label_everything_one():
    model = zeroed_model(K3)
    h, p0 = model.encode()
    trace = decode_episode(model, h, p0, K3, Q3)
    assert (trace.labels == 1).all()
    assert [s.prob for s in trace.steps] == [0.5, 0.5, 0.5]
    assert cut_size(K3, trace.labels) == 0
    assert trace.steps[0].node == 0  # tie broken to the lowest index


def test_single_node_episode():
    g = Graph(1, [])
    q = build_maxcut_qubo(g)
    model = zeroed_model(g)
    h, p0 = model.encode()
    trace = decode_episode(model, h, p0, g, q)
    assert len(trace.steps) == 1
    assert trace.steps[0].reward == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_every_node_selected_exactly_once(seed):
    g = generate_graph(20, 45, seed)
    q = build_maxcut_qubo(g)
    model = EncoderDecoderModel(g, np.random.default_rng(seed))
    h, p0 = model.encode()
    trace = decode_episode(model, h, p0, g, q, check_heap=True)
    assert sorted(s.node for s in trace.steps) == list(range(20))


@pytest.mark.parametrize("seed", range(10))
def test_rewards_telescope_to_the_hamiltonian(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 30))
    m = int(rng.integers(n - 1, min(n * (n - 1) // 2, 3 * n) + 1))
    g = generate_graph(n, m, seed)
    q = build_maxcut_qubo(g)
    model = EncoderDecoderModel(g, rng)
    h, p0 = model.encode()
    trace = decode_episode(model, h, p0, g, q)
    assert sum(trace.rewards) == hamiltonian(q, trace.labels)
    assert all(0.0 < s.prob < 1.0 for s in trace.steps)


def test_policy_loss_arithmetic():
    steps = [
        EpisodeStep(0, 1, -1.0, 0.5, Tensor([[0.5]])),
        EpisodeStep(1, 1, 2.0, 0.25, Tensor([[0.25]])),
    ]
    assert policy_loss(EpisodeTrace(steps, np.array([1, 1]))).item() == 0.0
    zero = [EpisodeStep(0, 1, 0.0, 0.9, Tensor([[0.9]]))]
    assert policy_loss(EpisodeTrace(zero, np.array([1]))).item() == 0.0


def test_policy_loss_log_variant():
    steps = [EpisodeStep(0, 1, 2.0, 0.5, Tensor([[0.5]]))]
    loss = policy_loss(EpisodeTrace(steps, np.array([1])), log_prob=True)
    assert loss.item() == pytest.approx(2.0 * np.log(0.5), abs=1e-12)


def fast_solver(**kw):
    defaults = dict(lr=1e-2, patience=40, max_epochs=300)
    defaults.update(kw)
    return GrlQuboSolver(**defaults)


def test_single_edge_is_solved_on_most_seeds():
    g = Graph(2, [(0, 1)])
    wins = sum(fast_solver(seed=s).fit(g).cut_ == 1 for s in range(10))
    assert wins >= 9


def test_k3_reaches_the_optimum_on_most_seeds():
    wins = sum(fast_solver(seed=s).fit(K3).cut_ == 2 for s in range(10))
    assert wins > 5


def test_best_cut_trace_is_monotone_and_reported_cut_matches():
    g = generate_graph(15, 30, 3)
    s = fast_solver(seed=2, patience=25, max_epochs=150).fit(g)
    assert s.cut_ == cut_size(g, s.labels_)
    best = s.trace_.best_cuts
    assert all(a <= b for a, b in zip(best, best[1:]))
    assert best[-1] == s.cut_


def test_runs_are_bit_reproducible():
    g = generate_graph(12, 20, 6)
    a = fast_solver(seed=4, patience=20, max_epochs=80).fit(g)
    b = fast_solver(seed=4, patience=20, max_epochs=80).fit(g)
    assert (a.labels_ == b.labels_).all()
    assert a.trace_.cuts == b.trace_.cuts


def test_trace_csv_layout(tmp_path):
    s = fast_solver(seed=0, patience=5, max_epochs=20).fit(K3)
    path = tmp_path / "trace.csv"
    s.export_trace(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "epoch,best_cut,episode_cut"
    assert len(lines) == s.epochs_ + 1
