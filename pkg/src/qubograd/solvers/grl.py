"""Policy-gradient encoder-decoder solver with the QUBO increment as its reward.

A three-layer single-head attention encoder produces node features; a clipped
tanh attention decoder greedily labels one node per step. The reward of a step
is the sum of the objective terms completed by that labeling, so the episode
rewards telescope exactly to the final assignment's objective value. The
training loss weights each step's selection probability by its raw reward
(negative is good for Max-Cut); the user-facing reward is the cut size.
"""

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from ..autodiff import Adam, Tensor, gather_rows
from ..graphs import cut_size
from ..layers import GatLayer, attention_mask, embedding_init, feature_dims, gat_forward, init_weight
from ..qubo import build_maxcut_qubo, hamiltonian
from ..stopping import StoppingPolicy, TrainTrace, should_stop
from ..validation import ensure_graph
from .base import GraphSolver

__all__ = [
    "incremental_reward",
    "attention_score",
    "decode_episode",
    "policy_loss",
    "EncoderDecoderModel",
    "EpisodeStep",
    "EpisodeTrace",
    "GrlQuboSolver",
]


def incremental_reward(q, labels, labeled, i):
    """Objective terms completed by labeling node i: those touching i whose
    endpoints are now all labeled (including the Q_ii x_i term)."""
    if not labeled[i]:
        raise AssertionError("reward requested for a node that is not labeled")
    xi = float(labels[i])
    if xi == 0.0:
        return 0.0
    r = q.diagonal()[i] * xi
    for j, c in q.adjacency_terms()[i]:
        if labeled[j]:
            r += c * xi * float(labels[j])
    return float(r)


@dataclass
class EpisodeStep:
    node: int
    label: int
    reward: float
    prob: float  # value of the selection probability P(a^t)
    prob_tensor: object  # the tape node behind prob


@dataclass
class EpisodeTrace:
    steps: list
    labels: np.ndarray

    @property
    def rewards(self):
        return [s.reward for s in self.steps]


class EncoderDecoderModel:
    """Three stacked attention layers, a sigmoid head for the first-node pick,
    and the clipped tanh decoder weights (phi1, phi2 on features, phi3 on the
    labeled-mask vector)."""

    def __init__(self, g, rng, clip_c=10.0):
        d1, d2 = feature_dims(g.n)
        self.n = g.n
        self.d_h = d2
        self.clip_c = float(clip_c)
        if not self.clip_c > 0:
            raise ValueError("clip constant must be positive")
        self.embedding = embedding_init(g.n, d1, rng)
        self.gat1 = GatLayer(d1, d1, rng, name="gat1")
        self.gat2 = GatLayer(d1, d1, rng, name="gat2")
        self.gat3 = GatLayer(d1, d2, rng, name="gat3")
        self.head = init_weight(rng, 1, d2, name="p0_head")
        self.phi1 = init_weight(rng, d2, d2, name="phi1")
        self.phi2 = init_weight(rng, d2, d2, name="phi2")
        self.phi3 = init_weight(rng, d2, g.n, fan_in=g.n, name="phi3")
        self.mask = attention_mask(g)
        self.adj = Tensor(self.mask.astype(float) - np.eye(g.n))  # neighbors only

    def params(self):
        return (self.embedding.params() + self.gat1.params() + self.gat2.params()
                + self.gat3.params() + [self.head, self.phi1, self.phi2, self.phi3])

    def encode(self):
        """(node features H, first-node probabilities p0), both on the tape."""
        h = self.embedding.table
        for layer in (self.gat1, self.gat2, self.gat3):
            h = gat_forward(layer, self.mask, h)
        return h, (h @ self.head.t()).sigmoid()


def attention_score(model, h, labeled, i):
    """Decoder score for unlabeled node i: clip_c * tanh of the scaled dot
    between i's projected features and the labeled-mask-plus-neighbor context.
    Bounded by clip_c; sigmoid of it is the label-1 probability."""
    if labeled[i]:
        raise ValueError(f"node {i} is already labeled")
    xv_row = Tensor(np.asarray(labeled, dtype=np.float64).reshape(1, -1))
    context = xv_row @ model.phi3.t() + gather_rows(model.adj, [i]) @ (h @ model.phi2.t())
    scaled = (gather_rows(h, [i]) @ model.phi1.t()) @ context.t()
    return (scaled * (1.0 / math.sqrt(model.d_h))).tanh() * model.clip_c


def decode_episode(model, h, p0, g, q, beta=0.5, check_heap=False, force_first_one=False):
    """Greedy episode: label every node once, highest attention score first.

    The first node is the most confident entry of p0 (ties to the lowest
    index). Afterwards a max-heap over the scores drives selection, with stale
    entries skipped by version stamps; labeling a node rescores only its
    unlabeled neighbors. Labels follow the threshold beta; the recorded
    selection probability is P_i for label 1 and 1 - P_i for label 0.
    force_first_one pins the first label to 1 (cut symmetry), which the
    trainer uses to escape gradient-free all-zero episodes.
    """
    n = g.n
    labels = np.zeros(n, dtype=np.int8)
    labeled = np.zeros(n, dtype=bool)
    steps = []

    def record(node, prob_tensor, force_one=False):
        p_val = prob_tensor.item()
        label = 1 if force_one or p_val >= beta else 0
        chosen = prob_tensor if label == 1 else 1.0 - prob_tensor
        labels[node] = label
        labeled[node] = True
        r = incremental_reward(q, labels, labeled, node)
        steps.append(EpisodeStep(node, label, r, chosen.item(), chosen))

    p0_flat = p0.data.ravel()
    first = int(np.argmax(np.maximum(p0_flat, 1.0 - p0_flat)))
    record(first, gather_rows(p0, [first]), force_one=force_first_one)

    if n > 1:
        a1 = h @ model.phi1.t()
        s2 = model.adj @ (h @ model.phi2.t())
        inv_scale = 1.0 / math.sqrt(model.d_h)
        xv_term = None
        scores = {}  # node -> (version, value, alpha tensor)
        versions = np.zeros(n, dtype=np.int64)
        heap = []

        def refresh_xv():
            nonlocal xv_term
            xv_row = Tensor(labeled.astype(float).reshape(1, -1))
            xv_term = xv_row @ model.phi3.t()

        def rescore(i):
            context = xv_term + gather_rows(s2, [i])
            alpha = ((gather_rows(a1, [i]) @ context.t()) * inv_scale).tanh() * model.clip_c
            versions[i] += 1
            scores[i] = (versions[i], alpha.item(), alpha)
            heapq.heappush(heap, (-alpha.item(), i, versions[i]))

        refresh_xv()
        for i in range(n):
            if not labeled[i]:
                rescore(i)
        while heap:
            neg_val, node, ver = heapq.heappop(heap)
            if labeled[node] or ver != versions[node]:
                continue  # stale entry
            if check_heap:
                live_max = max(scores[i][1] for i in range(n) if not labeled[i])
                if -neg_val != live_max:
                    raise AssertionError("heap did not return the max attention score")
            record(node, scores[node][2].sigmoid())
            refresh_xv()
            for j in g.adjacency[node]:
                if not labeled[j]:
                    rescore(j)

    if not labeled.all():
        raise AssertionError("episode finished with unlabeled nodes")
    total = sum(s.reward for s in steps)
    if total != hamiltonian(q, labels):
        raise AssertionError("episode rewards do not telescope to the Hamiltonian")
    return EpisodeTrace(steps, labels)


def policy_loss(trace, log_prob=False):
    """Sum over steps of reward times selection probability (log variant optional)."""
    loss = None
    for step in trace.steps:
        term = step.prob_tensor.log() if log_prob else step.prob_tensor
        term = term * step.reward
        loss = term if loss is None else loss + term
    return loss


class GrlQuboSolver(GraphSolver):
    """Encoder-decoder policy-gradient solver.

    One greedy episode per epoch; the best cut ever decoded is the answer.
    Stops when the best cut has not improved for `patience` epochs.
    """

    def __init__(self, lr=1e-3, patience=700, max_epochs=100_000, clip_c=10.0,
                 beta=0.5, log_prob=False, seed=0):
        self.lr = lr
        self.patience = patience
        self.max_epochs = max_epochs
        self.clip_c = clip_c
        self.beta = beta
        self.log_prob = log_prob
        self.seed = seed

    def fit(self, graph):
        g = ensure_graph(graph)
        q = build_maxcut_qubo(g)
        rng = np.random.default_rng(self.seed)
        model = EncoderDecoderModel(g, rng, clip_c=self.clip_c)
        opt = Adam(model.params(), lr=self.lr)
        policy = StoppingPolicy("fuzzy", self.patience)
        trace = TrainTrace()
        t0 = time.perf_counter()
        for _ in range(self.max_epochs):
            h, p0 = model.encode()
            episode = decode_episode(model, h, p0, g, q, beta=self.beta)
            if not episode.labels.any() and g.m > 0:
                # all-zero labels zero out every reward, so the policy loss has
                # no gradient and training would freeze; the complement-symmetric
                # episode with the first label pinned to 1 is learnable
                episode = decode_episode(model, h, p0, g, q, beta=self.beta,
                                         force_first_one=True)
            ep_cut = cut_size(g, episode.labels)
            trace.record(-ep_cut, snapshot=episode.labels)
            trace.cuts.append(ep_cut)
            trace.best_cuts.append(int(-trace.best_loss))
            if should_stop(policy, trace):
                break
            loss = policy_loss(episode, log_prob=self.log_prob)
            opt.zero_grad()
            loss.backward()
            opt.step()
        trace.time_s = time.perf_counter() - t0
        self.labels_ = trace.snapshot.astype(np.int8)
        self.cut_ = cut_size(g, self.labels_)
        if self.cut_ != -trace.best_loss:
            raise AssertionError("best cut bookkeeping diverged from the labels")
        self.trace_ = trace
        self.epochs_ = trace.epochs
        self.time_s_ = trace.time_s
        return self

    def _trace_csv(self):
        lines = ["epoch,best_cut,episode_cut"]
        lines.extend(f"{e},{b},{c}" for e, (b, c) in
                     enumerate(zip(self.trace_.best_cuts, self.trace_.cuts), start=1))
        return "\n".join(lines) + "\n"
