"""Relaxed-objective GNN solver: train a two-layer graph convolution stack on the
differentiable QUBO objective, then threshold the node probabilities.

The relaxation replaces binary x_i by probabilities p_i. Binary variables are
idempotent (x_i^2 = x_i), so the diagonal contributes Q_ii p_i linearly while
the i < j terms stay bilinear; the resulting scalar is exactly the expected
objective under independent Bernoulli(p) labels.
"""

import time

import numpy as np

from ..autodiff import Adam, Tensor, dropout
from ..graphs import cut_size
from ..layers import GcnLayer, embedding_init, feature_dims, gcn_forward, init_weight, mean_adjacency
from ..qubo import build_maxcut_qubo, hamiltonian
from ..stopping import StoppingPolicy, TrainTrace, should_stop
from ..validation import ensure_graph, ensure_probabilities
from .base import GraphSolver

__all__ = ["qubo_relaxed_loss", "project", "PignnSolver", "ProbabilityModel"]


def _loss_constants(q):
    if "loss_consts" not in q._cache:
        q._cache["loss_consts"] = (Tensor(q.strict_upper()), Tensor(q.diagonal().reshape(-1, 1)))
    return q._cache["loss_consts"]


def qubo_relaxed_loss(p, q):
    """Differentiable objective sum_{i<j} Q_ij p_i p_j + sum_i Q_ii p_i.

    p is an n x 1 probability tensor on the tape; Q enters as constants.
    """
    if p.shape != (q.n, 1):
        raise ValueError(f"probability tensor has shape {p.shape}, expected ({q.n}, 1)")
    upper, diag = _loss_constants(q)
    return p.t() @ (upper @ p) + diag.t() @ p


def project(p, beta=0.5):
    """Threshold probabilities to labels: x_i = 1 iff p_i >= beta."""
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    p = np.asarray(p, dtype=np.float64).ravel()
    return (p >= beta).astype(np.int8)


class ProbabilityModel:
    """Embedding -> GCN(d1, elu) -> dropout -> GCN(d2) -> linear head -> sigmoid."""

    def __init__(self, g, rng, dropout_rate=0.0):
        d1, d2 = feature_dims(g.n)
        self.embedding = embedding_init(g.n, d1, rng)
        self.gcn1 = GcnLayer(d1, d1, "elu", rng, name="gcn1")
        self.gcn2 = GcnLayer(d1, d2, "identity", rng, name="gcn2")
        self.head = init_weight(rng, 1, d2, name="head")
        self.a_mean = Tensor(mean_adjacency(g))
        self.dropout_rate = dropout_rate

    def params(self):
        return self.embedding.params() + self.gcn1.params() + self.gcn2.params() + [self.head]

    def forward(self, rng, train=True):
        h = gcn_forward(self.gcn1, self.a_mean, self.embedding.table)
        h = dropout(h, self.dropout_rate, rng, train=train)
        h = gcn_forward(self.gcn2, self.a_mean, h)
        return (h @ self.head.t()).sigmoid()


class PignnSolver(GraphSolver):
    """Probability-relaxation solver with configurable early stopping.

    Each restart trains a fresh model; the restart with the largest projected
    cut wins. The reported cut is always recomputed from the returned labels,
    never read off the relaxed objective.
    """

    def __init__(self, lr=1e-4, patience=100, stopping="fuzzy", tol=1e-4,
                 max_epochs=100_000, dropout_rate=0.0, restarts=1, beta=0.5, seed=0):
        self.lr = lr
        self.patience = patience
        self.stopping = stopping
        self.tol = tol
        self.max_epochs = max_epochs
        self.dropout_rate = dropout_rate
        self.restarts = restarts
        self.beta = beta
        self.seed = seed

    def fit(self, graph):
        g = ensure_graph(graph)
        q = build_maxcut_qubo(g)
        policy = StoppingPolicy(self.stopping, self.patience, self.tol)
        streams = np.random.SeedSequence(self.seed).spawn(self.restarts)
        best = None
        t0 = time.perf_counter()
        for stream in streams:
            run = self._train_once(g, q, policy, np.random.default_rng(stream))
            if best is None or run[1] > best[1]:
                best = run
        self.time_s_ = time.perf_counter() - t0
        labels, cut, trace = best
        if cut != -hamiltonian(q, labels):
            raise AssertionError("projected cut disagrees with the Hamiltonian")
        self.labels_ = labels
        self.cut_ = cut
        self.probabilities_ = ensure_probabilities(trace.snapshot, g.n)
        self.trace_ = trace
        self.epochs_ = trace.epochs
        trace.time_s = self.time_s_
        return self

    def _train_once(self, g, q, policy, rng):
        model = ProbabilityModel(g, rng, dropout_rate=self.dropout_rate)
        opt = Adam(model.params(), lr=self.lr)
        trace = TrainTrace()
        for _ in range(self.max_epochs):
            p = model.forward(rng)
            loss = qubo_relaxed_loss(p, q)
            trace.record(loss.item(), snapshot=p.data.ravel())
            # projected cut per epoch, for reward-variation traces only
            trace.cuts.append(cut_size(g, project(p.data, self.beta)))
            if should_stop(policy, trace):
                break
            opt.zero_grad()
            loss.backward()
            opt.step()
        labels = project(trace.snapshot, self.beta)
        return labels, cut_size(g, labels), trace

    def _trace_csv(self):
        lines = ["epoch,loss"]
        lines.extend(f"{e},{v!r}" for e, v in enumerate(self.trace_.losses, start=1))
        return "\n".join(lines) + "\n"
