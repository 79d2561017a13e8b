"""Tree search over partial labelings, guided by one shared GNN that is retrained
in every rollout under the leaf's fixed labels.

Fixing labels inside the loss perturbs the surface the shared network descends,
so a single model keeps adapting to many partial solutions instead of settling
into one basin. Node priors and rollout completions both come from the same
network; selection uses an upper confidence bound over accumulated cut rewards.
"""

import math
import time

import numpy as np

from ..autodiff import Adam, Tensor, dropout
from ..graphs import cut_size
from ..layers import GcnLayer, embedding_init, feature_dims, gcn_forward, init_weight, mean_adjacency
from ..qubo import build_maxcut_qubo
from ..stopping import StoppingPolicy, TrainTrace, should_stop
from ..validation import ensure_graph
from .base import GraphSolver
from .pignn import project

__all__ = [
    "SearchNode",
    "PerturbedGnn",
    "gnn_predict",
    "perturbed_loss",
    "ucb",
    "select_path",
    "expand",
    "backpropagate",
    "MctsGnnSolver",
]


class SearchNode:
    """One tree state: a set of fixed node labels plus visit statistics.

    w accumulates rollout rewards in cut units; v counts visits; prior is the
    transition likelihood assigned by the network when the parent expanded.
    children stays None until the node is first reached.
    """

    __slots__ = ("parent", "action", "fixed", "labels", "w", "v", "prior", "children")

    def __init__(self, parent, action, fixed, labels, prior):
        self.parent = parent
        self.action = action  # (node, label) or None at the root
        self.fixed = fixed
        self.labels = labels
        self.w = 0.0
        self.v = 0
        self.prior = float(prior)
        self.children = None

    def is_terminal(self):
        return bool(self.fixed.all())

    def __repr__(self):
        return f"SearchNode(action={self.action}, v={self.v}, w={self.w})"


class PerturbedGnn:
    """Embedding -> GCN(d1, elu) -> dropout -> GCN(d2) stack, then a head that
    mixes in the fixed-label mask: hidden = relu(X_v theta1^T + h' theta2^T),
    probabilities = sigmoid(hidden theta3^T).

    d3 is the head width. With d3 = 1 the relu makes every probability sit on
    one side of 0.5 (the sign of theta3), and the best reachable relaxed
    objective is the uninformative -m/2 plateau, so training collapses; a few
    mixed-sign channels restore two-sided probabilities. d3 = None picks
    max(8, d2), which is collapse-free at every size tried.
    """

    def __init__(self, g, rng, dropout_rate=0.0, d3=None):
        d1, d2 = feature_dims(g.n)
        if d3 is None:
            d3 = max(8, d2)
        self.embedding = embedding_init(g.n, d1, rng)
        self.gcn1 = GcnLayer(d1, d1, "elu", rng, name="gcn1")
        self.gcn2 = GcnLayer(d1, d2, "identity", rng, name="gcn2")
        self.theta1 = init_weight(rng, d3, 1, fan_in=1, name="theta1")
        self.theta2 = init_weight(rng, d3, d2, name="theta2")
        self.theta3 = init_weight(rng, 1, d3, fan_in=d3, name="theta3")
        self.a_mean = Tensor(mean_adjacency(g))
        self.dropout_rate = dropout_rate

    def params(self):
        return (self.embedding.params() + self.gcn1.params() + self.gcn2.params()
                + [self.theta1, self.theta2, self.theta3])

    def forward(self, xv_col, rng, train=True):
        h = gcn_forward(self.gcn1, self.a_mean, self.embedding.table)
        h = dropout(h, self.dropout_rate, rng, train=train)
        h = gcn_forward(self.gcn2, self.a_mean, h)
        hidden = (xv_col @ self.theta1.t() + h @ self.theta2.t()).relu()
        return (hidden @ self.theta3.t()).sigmoid()


def gnn_predict(g, x_v, gnn):
    """Label-1 probabilities for every node under the fixed-label mask x_v."""
    xv_col = Tensor(np.asarray(x_v, dtype=np.float64).reshape(-1, 1))
    if xv_col.shape[0] != g.n:
        raise ValueError("mask length does not match the node count")
    rng = np.random.default_rng(0)  # unused when train is off
    return gnn.forward(xv_col, rng, train=False).data.ravel()


def _perturb_constants(q, fixed, labels):
    """Split the objective by the fixed mask: (constant, linear vector, bilinear
    matrix). Fixed-fixed terms are constant, fixed-free terms are linear in the
    free probabilities, and free-free terms keep the bilinear i < j part plus a
    linear diagonal (binary idempotence)."""
    n = q.n
    const = 0.0
    lin = np.zeros(n)
    upper = np.zeros((n, n))
    for (i, j), c in q.entries.items():
        fi, fj = fixed[i], fixed[j]
        if i == j:
            if fi:
                const += c * float(labels[i])
            else:
                lin[i] += c
        elif fi and fj:
            const += c * float(labels[i]) * float(labels[j])
        elif fi:
            lin[j] += c * float(labels[i])
        elif fj:
            lin[i] += c * float(labels[j])
        else:
            upper[i, j] = c
    return const, Tensor(lin.reshape(-1, 1)), Tensor(upper)


def _loss_from_constants(p, consts):
    const, lin, upper = consts
    return (p.t() @ (upper @ p) + lin.t() @ p).shift(const)


def perturbed_loss(p, q, fixed, labels):
    """Objective with the fixed labels substituted; differentiable in p only."""
    fixed = np.asarray(fixed, dtype=bool).ravel()
    if fixed.shape[0] != q.n:
        raise ValueError("fixed mask length does not match the dimension")
    return _loss_from_constants(p, _perturb_constants(q, fixed, labels))


def ucb(child, parent, alpha):
    """Mean reward plus the prior-scaled exploration bonus; unvisited children
    rank first (the visit-first rule)."""
    if parent.v < 1:
        raise ValueError("parent has never been visited")
    if child.v == 0:
        return math.inf
    return child.w / child.v + alpha * child.prior * math.sqrt(math.log(parent.v) / child.v)


def expand(node, g, gnn, max_children=32):
    """Materialize children for the unlabeled variables, both labels each,
    keeping the max_children highest-prior actions (None keeps all)."""
    if node.children is not None:
        return node.children
    if node.is_terminal():
        node.children = []
        return node.children
    probs = gnn_predict(g, node.fixed.astype(np.float64), gnn)
    candidates = []
    for i in range(g.n):
        if not node.fixed[i]:
            candidates.append((i, 1, float(probs[i])))
            candidates.append((i, 0, 1.0 - float(probs[i])))
    candidates.sort(key=lambda c: (-c[2], c[0], c[1]))
    if max_children is not None:
        candidates = candidates[:max_children]
    children = []
    for i, label, prior in candidates:
        fixed = node.fixed.copy()
        labels = node.labels.copy()
        fixed[i] = True
        labels[i] = label
        children.append(SearchNode(node, (i, label), fixed, labels, prior))
    node.children = children
    return children


def select_path(root, g, gnn, alpha=1.0, max_children=32):
    """Descend by max UCB until a node without materialized children (expanding
    it on first touch) or a terminal node; that node is rolled out."""
    node = root
    while True:
        if node.children is None:
            expand(node, g, gnn, max_children)
            return node
        if not node.children:
            return node  # terminal: rolled out directly
        node = min(node.children,
                   key=lambda c: (-ucb(c, node, alpha), -c.prior, c.action[0], c.action[1]))


def backpropagate(leaf, reward):
    """Add the reward and one visit to every node from the leaf up to the root."""
    node = leaf
    while node is not None:
        node.v += 1
        node.w += reward
        node = node.parent


def _rollout(node, g, q, gnn, opt, rng, policy, max_epochs, beta):
    """Train the shared network under the node's fixed labels, then complete the
    assignment by thresholding the best-loss probabilities."""
    if node.is_terminal():
        labels = node.labels.copy()
        return cut_size(g, labels), labels
    consts = _perturb_constants(q, node.fixed, node.labels)
    xv_col = Tensor(node.fixed.astype(np.float64).reshape(-1, 1))
    trace = TrainTrace()
    for _ in range(max_epochs):
        p = gnn.forward(xv_col, rng)
        loss = _loss_from_constants(p, consts)
        trace.record(loss.item(), snapshot=p.data.ravel())
        if should_stop(policy, trace):
            break
        opt.zero_grad()
        loss.backward()
        opt.step()
    labels = node.labels.copy()
    free = ~node.fixed
    labels[free] = project(trace.snapshot, beta)[free]
    return cut_size(g, labels), labels


class MctsGnnSolver(GraphSolver):
    """Monte Carlo tree search over partial labelings with shared-GNN rollouts.

    One shared network (and its optimizer state) persists across all rollouts;
    each rollout retrains it under the leaf's fixed labels. The search stops
    when the best cut has not improved for search_patience iterations or the
    iteration cap is reached. The tree root stays available as root_ for
    bookkeeping inspection.
    """

    def __init__(self, lr=1e-3, rollout_patience=100, rollout_max_epochs=1000,
                 search_patience=700, max_iters=10_000, alpha=1.0, max_children=32,
                 beta=0.5, dropout_rate=0.0, d3=None, seed=0):
        self.lr = lr
        self.rollout_patience = rollout_patience
        self.rollout_max_epochs = rollout_max_epochs
        self.search_patience = search_patience
        self.max_iters = max_iters
        self.alpha = alpha
        self.max_children = max_children
        self.beta = beta
        self.dropout_rate = dropout_rate
        self.d3 = d3
        self.seed = seed

    def fit(self, graph):
        g = ensure_graph(graph)
        q = build_maxcut_qubo(g)
        rng = np.random.default_rng(self.seed)
        gnn = PerturbedGnn(g, rng, dropout_rate=self.dropout_rate, d3=self.d3)
        opt = Adam(gnn.params(), lr=self.lr)
        rollout_policy = StoppingPolicy("fuzzy", self.rollout_patience)
        search_policy = StoppingPolicy("fuzzy", self.search_patience)
        root = SearchNode(None, None, np.zeros(g.n, dtype=bool),
                          np.zeros(g.n, dtype=np.int8), prior=1.0)
        trace = TrainTrace()
        t0 = time.perf_counter()
        for _ in range(self.max_iters):
            leaf = select_path(root, g, gnn, alpha=self.alpha, max_children=self.max_children)
            reward, labels = _rollout(leaf, g, q, gnn, opt, rng, rollout_policy,
                                      self.rollout_max_epochs, self.beta)
            backpropagate(leaf, reward)
            trace.record(-reward, snapshot=labels)
            trace.cuts.append(reward)
            trace.best_cuts.append(int(-trace.best_loss))
            if should_stop(search_policy, trace):
                break
        trace.time_s = time.perf_counter() - t0
        self.labels_ = trace.snapshot.astype(np.int8)
        self.cut_ = cut_size(g, self.labels_)
        if self.cut_ != -trace.best_loss:
            raise AssertionError("best cut bookkeeping diverged from the labels")
        self.trace_ = trace
        self.iterations_ = trace.epochs
        self.root_ = root
        self.gnn_ = gnn
        self.time_s_ = trace.time_s
        return self

    def _trace_csv(self):
        lines = ["iteration,best_cut"]
        lines.extend(f"{i},{b}" for i, b in enumerate(self.trace_.best_cuts, start=1))
        return "\n".join(lines) + "\n"
