"""Undirected simple graphs: validation, seeded random generation, file round-trip, cut metrics."""

import heapq

import numpy as np

__all__ = [
    "Graph",
    "GraphFormatError",
    "generate_graph",
    "degree_stats",
    "cut_size",
    "save_graph",
    "load_graph",
]


class GraphFormatError(ValueError):
    """A graph file violates the "n m" header / "u v" edge-line format."""


class Graph:
    """Simple undirected graph on nodes 0..n-1.

    Edges are normalized to (u, v) with u < v and stored sorted; adjacency
    lists are sorted per node. Instances are immutable by convention: nothing
    mutates them after construction, so they are safe to share across threads.
    """

    def __init__(self, n, edges):
        if n < 1:
            raise ValueError("node count must be positive")
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop ({u}, {v})")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) outside node range 0..{n - 1}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        self.n = int(n)
        self.edges = tuple(sorted(seen))
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        self.adjacency = tuple(tuple(sorted(a)) for a in adj)
        self._edge_array = np.array(self.edges, dtype=np.int64).reshape(-1, 2)

    @property
    def m(self):
        return len(self.edges)

    def degree(self, v):
        return len(self.adjacency[v])

    def degrees(self):
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def edge_array(self):
        """m x 2 int array of (u, v) pairs, u < v. Do not mutate."""
        return self._edge_array

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _random_spanning_tree(n, rng):
    # Uniform over labeled trees via a random Pruefer sequence; guarantees
    # every node ends with degree >= 1.
    if n == 2:
        return [(0, 1)]
    seq = rng.integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=np.int64)
    for x in seq:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, int(x)), max(leaf, int(x))))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, int(x))
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return edges


def generate_graph(n, m, seed):
    """Seeded random connected-ish instance: spanning tree plus uniform extra edges.

    Requires n-1 <= m <= n(n-1)/2. The spanning tree keeps minimum degree at 1;
    the remaining m-(n-1) edges are drawn without replacement from the non-edges.
    Pure function of (n, m, seed).
    """
    n, m = int(n), int(m)
    if n < 1:
        raise ValueError("node count must be positive")
    lo, hi = n - 1, n * (n - 1) // 2
    if not lo <= m <= hi:
        raise ValueError(f"edge count {m} outside [{lo}, {hi}] for n={n}")
    rng = np.random.default_rng(seed)
    edges = set()
    if n >= 2:
        edges.update(_random_spanning_tree(n, rng))
    need = m - len(edges)
    if need > 0:
        remaining = hi - len(edges)
        if need > remaining // 4:
            # dense request: enumerate the complement outright
            pool = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
            picks = rng.choice(len(pool), size=need, replace=False)
            edges.update(pool[i] for i in picks)
        else:
            while need > 0:
                u = int(rng.integers(n))
                v = int(rng.integers(n))
                if u == v:
                    continue
                key = (u, v) if u < v else (v, u)
                if key in edges:
                    continue
                edges.add(key)
                need -= 1
    return Graph(n, edges)


def degree_stats(g):
    """(max degree, min degree, mean degree); mean is exactly 2m/n."""
    degs = g.degrees()
    return int(degs.max()), int(degs.min()), 2.0 * g.m / g.n


def cut_size(g, labels):
    """Number of edges whose endpoints carry different labels."""
    x = np.asarray(labels).ravel()
    if x.shape[0] != g.n:
        raise ValueError(f"labels have length {x.shape[0]}, graph has {g.n} nodes")
    if g.m == 0:
        return 0
    e = g.edge_array()
    return int(np.count_nonzero(x[e[:, 0]] != x[e[:, 1]]))


def save_graph(g, path):
    """Write the edge-list text format: "n m" header, then "u v" per edge, u < v."""
    lines = [f"{g.n} {g.m}\n"]
    lines.extend(f"{u} {v}\n" for u, v in g.edges)
    with open(path, "w", encoding="ascii") as fh:
        fh.writelines(lines)


def load_graph(path):
    """Parse the edge-list format written by save_graph; errors name the offending line."""
    with open(path, "r", encoding="ascii") as fh:
        raw = fh.read().splitlines()
    # trailing blank lines are tolerated, blank lines elsewhere are not
    while raw and raw[-1].strip() == "":
        raw.pop()
    if not raw:
        raise GraphFormatError("line 1: missing 'n m' header")
    parts = raw[0].split()
    if len(parts) != 2:
        raise GraphFormatError("line 1: header must be 'n m'")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError("line 1: header must hold two decimal integers") from None
    if n < 1 or m < 0:
        raise GraphFormatError("line 1: need n >= 1 and m >= 0")
    if len(raw) - 1 != m:
        raise GraphFormatError(f"line {len(raw)}: expected {m} edge lines, found {len(raw) - 1}")
    edges = []
    seen = set()
    for k, line in enumerate(raw[1:], start=2):
        fields = line.split()
        if len(fields) != 2:
            raise GraphFormatError(f"line {k}: edge line must be 'u v'")
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphFormatError(f"line {k}: edge endpoints must be decimal integers") from None
        if u == v:
            raise GraphFormatError(f"line {k}: self-loop ({u}, {v})")
        if not u < v:
            raise GraphFormatError(f"line {k}: endpoints must satisfy u < v")
        if not (0 <= u and v < n):
            raise GraphFormatError(f"line {k}: edge ({u}, {v}) outside node range 0..{n - 1}")
        if (u, v) in seen:
            raise GraphFormatError(f"line {k}: duplicate edge ({u}, {v})")
        seen.add((u, v))
        edges.append((u, v))
    return Graph(n, edges)
