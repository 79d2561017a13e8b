"""Ground-truth references: exhaustive minimization and a greedy local-search baseline."""

import numpy as np

from .validation import ensure_assignment

__all__ = ["brute_force_best", "greedy_maxcut"]

_CHUNK = 1 << 16


def brute_force_best(q, limit=24):
    """Exhaustive minimum of the objective over all 2^n assignments.

    Ties go to the lexicographically smallest assignment (x_0 is the most
    significant bit of the enumeration). Guarded at n <= 24.
    """
    n = q.n
    if n > limit:
        raise ValueError(f"exhaustive search guarded at n <= {limit}, got {n}")
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint32)  # x_0 = MSB => counting order is lex order
    diag = q.diagonal()
    pairs = [(i, j, c) for (i, j), c in q.entries.items() if i < j]
    best_h = np.inf
    best_code = None
    total = 1 << n
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.uint32)
        x = ((codes[:, None] >> shifts[None, :]) & 1).astype(np.float64)
        h = x @ diag
        for i, j, c in pairs:
            h += c * x[:, i] * x[:, j]
        k = int(np.argmin(h))
        if h[k] < best_h:
            best_h = float(h[k])
            best_code = int(codes[k])
    bits = [(best_code >> int(s)) & 1 for s in shifts]
    return np.array(bits, dtype=np.int8), best_h


def greedy_maxcut(g, seed=0):
    """Local search: random labels, then flip any node that gains cut edges
    until no single flip improves. Deterministic for a given seed."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=g.n, dtype=np.int8)
    improved = True
    while improved:
        improved = False
        for v in range(g.n):
            nbrs = g.adjacency[v]
            if not nbrs:
                continue
            same = sum(1 for u in nbrs if labels[u] == labels[v])
            # flipping v turns same-label edges into cut edges and vice versa
            if 2 * same > len(nbrs):
                labels[v] = 1 - labels[v]
                improved = True
    return ensure_assignment(labels, g.n)
