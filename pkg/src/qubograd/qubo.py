"""Sparse upper-triangular QUBO coefficient maps and exact objective evaluation."""

import numpy as np

__all__ = ["QuboMatrix", "build_maxcut_qubo", "hamiltonian"]


class QuboMatrix:
    """Coefficients Q_ij of the quadratic form sum_{i<=j} x_i Q_ij x_j.

    Only i <= j keys are stored; zero coefficients are dropped. Immutable by
    convention after construction (derived arrays are cached lazily).
    """

    def __init__(self, n, entries):
        if n < 1:
            raise ValueError("dimension must be positive")
        clean = {}
        for (i, j), c in entries.items():
            i, j = int(i), int(j)
            if not (0 <= i <= j < n):
                raise ValueError(f"bad index pair ({i}, {j}) for dimension {n}")
            c = float(c)
            if c != 0.0:
                clean[(i, j)] = c
        self.n = int(n)
        self.entries = clean
        self._cache = {}

    def diagonal(self):
        """Length-n vector of Q_ii coefficients."""
        if "diag" not in self._cache:
            d = np.zeros(self.n)
            for (i, j), c in self.entries.items():
                if i == j:
                    d[i] = c
            self._cache["diag"] = d
        return self._cache["diag"]

    def strict_upper(self):
        """Dense n x n matrix of the i < j coefficients."""
        if "upper" not in self._cache:
            u = np.zeros((self.n, self.n))
            for (i, j), c in self.entries.items():
                if i < j:
                    u[i, j] = c
            self._cache["upper"] = u
        return self._cache["upper"]

    def adjacency_terms(self):
        """Per-node list of (other, coeff) for the off-diagonal entries touching it."""
        if "adjterms" not in self._cache:
            terms = [[] for _ in range(self.n)]
            for (i, j), c in self.entries.items():
                if i != j:
                    terms[i].append((j, c))
                    terms[j].append((i, c))
            self._cache["adjterms"] = [tuple(t) for t in terms]
        return self._cache["adjterms"]

    def __repr__(self):
        return f"QuboMatrix(n={self.n}, nnz={len(self.entries)})"


def build_maxcut_qubo(g):
    """Max-Cut coefficients: Q_ii = -deg(i), Q_ij = 2 on edges.

    Derived from CutSize(x) = sum_{(i,j) in E} (x_i + x_j - 2 x_i x_j), so the
    quadratic form equals -CutSize(x) on every binary vector.
    """
    entries = {}
    for v in range(g.n):
        d = g.degree(v)
        if d:
            entries[(v, v)] = -float(d)
    for u, v in g.edges:
        entries[(u, v)] = 2.0
    return QuboMatrix(g.n, entries)


def hamiltonian(q, x):
    """Exact sum of x_i Q_ij x_j over the stored entries; x must be binary."""
    x = np.asarray(x).ravel()
    if x.shape[0] != q.n:
        raise ValueError(f"assignment has length {x.shape[0]}, matrix has dimension {q.n}")
    if not np.isin(x, (0, 1)).all():
        raise ValueError("assignment entries must be 0 or 1")
    total = 0.0
    for (i, j), c in q.entries.items():
        total += c * float(x[i]) * float(x[j])
    return total
