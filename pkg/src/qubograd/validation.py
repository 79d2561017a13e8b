"""Input validation helpers shared by the solver estimators and the CLI."""

import numpy as np

from .graphs import Graph

__all__ = ["ensure_graph", "ensure_assignment", "ensure_probabilities"]


def ensure_graph(obj):
    """Accept a Graph or an (n, edges) pair; anything else is a TypeError."""
    if isinstance(obj, Graph):
        return obj
    if isinstance(obj, tuple) and len(obj) == 2:
        return Graph(obj[0], obj[1])
    raise TypeError(f"expected a Graph or an (n, edges) pair, got {type(obj).__name__}")


def ensure_assignment(labels, n):
    """Binary label vector of length n as an int8 array."""
    x = np.asarray(labels).ravel()
    if x.shape[0] != n:
        raise ValueError(f"assignment has length {x.shape[0]}, expected {n}")
    if not np.isin(x, (0, 1)).all():
        raise ValueError("assignment entries must be 0 or 1")
    return x.astype(np.int8)


def ensure_probabilities(p, n):
    """Probability vector of length n as a float array in [0, 1]."""
    q = np.asarray(p, dtype=np.float64).ravel()
    if q.shape[0] != n:
        raise ValueError(f"probability vector has length {q.shape[0]}, expected {n}")
    if not ((q >= 0.0) & (q <= 1.0)).all():
        raise ValueError("probabilities must lie in [0, 1]")
    return q
