"""Shared estimator plumbing for the instance solvers."""

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

__all__ = ["GraphSolver"]


class GraphSolver(BaseEstimator):
    """Base class for the one-instance optimizers.

    Follows the clustering-estimator convention: hyperparameters live in
    __init__ (stored verbatim so get_params/set_params/clone work), fit(graph)
    optimizes a single instance, and the result lands in trailing-underscore
    attributes (labels_, cut_, trace_, time_s_).
    """

    def fit(self, graph):
        raise NotImplementedError

    def fit_predict(self, graph):
        """Fit the instance and return the binary node labels."""
        self.fit(graph)
        return self.labels_

    def _check_fitted(self):
        if not hasattr(self, "labels_"):
            raise NotFittedError(f"{type(self).__name__} has not been fitted")

    def export_trace(self, path):
        """Write this solver's per-epoch trace CSV (column layout per solver)."""
        self._check_fitted()
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(self._trace_csv())

    def _trace_csv(self):
        raise NotImplementedError
