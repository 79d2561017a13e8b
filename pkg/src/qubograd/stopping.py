"""Early-stopping policies and training traces.

Both policies watch a minimized objective series. Strict stopping halts when
the last p successive deltas are all tiny (|delta| < tol) or non-improving;
fuzzy stopping halts when the last p epochs produced no new best value, with
no tolerance involved. Solvers that maximize a reward record its negation.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["StoppingPolicy", "TrainTrace", "should_stop"]


@dataclass
class StoppingPolicy:
    variant: str  # "strict" or "fuzzy"
    patience: int
    tol: float = 1e-4  # strict only

    def __post_init__(self):
        if self.variant not in ("strict", "fuzzy"):
            raise ValueError(f"unknown stopping variant {self.variant!r}")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.variant == "strict" and not self.tol > 0:
            raise ValueError("strict stopping needs tol > 0")


@dataclass
class TrainTrace:
    """Per-epoch objective series with best-value bookkeeping.

    `losses` holds whatever the stopping policy watches (the relaxed objective
    for probability training, negated cut for the reward-driven solvers).
    `snapshot` is a copy of whatever array was supplied at the best epoch:
    node probabilities or a labeling, depending on the solver. `cuts` and
    `best_cuts` are optional per-epoch reward series.
    """

    losses: list = field(default_factory=list)
    best_loss: float = math.inf
    best_epoch: int = -1
    snapshot: np.ndarray | None = None
    epochs: int = 0
    time_s: float = 0.0
    cuts: list = field(default_factory=list)
    best_cuts: list = field(default_factory=list)

    def record(self, loss, snapshot=None):
        """Append one epoch; the snapshot is copied only on improvement."""
        self.losses.append(float(loss))
        if loss < self.best_loss:
            self.best_loss = float(loss)
            self.best_epoch = self.epochs
            if snapshot is not None:
                self.snapshot = np.array(snapshot, copy=True)
        self.epochs += 1


def should_stop(policy, trace):
    """Decide whether training should halt after the last recorded epoch."""
    if not trace.losses:
        raise ValueError("empty trace")
    p = policy.patience
    if policy.variant == "fuzzy":
        return trace.epochs - 1 - trace.best_epoch >= p
    if len(trace.losses) < p + 1:
        return False
    tail = trace.losses[-(p + 1):]
    deltas = [b - a for a, b in zip(tail, tail[1:])]
    return all(abs(d) < policy.tol or d >= 0 for d in deltas)
