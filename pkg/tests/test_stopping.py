import numpy as np
import pytest

from qubograd import StoppingPolicy, TrainTrace, should_stop


def trace_from(losses):
    t = TrainTrace()
    for v in losses:
        t.record(v)
    return t


def test_strict_stops_on_tiny_deltas():
    t = trace_from([10, 9.999999995, 9.99999999, 9.999999985])
    assert should_stop(StoppingPolicy("strict", 3, tol=1e-8), t)


def test_fuzzy_keeps_going_while_best_improves():
    t = trace_from([10, 9.999999995, 9.99999999, 9.999999985])
    assert not should_stop(StoppingPolicy("fuzzy", 3), t)


def test_fuzzy_stops_after_patience_without_new_best():
    t = trace_from([5, 6, 7, 8])
    assert should_stop(StoppingPolicy("fuzzy", 3), t)
    assert not should_stop(StoppingPolicy("fuzzy", 3), trace_from([5, 6, 7]))


def test_strict_needs_enough_epochs():
    t = trace_from([10, 9.999999995])
    assert not should_stop(StoppingPolicy("strict", 3, tol=1e-8), t)


def test_strict_stops_on_non_improving_tail():
    t = trace_from([5.0, 4.0, 4.5, 4.5, 5.0])
    assert should_stop(StoppingPolicy("strict", 3, tol=1e-8), t)


def test_strict_continues_on_big_improvements():
    t = trace_from([10.0, 8.0, 6.0, 4.0])
    assert not should_stop(StoppingPolicy("strict", 3, tol=1e-8), t)


@pytest.mark.parametrize("seed", range(5))
def test_fuzzy_never_halts_before_strict_on_slow_improvement(seed):
    # strictly improving by amounts below tol: strict must fire first
    rng = np.random.default_rng(seed)
    tol = 1e-6
    losses = np.cumsum(-rng.uniform(0.1 * tol, 0.9 * tol, size=30)) + 10.0
    strict = StoppingPolicy("strict", 4, tol=tol)
    fuzzy = StoppingPolicy("fuzzy", 4)
    t = TrainTrace()
    strict_epoch = fuzzy_epoch = None
    for e, v in enumerate(losses, start=1):
        t.record(v)
        if strict_epoch is None and should_stop(strict, t):
            strict_epoch = e
        if fuzzy_epoch is None and should_stop(fuzzy, t):
            fuzzy_epoch = e
    assert strict_epoch is not None
    assert fuzzy_epoch is None or fuzzy_epoch >= strict_epoch


def test_trace_tracks_best_and_snapshot():
    t = TrainTrace()
    t.record(3.0, snapshot=[1.0, 2.0])
    t.record(1.0, snapshot=[3.0, 4.0])
    t.record(2.0, snapshot=[5.0, 6.0])
    assert t.best_loss == 1.0
    assert t.best_epoch == 1
    assert t.epochs == 3
    assert (t.snapshot == [3.0, 4.0]).all()
    assert t.best_loss == min(t.losses)


def test_policy_validation():
    with pytest.raises(ValueError):
        StoppingPolicy("loose", 3)
    with pytest.raises(ValueError):
        StoppingPolicy("fuzzy", 0)
    with pytest.raises(ValueError):
        StoppingPolicy("strict", 3, tol=0.0)
    with pytest.raises(ValueError):
        should_stop(StoppingPolicy("fuzzy", 3), TrainTrace())
