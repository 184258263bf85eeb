import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftforest.adwin import Adwin, adwin_bound
from oracles import replay_with_oracle


def bernoulli(rng, p, n):
    return [1.0 if rng.random() < p else 0.0 for _ in range(n)]


def test_bound_formula():
    assert adwin_bound(10, 30, 40, 0.002) == pytest.approx(math.sqrt(math.log(4 * 40 / 0.002) / (2 * 7.5)))


def test_empty_and_mean():
    w = Adwin()
    assert w.estimate() == 0.0 and w.width == 0
    for v in (1, 1, 0, 0):
        w.add(v)
    assert w.estimate() == 0.5 and w.width == 4


def test_rejects_out_of_range():
    w = Adwin()
    for bad in (-0.1, 1.5):
        with pytest.raises(ValueError):
            w.add(bad)


@pytest.mark.parametrize("delta", [0.0, 1.0, -1.0])
def test_rejects_bad_delta(delta):
    with pytest.raises(ValueError):
        Adwin(delta)


def test_constant_stream_never_cuts():
    w = Adwin()
    assert not any(w.add(1.0) for _ in range(10_000))
    assert w.estimate() == 1.0 and w.width == 10_000


def test_switch_detected_quickly_and_confirmed():
    rng = random.Random(0)
    values = bernoulli(rng, 0.9, 1000) + bernoulli(rng, 0.1, 1000)
    detections = replay_with_oracle(values)
    post = [t for t in detections if t >= 1000]
    assert post and post[0] - 1000 < 300


def test_false_positive_rate():
    hits = 0
    for seed in range(100):
        rng = random.Random(seed)
        w = Adwin()
        hits += any(w.add(1.0 if rng.random() < 0.5 else 0.0) for _ in range(10_000))
    assert hits <= 5


@given(st.lists(st.floats(0, 1), min_size=1, max_size=400))
@settings(max_examples=80, deadline=None)
def test_histogram_invariants(values):
    w = Adwin(max_buckets=3, clock=1_000_000)  # no cut checks: pure compression
    for v in values:
        w.add(v)
        counts = w.bucket_counts()
        assert sum(sum(r) for r in counts) == w.width
        for r, row in enumerate(counts):
            assert len(row) <= 3
            assert all(size == 2**r for size in row)
    assert w.width == len(values)
    assert w.estimate() == pytest.approx(math.fsum(values) / len(values), abs=1e-12)


@given(st.integers(0, 10_000), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
@settings(max_examples=30, deadline=None)
def test_every_cut_confirmed_by_oracle(seed, p0, p1):
    rng = random.Random(seed)
    replay_with_oracle(bernoulli(rng, p0, 600) + bernoulli(rng, p1, 600))


def test_reset():
    w = Adwin()
    for v in [1.0] * 500 + [0.0] * 500:
        w.add(v)
    assert w.n_detections > 0
    w.reset()
    assert w.width == 0 and w.estimate() == 0.0 and w.n_detections == 0
