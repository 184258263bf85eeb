"""Adaptive Random Forest: online-bagged Hoeffding trees with drift monitors."""

from __future__ import annotations

import math
import random

import numpy as np

from .adwin import Adwin
from .tree import HoeffdingTree, default_subspace_size

__all__ = ["AdaptiveRandomForest", "poisson", "weighted_vote", "derive_seed"]

VOTE_FLOOR = 0.01


def derive_seed(*parts: int) -> int:
    """Stable 63-bit seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(2, np.uint64)[0] >> 1)


def poisson(rng: random.Random, lam: float) -> int:
    """Draw from Poisson(lam) by multiplying uniforms (Knuth)."""
    limit = math.exp(-lam)
    k = 0
    p = rng.random()
    while p > limit:
        k += 1
        p *= rng.random()
    return k


def weighted_vote(votes, weights) -> list[float]:
    """Weighted average of class vectors, renormalised to sum to one."""
    c = len(votes[0])
    out = [0.0] * c
    for vote, w in zip(votes, weights):
        for k in range(c):
            out[k] += w * vote[k]
    total = sum(out)
    if total <= 0.0:
        return [1.0 / c] * c
    return [v / total for v in out]


def _argmax(vec) -> int:
    return vec.index(max(vec))


class _Member:
    """One forest slot: foreground tree, optional background tree and monitors."""

    __slots__ = ("tree", "background", "rng", "accuracy", "warning", "drift", "generation")

    def __init__(self):
        self.tree = None
        self.background = None
        self.rng = None
        self.accuracy = None
        self.warning = None
        self.drift = None
        self.generation = 0


class AdaptiveRandomForest:
    """Online random forest with Poisson bagging and per-tree drift handling.

    Each tree votes with the ADWIN estimate of its own prequential accuracy
    (floored at 0.01). A warning detector spawns a background tree that is
    trained alongside the foreground one; a drift detector swaps it in.
    Setting ``warning_delta`` or ``drift_delta`` to 0 disables that monitor.
    """

    def __init__(
        self,
        n_features,
        n_classes,
        n_trees=10,
        lambda_=6.0,
        warning_delta=0.01,
        drift_delta=0.001,
        subspace_size=None,
        grace_period=50.0,
        split_confidence=0.01,
        tie_threshold=0.05,
        seed=0,
    ):
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        self.n_features = n_features
        self.n_classes = n_classes
        self.n_trees = n_trees
        self.lambda_ = lambda_
        self.warning_delta = warning_delta
        self.drift_delta = drift_delta
        self.subspace_size = default_subspace_size(n_features) if subspace_size is None else subspace_size
        self.grace_period = grace_period
        self.split_confidence = split_confidence
        self.tie_threshold = tie_threshold
        self.seed = seed
        self.events: list[tuple[int, int, str]] = []
        self.reset()

    def reset(self):
        """Reinitialise every tree and monitor, keeping the configuration."""
        self.n_seen = 0
        self.events = []
        self.members = []
        for i in range(self.n_trees):
            m = _Member()
            m.rng = random.Random(derive_seed(self.seed, i, 0))
            m.tree = self._new_tree(i, 0)
            self._reset_monitors(m)
            self.members.append(m)

    def _new_tree(self, slot, generation, background=False):
        return HoeffdingTree(
            self.n_features,
            self.n_classes,
            grace_period=self.grace_period,
            split_confidence=self.split_confidence,
            tie_threshold=self.tie_threshold,
            subspace_size=self.subspace_size,
            seed=derive_seed(self.seed, slot, generation, 1 + int(background)),
        )

    def _reset_monitors(self, m):
        m.accuracy = Adwin()
        m.warning = Adwin(self.warning_delta) if self.warning_delta else None
        m.drift = Adwin(self.drift_delta) if self.drift_delta else None

    def _as_list(self, x):
        if isinstance(x, np.ndarray):
            x = x.tolist()
        if len(x) != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {len(x)}")
        return x

    def tree_votes(self, x) -> list[list[float]]:
        """Class vector of every foreground tree, in slot order."""
        x = self._as_list(x)
        return [m.tree.predict_proba(x) for m in self.members]

    def tree_weights(self) -> list[float]:
        return [max(m.accuracy.estimate(), VOTE_FLOOR) for m in self.members]

    def predict_with_votes(self, x):
        """Forest class vector together with the per-tree votes behind it."""
        votes = self.tree_votes(x)
        return weighted_vote(votes, self.tree_weights()), votes

    def predict_proba(self, x) -> list[float]:
        return self.predict_with_votes(x)[0]

    def train(self, x, y, votes=None):
        """Test-then-train update on one instance.

        ``votes`` may carry the trees' class vectors for ``x`` computed on
        the current state (as returned by ``predict_with_votes``); they are
        recomputed otherwise.
        """
        x = self._as_list(x)
        if not 0 <= y < self.n_classes:
            raise ValueError(f"label {y} outside [0, {self.n_classes})")
        if votes is None:
            votes = [m.tree.predict_proba(x) for m in self.members]
        t = self.n_seen
        for i, m in enumerate(self.members):
            correct = 1.0 if _argmax(votes[i]) == y else 0.0
            k = poisson(m.rng, self.lambda_)
            if k > 0:
                m.tree.train(x, y, k)
                if m.background is not None:
                    m.background.train(x, y, k)
            m.accuracy.add(correct)
            err = 1.0 - correct
            warn = m.warning
            if warn is not None:
                before = warn.estimate()
                if warn.add(err) and warn.estimate() > before:
                    m.background = self._new_tree(i, m.generation + 1, background=True)
                    m.warning = Adwin(self.warning_delta)
                    self.events.append((t, i, "warning"))
            drift = m.drift
            if drift is not None:
                # only cuts that raised the error rate count as drift
                before = drift.estimate()
                drifted = drift.add(err) and drift.estimate() > before
            else:
                drifted = False
            if drifted:
                m.generation += 1
                m.tree = m.background if m.background is not None else self._new_tree(i, m.generation)
                m.background = None
                self._reset_monitors(m)
                self.events.append((t, i, "drift"))
        self.n_seen += 1

    @property
    def n_replacements(self) -> int:
        return sum(1 for e in self.events if e[2] == "drift")

    def depth_stats(self) -> list[tuple[int, int, int]]:
        return [m.tree.depth_stats() for m in self.members]

    def mean_depth(self) -> float:
        return sum(s[0] for s in self.depth_stats()) / self.n_trees

