"""Incremental Hoeffding tree with Gaussian numeric split estimation.

Leaves keep, for every candidate feature and class, a weighted Gaussian
estimator (count, mean, squared-deviation sum, min, max). Every
``grace_period`` units of weight the leaf scores binary splits at ten
equal-probability quantiles of each fitted class Gaussian and splits when
the Hoeffding bound separates the best candidate from the runner-up.
"""

from __future__ import annotations

import math
import random

import numpy as np
from scipy.special import ndtri

from ._kernels import best_gaussian_splits

__all__ = ["HoeffdingTree", "hoeffding_bound", "default_subspace_size"]

_N_QUANTILES = 10
_QUANTILE_Z = ndtri(np.arange(1, _N_QUANTILES + 1) / (_N_QUANTILES + 1))
_MIN_BRANCH_FRAC = 0.01


def hoeffding_bound(value_range: float, delta: float, n: float) -> float:
    """Deviation bound ``sqrt(R^2 ln(1/delta) / 2n)``."""
    if value_range <= 0 or not 0 < delta < 1 or n <= 0:
        raise ValueError(
            f"hoeffding_bound needs R > 0, 0 < delta < 1, n > 0 (got {value_range}, {delta}, {n})"
        )
    return math.sqrt(value_range * value_range * math.log(1.0 / delta) / (2.0 * n))


def default_subspace_size(n_features: int) -> int:
    """Random-forest subspace size ``round(sqrt(M)) + 1``, capped at ``M``."""
    return min(n_features, int(math.floor(math.sqrt(n_features) + 0.5)) + 1)


class _Leaf:
    __slots__ = (
        "counts", "features", "n", "mean", "m2", "lo", "hi",
        "seen", "weight_at_attempt", "depth", "parent", "is_left",
    )

    def __init__(self, counts, features, depth, parent=None, is_left=False):
        k = len(features)
        c = len(counts)
        self.counts = counts
        self.features = features
        self.n = [0.0] * c
        self.mean = [[0.0] * k for _ in range(c)]
        self.m2 = [[0.0] * k for _ in range(c)]
        self.lo = [[math.inf] * k for _ in range(c)]
        self.hi = [[-math.inf] * k for _ in range(c)]
        self.seen = 0.0
        self.weight_at_attempt = 0.0
        self.depth = depth
        self.parent = parent
        self.is_left = is_left


class _Split:
    __slots__ = ("feature", "threshold", "left", "right", "depth", "candidates")

    def __init__(self, feature, threshold, depth, candidates):
        self.feature = feature
        self.threshold = threshold
        self.left = None
        self.right = None
        self.depth = depth
        self.candidates = candidates


class HoeffdingTree:
    """Very fast decision tree for numeric features.

    Parameters
    ----------
    n_features, n_classes : int
        Input arity and number of classes.
    grace_period : float
        Weight a leaf must accumulate between split attempts.
    split_confidence : float
        ``delta`` of the Hoeffding bound.
    tie_threshold : float
        Split anyway once the bound falls below this value.
    subspace_size : int
        Candidate features drawn per leaf; 0 uses every feature.
    seed : int
        Seeds the generator that draws leaf subspaces.
    """

    def __init__(
        self,
        n_features,
        n_classes,
        grace_period=200.0,
        split_confidence=1e-7,
        tie_threshold=0.05,
        subspace_size=0,
        seed=0,
    ):
        if n_features < 1 or n_classes < 1:
            raise ValueError("n_features and n_classes must be positive")
        self.n_features = n_features
        self.n_classes = n_classes
        self.grace_period = grace_period
        self.split_confidence = split_confidence
        self.tie_threshold = tie_threshold
        if subspace_size < 0 or subspace_size > n_features:
            raise ValueError(f"subspace_size must lie in [0, {n_features}]")
        self.subspace_size = subspace_size
        self.seed = seed
        self._rng = random.Random(seed)
        self._range = math.log2(n_classes) if n_classes > 1 else 1.0
        self.n_splits = 0
        self.root = self._new_leaf([0.0] * n_classes, 0)

    def _new_leaf(self, counts, depth, parent=None, is_left=False):
        k = self.subspace_size
        if 0 < k < self.n_features:
            features = sorted(self._rng.sample(range(self.n_features), k))
        else:
            features = list(range(self.n_features))
        return _Leaf(counts, features, depth, parent, is_left)

    def _check(self, x):
        if len(x) != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {len(x)}")

    def _route(self, x):
        node = self.root
        while type(node) is _Split:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def leaf_for(self, x):
        """Leaf that ``x`` is routed to (read-only use)."""
        self._check(x)
        return self._route(x)

    def predict_proba(self, x) -> list[float]:
        """Normalised class counts of the leaf reached by ``x``."""
        self._check(x)
        counts = self._route(x).counts
        total = sum(counts)
        if total <= 0.0:
            return [1.0 / self.n_classes] * self.n_classes
        return [v / total for v in counts]

    def train(self, x, y, weight=1.0):
        """Update the tree with one weighted observation."""
        self._check(x)
        if weight <= 0:
            raise ValueError("weight must be positive")
        if not 0 <= y < self.n_classes:
            raise ValueError(f"label {y} outside [0, {self.n_classes})")
        leaf = self._route(x)
        leaf.counts[y] += weight
        leaf.n[y] += weight
        nn = leaf.n[y]
        mu = leaf.mean[y]
        m2 = leaf.m2[y]
        lo = leaf.lo[y]
        hi = leaf.hi[y]
        for j, f in enumerate(leaf.features):
            v = x[f]
            d = v - mu[j]
            mu[j] += weight * d / nn
            m2[j] += weight * d * (v - mu[j])
            if v < lo[j]:
                lo[j] = v
            if v > hi[j]:
                hi[j] = v
        leaf.seen += weight
        if leaf.seen - leaf.weight_at_attempt >= self.grace_period:
            leaf.weight_at_attempt = leaf.seen
            self._attempt_split(leaf)

    def _attempt_split(self, leaf):
        n = np.asarray(leaf.n)
        if np.count_nonzero(n) < 2:
            return
        merits, thresholds, left_fracs = self._best_splits(leaf, n)
        order = np.argsort(-merits, kind="stable")
        g1 = merits[order[0]]
        g2 = merits[order[1]] if len(order) > 1 else 0.0
        g2 = max(g2, 0.0)  # the no-split option always competes with merit 0
        if not g1 > 0.0:
            return
        eps = hoeffding_bound(self._range, self.split_confidence, float(n.sum()))
        if g1 - g2 > eps or eps < self.tie_threshold:
            j = int(order[0])
            left_counts = left_fracs[j] * n
            self._split_leaf(leaf, leaf.features[j], float(thresholds[j]), left_counts, n - left_counts)

    def _best_splits(self, leaf, n):
        """Best merit, threshold and per-class left fraction for each candidate feature."""
        c = self.n_classes
        stats = np.array(leaf.mean + leaf.m2 + leaf.lo + leaf.hi)
        return best_gaussian_splits(
            n, stats[:c], stats[c:2 * c], stats[2 * c:3 * c], stats[3 * c:], _QUANTILE_Z, _MIN_BRANCH_FRAC
        )

    def _split_leaf(self, leaf, feature, threshold, left_counts, right_counts):
        node = _Split(feature, threshold, leaf.depth, tuple(leaf.features))
        node.left = self._new_leaf(left_counts.tolist(), leaf.depth + 1, node, True)
        node.right = self._new_leaf(right_counts.tolist(), leaf.depth + 1, node, False)
        parent = leaf.parent
        if parent is None:
            self.root = node
        elif leaf.is_left:
            parent.left = node
        else:
            parent.right = node
        self.n_splits += 1

    def iter_nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if type(node) is _Split:
                stack.append(node.right)
                stack.append(node.left)

    def splits(self) -> list[tuple[int, float]]:
        """(feature, threshold) of every internal node, pre-order."""
        return [(nd.feature, nd.threshold) for nd in self.iter_nodes() if type(nd) is _Split]

    def depth_stats(self) -> tuple[int, int, int]:
        """(max depth, node count, leaf count)."""
        max_depth = nodes = leaves = 0
        for node in self.iter_nodes():
            nodes += 1
            if type(node) is _Leaf:
                leaves += 1
                max_depth = max(max_depth, node.depth)
        return max_depth, nodes, leaves
