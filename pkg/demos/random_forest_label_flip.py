"""
Adaptive random forest on a label flip
======================================

Two Gaussian classes; at t=5000 every label is inverted. Per-tree monitors
raise warnings, grow background trees and then swap them in.
"""

import numpy as np

from driftforest import AdaptiveRandomForest, GaussianMixtureGenerator
from driftforest.evaluation import windowed_series

gen = GaussianMixtureGenerator([[0.0] * 4, [2.0] * 4], [[1.0] * 4] * 2, seed=0)
forest = AdaptiveRandomForest(n_features=4, n_classes=2, n_trees=10, seed=0)

hits = []
for t in range(9000):
    inst = gen.sample()
    y = inst.label if t < 5000 else 1 - inst.label
    x = inst.features.tolist()
    proba, votes = forest.predict_with_votes(x)   # reuse the votes for training
    hits.append(float(np.argmax(proba) == y))
    forest.train(x, y, votes)

series = windowed_series(hits)
for t in (1000, 4999, 5100, 5300, 5600, 6000, 8999):
    print(f"t={t:5d}  windowed accuracy {series[t]:.3f}")

drifts = [e for e in forest.events if e[2] == "drift"]
print(f"{len(forest.events) - len(drifts)} warnings, {len(drifts)} replacements")
print("first replacements:", drifts[:5])
print("mean tree depth now:", forest.mean_depth())
