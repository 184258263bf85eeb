"""Adaptive Deep Forest: multi-grained scanning over ARF sublayers.

The model has an input layer of ``depth`` sublayers (``n`` forests each)
that turns scanned subinstances into class-vector representations, and a
cascade of ``depth`` sublayers (``m`` forests each) that consumes them.
Each cascade sublayer carries an ADWIN accuracy window (its weight) and
one per forest; the final output is the forest-weighted average of the
sublayer whose window currently reports the best accuracy.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .adwin import Adwin
from .forest import VOTE_FLOOR, AdaptiveRandomForest, derive_seed
from .stream import Instance, next_power_of_two

__all__ = [
    "AdfConfig",
    "AdaptiveDeepForest",
    "ForwardPass",
    "scan",
    "window_size",
    "n_subinstances",
    "representation_size",
    "cascade_input_size",
    "select_depth",
    "aggregate_output",
]

WEIGHT_FLOOR = VOTE_FLOOR


# ---------------------------------------------------------------------------
# size arithmetic and scanning


def n_subinstances(dims: int, depth: int, i: int) -> int:
    """Subinstances at scanning depth ``i`` (1-based): ``2**(dims*(depth-i+1))``."""
    return 2 ** (dims * (depth - i + 1))


def window_size(size: int, depth: int, i: int) -> int:
    """Window length (vectors) or side (matrices) at depth ``i`` for a padded ``size``."""
    return size // 2 ** (depth - i + 1)


def representation_size(dims: int, depth: int, i: int, n_classes: int, n_forests: int) -> int:
    return n_subinstances(dims, depth, i) * n_classes * n_forests


def cascade_input_size(i, n_classes, n_cascade, rep_size, n_features, append) -> int:
    """Length of the cascade input at sublayer ``i`` (1-based)."""
    return (n_classes * n_cascade if i > 1 else 0) + rep_size + (n_features if append else 0)


def _check_scan(dims, size, depth):
    if size != next_power_of_two(size):
        raise ValueError(f"scan needs a power-of-two size, got {size}")
    if depth < 1 or size // 2**depth < 1:
        raise ValueError(f"depth {depth} leaves windows smaller than 1 for size {size}")


def scan(x: Instance | np.ndarray, depth: int, dims: int | None = None, size: int | None = None) -> list[np.ndarray]:
    """Disjoint windows of ``x`` for depths 1..``depth``.

    Returns one array per depth with a row per subinstance. Vectors are cut
    into consecutive windows; matrices into square tiles in row-major tile
    order, each tile flattened row-major.
    """
    if isinstance(x, Instance):
        feats = x.features
        dims = x.dims
        size = x.side if x.side is not None else feats.size
    else:
        feats = np.asarray(x, dtype=float).reshape(-1)
    _check_scan(dims, size, depth)
    out = []
    for i in range(1, depth + 1):
        s = window_size(size, depth, i)
        per_axis = size // s
        if dims == 1:
            out.append(feats.reshape(per_axis, s))
        else:
            tiles = feats.reshape(per_axis, s, per_axis, s).transpose(0, 2, 1, 3)
            out.append(tiles.reshape(per_axis * per_axis, s * s))
    return out


# ---------------------------------------------------------------------------
# selection and aggregation


def select_depth(alphas) -> int:
    """Index of the first sublayer with the highest weight (strict improvement)."""
    best = -1
    best_alpha = -math.inf
    for i, a in enumerate(alphas):
        if a > best_alpha:
            best_alpha = a
            best = i
    return best


def aggregate_output(y_best, betas, n_classes: int) -> np.ndarray:
    """Weighted average of the ``m`` class vectors concatenated in ``y_best``."""
    m = len(betas)
    if len(y_best) != n_classes * m:
        raise ValueError(f"expected {n_classes * m} values for {m} forests, got {len(y_best)}")
    if any(b < 0 for b in betas):
        raise ValueError("forest weights must be non-negative")
    total = math.fsum(betas)
    if total <= 0.0:
        raise ValueError("at least one forest weight must be positive")
    out = np.zeros(n_classes)
    for j, b in enumerate(betas):
        out += b * np.asarray(y_best[j * n_classes:(j + 1) * n_classes], dtype=float)
    return out / total


def _argmax(vec) -> int:
    return int(np.argmax(vec))


# ---------------------------------------------------------------------------
# model


_SHALLOW_1D = 16
_MEDIUM_1D = 512


@dataclass
class AdfConfig:
    """Shape and size of an ADF model.

    ``size`` is the raw vector length (``dims=1``) or matrix side
    (``dims=2``) before padding. ``forest`` holds keyword overrides for
    every :class:`AdaptiveRandomForest`.
    """

    n_classes: int
    dims: int
    size: int
    depth: int = 2
    n_input_forests: int = 2
    n_cascade_forests: int = 2
    n_trees: int = 10
    append_original_inner: bool = False
    carf: bool = False
    seed: int = 0
    forest: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ValueError("dims must be 1 or 2")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        if min(self.n_cascade_forests, self.n_trees) < 1 or (self.n_input_forests < 1 and not self.carf):
            raise ValueError("forest and tree counts must be positive")
        if not self.carf and self.padded_size // 2**self.depth < 1:
            raise ValueError(
                f"depth {self.depth} too large for padded size {self.padded_size} "
                f"(max {int(math.log2(self.padded_size))})"
            )
        if self.carf:
            self.append_original_inner = True

    @property
    def padded_size(self) -> int:
        return next_power_of_two(self.size)

    @property
    def n_features(self) -> int:
        return self.size if self.dims == 1 else self.size * self.size

    @property
    def n_padded_features(self) -> int:
        p = self.padded_size
        return p if self.dims == 1 else p * p

    @classmethod
    def for_stream(cls, n_classes, dims, size, **overrides):
        """Defaults by input type: d=4/T=25 for images, d=2/4/5 with T=40 for vectors, F=2."""
        padded = next_power_of_two(size)
        if dims == 2:
            depth, trees = 4, 25
        else:
            depth = 2 if size <= _SHALLOW_1D else 4 if size <= _MEDIUM_1D else 5
            trees = 40
        depth = max(1, min(depth, int(math.log2(padded)) if padded > 1 else 1))
        params = dict(depth=depth, n_input_forests=2, n_cascade_forests=2, n_trees=trees)
        params.update(overrides)
        return cls(n_classes=n_classes, dims=dims, size=size, **params)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ForwardPass:
    """Everything one forward pass computed, kept for the training step."""

    representations: list  # R_i as flat lists
    input_votes: list  # [depth][subinstance][forest] -> tree votes
    subinstances: list  # [depth] -> list of rows
    cascade_inputs: list  # x_in per sublayer
    forest_outputs: list  # [sublayer][forest] -> class vector
    forest_votes: list  # [sublayer][forest] -> tree votes
    alphas: list
    betas: list
    best: int
    output: np.ndarray

    def sublayer_output(self, i) -> list:
        return [v for vec in self.forest_outputs[i] for v in vec]


class AdaptiveDeepForest:
    """Online deep forest over ARF sublayers.

    Inputs are flat feature arrays (or :class:`Instance` objects) of the
    configured shape; matrices are row-major.
    """

    def __init__(self, config: AdfConfig):
        self.config = config
        cfg = config
        c = cfg.n_classes
        self.n_classes = c
        self._dims = cfg.dims
        self._padded = cfg.padded_size
        self._n_x = cfg.n_padded_features
        d = cfg.depth
        self.input_layer: list[list[AdaptiveRandomForest]] = []
        rep_sizes = [0] * d
        if not cfg.carf:
            for i in range(1, d + 1):
                s = window_size(self._padded, d, i)
                n_in = s if cfg.dims == 1 else s * s
                self.input_layer.append(
                    [self._forest(n_in, derive_seed(cfg.seed, 0, i, j)) for j in range(cfg.n_input_forests)]
                )
                rep_sizes[i - 1] = representation_size(cfg.dims, d, i, c, cfg.n_input_forests)
        self.cascade: list[list[AdaptiveRandomForest]] = []
        for i in range(1, d + 1):
            append = i == 1 or cfg.append_original_inner
            n_in = cascade_input_size(i, c, cfg.n_cascade_forests, rep_sizes[i - 1], self._n_x, append)
            self.cascade.append(
                [self._forest(n_in, derive_seed(cfg.seed, 1, i, j)) for j in range(cfg.n_cascade_forests)]
            )
        self.alpha = [Adwin() for _ in range(d)]
        self.beta = [[Adwin() for _ in range(cfg.n_cascade_forests)] for _ in range(d)]
        self.n_seen = 0
        self._cache = None

    def _forest(self, n_features, seed):
        return AdaptiveRandomForest(
            n_features, self.n_classes, n_trees=self.config.n_trees, seed=seed, **self.config.forest
        )

    @property
    def depth(self) -> int:
        return self.config.depth

    def _prepare(self, x) -> np.ndarray:
        cfg = self.config
        if isinstance(x, Instance):
            if x.dims != cfg.dims:
                raise ValueError(f"expected a {cfg.dims}-D instance, got {x.dims}-D")
            x = x.features
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size == self._n_x:  # raw power-of-two input or already padded
            return x
        if x.size != cfg.n_features:
            raise ValueError(f"expected {cfg.n_features} features, got {x.size}")
        if cfg.dims == 1:
            out = np.zeros(self._n_x)
            out[: x.size] = x
            return out
        mat = np.zeros((self._padded, self._padded))
        mat[: cfg.size, : cfg.size] = x.reshape(cfg.size, cfg.size)
        return mat.reshape(-1)

    # -- forward ------------------------------------------------------------

    def input_layer_transform(self, x):
        """Depth representations of ``x`` plus the votes behind them."""
        if self.config.carf:
            raise RuntimeError("CARF models have no input layer")
        xp = self._prepare(x)
        reps, votes, subs = [], [], []
        for i, windows in enumerate(scan(xp, self.depth, self._dims, self._padded)):
            rows = windows.tolist()
            forests = self.input_layer[i]
            rep = []
            votes_i = []
            for row in rows:
                per_forest = []
                for f in forests:
                    proba, tv = f.predict_with_votes(row)
                    rep.extend(proba)
                    per_forest.append(tv)
                votes_i.append(per_forest)
            reps.append(rep)
            votes.append(votes_i)
            subs.append(rows)
        return reps, votes, subs

    def cascade_forward(self, x, representations=None) -> ForwardPass:
        """Run the cascade on ``x`` and its depth representations."""
        cfg = self.config
        xp = self._prepare(x)
        xs = xp.tolist()
        d = self.depth
        if representations is None:
            representations = [[] for _ in range(d)]
        inputs, outputs, fvotes = [], [], []
        y = []
        for i in range(d):
            x_in = y + list(representations[i])
            if i == 0 or cfg.append_original_inner or cfg.carf:
                x_in = x_in + xs
            outs, votes = [], []
            for f in self.cascade[i]:
                proba, tv = f.predict_with_votes(x_in)
                outs.append(proba)
                votes.append(tv)
            y = [v for vec in outs for v in vec]
            inputs.append(x_in)
            outputs.append(outs)
            fvotes.append(votes)
        alphas = [a.estimate() for a in self.alpha]
        betas = [[max(b.estimate(), WEIGHT_FLOOR) for b in row] for row in self.beta]
        best = select_depth(alphas)
        flat_best = [v for vec in outputs[best] for v in vec]
        output = aggregate_output(flat_best, betas[best], self.n_classes)
        return ForwardPass(
            representations=representations,
            input_votes=[],
            subinstances=[],
            cascade_inputs=inputs,
            forest_outputs=outputs,
            forest_votes=fvotes,
            alphas=alphas,
            betas=betas,
            best=best,
            output=output,
        )

    def forward(self, x) -> ForwardPass:
        xp = self._prepare(x)
        if self.config.carf:
            return self.cascade_forward(xp)
        reps, votes, subs = self.input_layer_transform(xp)
        fp = self.cascade_forward(xp, reps)
        fp.input_votes = votes
        fp.subinstances = subs
        return fp

    def _cached_forward(self, x) -> ForwardPass:
        xp = self._prepare(x)
        if self._cache is not None and np.array_equal(self._cache[0], xp):
            return self._cache[1]
        fp = self.forward(xp)
        self._cache = (xp.copy(), fp)
        return fp

    def predict_proba(self, x) -> np.ndarray:
        """Final class vector; leaves the model unchanged."""
        return self._cached_forward(x).output.copy()

    def predict(self, x) -> int:
        return _argmax(self.predict_proba(x))

    # -- training -------------------------------------------------------------

    def train(self, x, y: int):
        """Forward pass on the current state, then update forests and weights."""
        if not 0 <= y < self.n_classes:
            raise ValueError(f"label {y} outside [0, {self.n_classes})")
        fp = self._cached_forward(x)
        self._cache = None
        if not self.config.carf:
            for i, forests in enumerate(self.input_layer):
                rows = fp.subinstances[i]
                votes_i = fp.input_votes[i]
                for s, row in enumerate(rows):
                    for j, f in enumerate(forests):
                        f.train(row, y, votes_i[s][j])
        for i, forests in enumerate(self.cascade):
            x_in = fp.cascade_inputs[i]
            for j, f in enumerate(forests):
                f.train(x_in, y, fp.forest_votes[i][j])
                self.beta[i][j].add(1.0 if _argmax(fp.forest_outputs[i][j]) == y else 0.0)
            agg = aggregate_output(fp.sublayer_output(i), fp.betas[i], self.n_classes)
            self.alpha[i].add(1.0 if _argmax(agg) == y else 0.0)
        self.n_seen += 1
        return fp

    # -- introspection --------------------------------------------------------

    def forests(self):
        for layer in self.input_layer:
            yield from layer
        for layer in self.cascade:
            yield from layer

    def depth_report(self) -> list[float]:
        """Average tree depth per sublayer: input sublayers first, then cascade."""
        out = []
        for layer in self.input_layer + self.cascade:
            depths = [s[0] for f in layer for s in f.depth_stats()]
            out.append(sum(depths) / len(depths))
        return out

    def weights(self) -> dict:
        return {
            "alpha": [a.estimate() for a in self.alpha],
            "beta": [[b.estimate() for b in row] for row in self.beta],
        }
