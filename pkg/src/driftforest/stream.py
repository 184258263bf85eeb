"""Instances, CSV ingestion, zero padding and concept-drift synthesis."""

from __future__ import annotations

import csv
import logging
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Instance",
    "StreamSpec",
    "DriftSchedule",
    "StreamFormatError",
    "DriftConfigError",
    "load_csv_stream",
    "write_csv_stream",
    "next_power_of_two",
    "pad_instance",
    "sigmoid_probability",
    "make_sudden_drift",
    "make_gradual_sigmoid_drift",
    "make_incremental_drift",
    "make_class_shift_stream",
    "GaussianMixtureGenerator",
]

log = logging.getLogger(__name__)


class StreamFormatError(ValueError):
    """A stream file could not be parsed."""


class DriftConfigError(ValueError):
    """Incompatible streams or an invalid drift configuration."""


@dataclass(frozen=True)
class Instance:
    """One labelled stream element.

    ``features`` is always stored flat; ``side`` is set for square
    matrices (row-major ``side x side``) and ``None`` for vectors.
    """

    features: np.ndarray
    label: int
    side: int | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float).reshape(-1)
        object.__setattr__(self, "features", feats)
        if self.side is not None and feats.size != self.side * self.side:
            raise ValueError(f"matrix instance needs {self.side}x{self.side} features, got {feats.size}")

    @property
    def dims(self) -> int:
        return 1 if self.side is None else 2

    @property
    def shape_key(self) -> tuple:
        return ("mat", self.side) if self.side is not None else ("vec", self.features.size)

    def matrix(self) -> np.ndarray:
        if self.side is None:
            raise ValueError("vector instance has no matrix view")
        return self.features.reshape(self.side, self.side)


@dataclass
class StreamSpec:
    """Declared shape of a stream.

    ``size`` is the vector length for ``dims=1`` and the matrix side for
    ``dims=2``.
    """

    class_count: int
    dims: int
    size: int
    n_instances: int | None = None
    source: str | dict | None = None
    seed: int = 0

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ValueError(f"dims must be 1 or 2, got {self.dims}")
        if self.class_count < 1 or self.size < 1:
            raise ValueError("class_count and size must be positive")

    @property
    def n_features(self) -> int:
        return self.size if self.dims == 1 else self.size * self.size

    @property
    def side(self) -> int | None:
        return self.size if self.dims == 2 else None


@dataclass
class DriftSchedule:
    mode: str = "gradual_sigmoid"
    center: int | None = None
    width: int | None = None
    start: int | None = None
    end: int | None = None
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("none", "sudden", "incremental", "gradual_sigmoid"):
            raise DriftConfigError(f"unknown drift mode {self.mode!r}")
        if self.mode == "incremental" and None not in (self.start, self.end) and not self.start < self.end:
            raise DriftConfigError("incremental drift needs start < end")
        if self.mode == "gradual_sigmoid" and self.width is not None and self.width <= 0:
            raise DriftConfigError("sigmoid drift width must be positive")


# ---------------------------------------------------------------------------
# ingestion


def load_csv_stream(path, spec: StreamSpec, header: bool = False) -> list[Instance]:
    """Read ``f_1,...,f_L,label`` rows into instances, in file order."""
    n_feat = spec.n_features
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for row_idx, row in enumerate(reader, start=1):
            if header and row_idx == 1:
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != n_feat + 1:
                raise StreamFormatError(
                    f"{path}: row {row_idx}: expected {n_feat + 1} fields, got {len(row)}"
                )
            values = []
            for f_idx, cell in enumerate(row[:-1], start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise StreamFormatError(
                        f"{path}: row {row_idx}, field {f_idx}: not a number: {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise StreamFormatError(f"{path}: row {row_idx}, field {f_idx}: non-finite value")
                values.append(v)
            try:
                label = int(row[-1])
            except ValueError:
                raise StreamFormatError(
                    f"{path}: row {row_idx}, field {n_feat + 1}: label is not an integer: {row[-1]!r}"
                ) from None
            if not 0 <= label < spec.class_count:
                raise StreamFormatError(
                    f"{path}: row {row_idx}: label {label} outside [0, {spec.class_count})"
                )
            out.append(Instance(np.array(values), label, spec.side))
            if spec.n_instances is not None and len(out) == spec.n_instances:
                break
    if spec.n_instances is not None and len(out) < spec.n_instances:
        log.warning("%s ended after %d of %d declared instances", path, len(out), spec.n_instances)
    return out


def write_csv_stream(path, instances: Iterable[Instance]) -> int:
    """Write instances as ``f_1,...,f_L,label`` rows; returns the row count."""
    n = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for inst in instances:
            writer.writerow([repr(float(v)) for v in inst.features] + [inst.label])
            n += 1
    return n


# ---------------------------------------------------------------------------
# padding


def next_power_of_two(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


def pad_instance(x: Instance) -> Instance:
    """Zero-pad a vector (tail) or matrix (right/bottom) to a power-of-two size."""
    if x.side is None:
        length = x.features.size
        target = next_power_of_two(length)
        if target == length:
            return x
        feats = np.zeros(target)
        feats[:length] = x.features
        return Instance(feats, x.label)
    side = x.side
    target = next_power_of_two(side)
    if target == side:
        return x
    mat = np.zeros((target, target))
    mat[:side, :side] = x.matrix()
    return Instance(mat.reshape(-1), x.label, target)


# ---------------------------------------------------------------------------
# drift synthesis


def sigmoid_probability(t: float, center: float, width: float) -> float:
    """Probability of drawing from the new concept at position ``t``."""
    z = -4.0 * (t - center) / width
    if z > 700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(z))


def _check_compatible(ref: Instance | None, inst: Instance) -> Instance:
    if ref is not None and ref.shape_key != inst.shape_key:
        raise DriftConfigError(f"stream shapes differ: {ref.shape_key} vs {inst.shape_key}")
    return inst if ref is None else ref


def make_sudden_drift(a: Iterable[Instance], b: Iterable[Instance], t: int) -> Iterator[Instance]:
    """The first ``t`` instances of ``a`` followed by all of ``b``."""
    if t < 0:
        raise DriftConfigError("change index must be non-negative")
    ref = None
    it_a = iter(a)
    for _ in range(t):
        try:
            inst = next(it_a)
        except StopIteration:
            break
        ref = _check_compatible(ref, inst)
        yield inst
    for inst in b:
        ref = _check_compatible(ref, inst)
        yield inst


def make_gradual_sigmoid_drift(
    a: Iterable[Instance],
    b: Iterable[Instance],
    center: float,
    width: float,
    seed: int = 0,
    length: int | None = None,
) -> Iterator[Instance]:
    """Mix two streams, taking ``b`` at position ``t`` with sigmoid probability.

    Each source advances only when it is drawn from. When the drawn source
    is exhausted the other one is used; the output stops once both are
    exhausted (with a warning if ``length`` was not reached).
    """
    if width <= 0:
        raise DriftConfigError("sigmoid drift width must be positive")
    rng = random.Random(seed)
    sources = [iter(a), iter(b)]
    alive = [True, True]
    ref = None
    t = 0
    while length is None or t < length:
        pick = 1 if rng.random() < sigmoid_probability(t, center, width) else 0
        inst = None
        for src in (pick, 1 - pick):
            if not alive[src]:
                continue
            try:
                inst = next(sources[src])
                break
            except StopIteration:
                alive[src] = False
        if inst is None:
            if length is not None:
                log.warning("sigmoid drift truncated at %d of %d instances", t, length)
            return
        ref = _check_compatible(ref, inst)
        yield inst
        t += 1


def make_incremental_drift(
    g0: "GaussianMixtureGenerator",
    g1: "GaussianMixtureGenerator",
    start: int,
    end: int,
    n: int,
    seed: int = 0,
) -> Iterator[Instance]:
    """Sample ``(1 - a_j) D0 + a_j D1`` with ``a_j`` ramping linearly over [start, end)."""
    for g in (g0, g1):
        if not hasattr(g, "sample"):
            raise DriftConfigError(
                "incremental drift needs parametric generators; replayed streams support sudden and sigmoid only"
            )
    if not start < end:
        raise DriftConfigError("incremental drift needs start < end")
    if g0.shape_key != g1.shape_key:
        raise DriftConfigError(f"generator shapes differ: {g0.shape_key} vs {g1.shape_key}")
    rng = random.Random(seed)
    for j in range(n):
        if j < start:
            yield g0.sample()
        elif j >= end:
            yield g1.sample()
        else:
            alpha = (j - start) / (end - start)
            yield g1.sample() if rng.random() < alpha else g0.sample()


def make_class_shift_stream(
    dataset: Sequence[Instance], seed: int = 0, class_count: int | None = None
) -> list[Instance]:
    """Shuffled copy of ``dataset`` followed by a reshuffled copy with labels rotated by one."""
    if not dataset:
        raise DriftConfigError("dataset is empty")
    c = class_count if class_count is not None else max(inst.label for inst in dataset) + 1
    if c < 2:
        raise DriftConfigError("class shift needs at least two classes")
    first = np.random.default_rng(seed).permutation(len(dataset))
    second = np.random.default_rng(seed + 1).permutation(len(dataset))
    out = [dataset[i] for i in first]
    for i in second:
        inst = dataset[i]
        out.append(Instance(inst.features, (inst.label + 1) % c, inst.side))
    return out


class GaussianMixtureGenerator:
    """Class-conditional Gaussian stream with diagonal covariances.

    ``means`` and ``stds`` are (classes, features) arrays. Calling
    :meth:`sample` draws a class from ``priors`` and then the features.
    """

    def __init__(self, means, stds, priors=None, seed=0, side=None):
        self.means = np.asarray(means, dtype=float)
        self.stds = np.asarray(stds, dtype=float)
        if self.means.ndim != 2 or self.means.shape != self.stds.shape:
            raise DriftConfigError("means and stds must be equal-shape (classes, features) arrays")
        if np.any(self.stds <= 0):
            raise DriftConfigError("standard deviations must be positive")
        c = self.means.shape[0]
        priors = np.full(c, 1.0 / c) if priors is None else np.asarray(priors, dtype=float)
        if priors.shape != (c,) or np.any(priors < 0) or not np.isclose(priors.sum(), 1.0):
            raise DriftConfigError("priors must be a probability vector over classes")
        self.priors = priors
        self.side = side
        if side is not None and side * side != self.means.shape[1]:
            raise DriftConfigError("side does not match the feature count")
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self._cdf = np.cumsum(priors)

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    @property
    def shape_key(self) -> tuple:
        return ("mat", self.side) if self.side is not None else ("vec", self.n_features)

    def sample(self) -> Instance:
        y = int(np.searchsorted(self._cdf, self._rng.random(), side="right"))
        y = min(y, self.n_classes - 1)
        x = self.means[y] + self.stds[y] * self._rng.standard_normal(self.n_features)
        return Instance(x, y, self.side)

    def take(self, n: int) -> list[Instance]:
        return [self.sample() for _ in range(n)]

    def __iter__(self):
        while True:
            yield self.sample()
