"""Prequential (test-then-train) evaluation and streaming metrics."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .adwin import Adwin
from .stream import Instance

__all__ = [
    "ConfusionMatrix",
    "PrequentialRecord",
    "PrequentialResult",
    "kappa",
    "run_prequential",
    "windowed_series",
    "write_series_csv",
    "SERIES_HEADER",
]

SERIES_HEADER = ["idx", "win_acc", "cum_acc", "pred", "true", "update_ms", "predict_ms"]


class ConfusionMatrix:
    """Square count matrix indexed ``[true, predicted]``."""

    def __init__(self, n_classes: int):
        self.n_classes = n_classes
        self.counts = np.zeros((n_classes, n_classes), dtype=np.int64)

    @classmethod
    def from_array(cls, arr) -> "ConfusionMatrix":
        arr = np.asarray(arr)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("confusion matrix must be square")
        if np.any(arr < 0):
            raise ValueError("confusion counts must be non-negative")
        cm = cls(arr.shape[0])
        cm.counts = arr.astype(np.int64)
        return cm

    def update(self, y_true: int, y_pred: int):
        self.counts[y_true, y_pred] += 1

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    def accuracy(self) -> float:
        n = self.total
        return self.correct / n if n else 0.0

    def kappa(self) -> float:
        return kappa(self)


def kappa(cm: ConfusionMatrix) -> float:
    """Cohen's kappa ``(p_o - p_e) / (1 - p_e)``; 0 when ``p_e == 1``."""
    counts = cm.counts if isinstance(cm, ConfusionMatrix) else np.asarray(cm)
    n = int(counts.sum())
    if n <= 0:
        raise ValueError("kappa is undefined for an empty confusion matrix")
    # integer numerator and denominator: a single rounding step
    agree = int(np.trace(counts))
    chance = sum(int(r) * int(c) for r, c in zip(counts.sum(axis=1), counts.sum(axis=0)))
    if chance == n * n:
        return 0.0
    return (n * agree - chance) / (n * n - chance)


@dataclass
class PrequentialRecord:
    idx: int
    win_acc: float
    cum_acc: float
    pred: int
    true: int
    update_ms: float
    predict_ms: float

    def row(self) -> list:
        return [
            self.idx,
            f"{self.win_acc:.6f}",
            f"{self.cum_acc:.6f}",
            self.pred,
            self.true,
            f"{self.update_ms:.3f}",
            f"{self.predict_ms:.3f}",
        ]


@dataclass
class PrequentialResult:
    confusion: ConfusionMatrix
    records: list[PrequentialRecord] = field(default_factory=list)
    update_ms: float = 0.0
    predict_ms: float = 0.0

    @property
    def n(self) -> int:
        return self.confusion.total

    def accuracy(self) -> float:
        return self.confusion.accuracy()

    def kappa(self) -> float:
        return kappa(self.confusion)


def _predict_label(learner, x) -> int:
    proba = learner.predict_proba(x)
    return int(np.argmax(proba))


def run_prequential(
    learner,
    stream: Iterable[Instance],
    n_classes: int,
    emit_every: int = 100,
    timing: bool = True,
    on_instance=None,
) -> PrequentialResult:
    """Test-then-train loop over ``stream``.

    The learner needs ``predict_proba(features)`` and ``train(features,
    label)``. A record is emitted every ``emit_every`` instances and after
    the last one; its times are cumulative milliseconds. With
    ``timing=False`` the clock is never read and times stay at zero.
    ``on_instance(idx, pred, true)`` is called after each prediction.
    """
    if emit_every < 1:
        raise ValueError("emit_every must be >= 1")
    expected = getattr(learner, "n_features", None)
    if expected is None and hasattr(learner, "config"):
        expected = learner.config.n_features
    cm = ConfusionMatrix(n_classes)
    window = Adwin()
    result = PrequentialResult(cm)
    clock = time.perf_counter_ns
    upd_ns = pred_ns = 0
    idx = 0
    last = None
    for idx, inst in enumerate(stream, start=1):
        x = inst.features
        if expected is not None and x.size != expected:
            raise ValueError(f"instance {idx} has {x.size} features, learner expects {expected}")
        if not 0 <= inst.label < n_classes:
            raise ValueError(f"instance {idx} label {inst.label} outside [0, {n_classes})")
        if timing:
            t0 = clock()
            pred = _predict_label(learner, x)
            t1 = clock()
            learner.train(x, inst.label)
            t2 = clock()
            pred_ns += t1 - t0
            upd_ns += t2 - t1
        else:
            pred = _predict_label(learner, x)
            learner.train(x, inst.label)
        cm.update(inst.label, pred)
        window.add(1.0 if pred == inst.label else 0.0)
        if on_instance is not None:
            on_instance(idx, pred, inst.label)
        last = (pred, inst.label)
        if idx % emit_every == 0:
            result.records.append(_record(idx, window, cm, last, upd_ns, pred_ns))
    if idx == 0:
        raise ValueError("stream is empty")
    if idx % emit_every != 0:
        result.records.append(_record(idx, window, cm, last, upd_ns, pred_ns))
    result.update_ms = upd_ns / 1e6
    result.predict_ms = pred_ns / 1e6
    return result


def _record(idx, window, cm, last, upd_ns, pred_ns) -> PrequentialRecord:
    return PrequentialRecord(
        idx=idx,
        win_acc=window.estimate(),
        cum_acc=cm.accuracy(),
        pred=last[0],
        true=last[1],
        update_ms=upd_ns / 1e6,
        predict_ms=pred_ns / 1e6,
    )


def windowed_series(correctness: Iterable[float], delta: float = 0.002) -> list[float]:
    """ADWIN mean after each correctness indicator."""
    window = Adwin(delta)
    out = []
    for v in correctness:
        window.add(float(v))
        out.append(window.estimate())
    return out


def write_series_csv(path, records: Iterable[PrequentialRecord]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SERIES_HEADER)
        for rec in records:
            writer.writerow(rec.row())
