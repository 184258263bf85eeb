"""ADWIN adaptive windowing over a bounded [0, 1] signal.

The window is stored as an exponential histogram: row ``r`` holds up to
``max_buckets`` buckets, each summarising ``2**r`` consecutive values by
their sum. Rows are ordered newest (row 0) to oldest; inside a row the
oldest bucket comes first.
"""

from __future__ import annotations

import math

__all__ = ["Adwin", "adwin_bound"]


def adwin_bound(n0: float, n1: float, width: float, delta: float) -> float:
    """Cut threshold for two sub-windows of sizes ``n0`` and ``n1``."""
    m = 1.0 / (1.0 / n0 + 1.0 / n1)
    return math.sqrt(math.log(4.0 * width / delta) / (2.0 * m))


class Adwin:
    """Adaptive sliding window with change detection.

    Parameters
    ----------
    delta : float
        Confidence of the cut test, in (0, 1).
    max_buckets : int
        Buckets kept per histogram row before two are merged.
    clock : int
        Cut points are tested once every ``clock`` insertions.
    min_window : int
        No test is run while the window is shorter than this.
    min_sub_window : int
        Smallest sub-window size considered on either side of a cut.
    """

    __slots__ = (
        "delta", "max_buckets", "clock", "min_window", "min_sub_window",
        "_rows", "_width", "_total", "_ticks", "n_detections",
    )

    def __init__(self, delta=0.002, max_buckets=5, clock=32, min_window=10, min_sub_window=5):
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
        if max_buckets < 2 or clock < 1:
            raise ValueError("max_buckets must be >= 2 and clock >= 1")
        self.delta = delta
        self.max_buckets = max_buckets
        self.clock = clock
        self.min_window = min_window
        self.min_sub_window = min_sub_window
        self.n_detections = 0
        self._reset_state()

    def _reset_state(self):
        self._rows: list[list[float]] = [[]]
        self._width = 0
        self._total = 0.0
        self._ticks = 0

    def reset(self):
        self._reset_state()
        self.n_detections = 0

    @property
    def width(self) -> int:
        return self._width

    @property
    def total(self) -> float:
        return self._total

    def estimate(self) -> float:
        """Mean of the current window, 0 for an empty window."""
        if self._width == 0:
            return 0.0
        return self._total / self._width

    def bucket_counts(self) -> list[list[int]]:
        """Bucket sizes per row (newest row first), for diagnostics."""
        return [[1 << r] * len(row) for r, row in enumerate(self._rows)]

    def add(self, value: float) -> bool:
        """Insert ``value`` and return True if the window was cut."""
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"ADWIN accepts values in [0, 1], got {value!r}")
        row0 = self._rows[0]
        row0.append(value)
        self._width += 1
        self._total += value
        if len(row0) > self.max_buckets:
            self._compress()
        self._ticks += 1
        if self._ticks < self.clock:
            return False
        self._ticks = 0
        if self._width < self.min_window:
            return False
        cut = False
        while self._find_cut():
            self._drop_oldest()
            cut = True
        if cut:
            self.n_detections += 1
        return cut

    def _compress(self):
        rows = self._rows
        limit = self.max_buckets
        row = rows[0]
        r = 0
        while len(row) > limit:
            merged = row[0] + row[1]
            del row[:2]
            r += 1
            if r == len(rows):
                rows.append([])
            row = rows[r]
            row.append(merged)

    def _find_cut(self) -> bool:
        width = self._width
        if width < self.min_window:
            return False
        total = self._total
        min_sub = self.min_sub_window
        log_term = math.log(4.0 * width / self.delta)
        n0 = 0
        s0 = 0.0
        rows = self._rows
        for r in range(len(rows) - 1, -1, -1):
            size = 1 << r
            for bucket in rows[r]:
                n0 += size
                s0 += bucket
                n1 = width - n0
                if n1 < min_sub:
                    return False
                if n0 < min_sub:
                    continue
                diff = abs(s0 / n0 - (total - s0) / n1)
                m = 1.0 / (1.0 / n0 + 1.0 / n1)
                if diff >= math.sqrt(log_term / (2.0 * m)):
                    return True
        return False

    def _drop_oldest(self):
        rows = self._rows
        r = len(rows) - 1
        while r > 0 and not rows[r]:
            rows.pop()
            r -= 1
        bucket = rows[r].pop(0)
        self._width -= 1 << r
        self._total -= bucket
        if self._width == 0:
            self._total = 0.0
        while len(rows) > 1 and not rows[-1]:
            rows.pop()

    def __repr__(self):
        return f"Adwin(delta={self.delta}, width={self._width}, estimate={self.estimate():.4f})"
