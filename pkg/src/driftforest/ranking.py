"""Average ranks and the Bonferroni-Dunn test against a control algorithm."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["RankSummary", "average_ranks", "bonferroni_dunn", "norm_ppf", "norm_cdf", "BonferroniDunnResult"]

# Acklam's rational approximation to the standard normal quantile.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def norm_ppf(p: float) -> float:
    """Standard normal quantile: rational approximation plus one Halley step."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile needs 0 < p < 1, got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        )
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    e = norm_cdf(x) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


@dataclass
class RankSummary:
    algorithms: list[str]
    ranks: np.ndarray  # average rank per algorithm
    per_stream: np.ndarray  # (algorithms, streams)
    n_streams: int

    @property
    def k(self) -> int:
        return len(self.algorithms)

    def rank_of(self, algo: str) -> float:
        return float(self.ranks[self.algorithms.index(algo)])


def _rank_column(values: np.ndarray, higher_is_better: bool) -> np.ndarray:
    """Ranks 1..k with ties sharing the mean of their positions."""
    keys = -values if higher_is_better else values
    order = np.argsort(keys, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and keys[order[j + 1]] == keys[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def average_ranks(scores, algorithms=None, higher_is_better: bool = True) -> RankSummary:
    """Rank algorithms (rows) on every stream (columns) and average."""
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape[0] < 1 or scores.shape[1] < 1:
        raise ValueError("scores must be an (algorithms x streams) matrix")
    if np.any(np.isnan(scores)):
        missing = [(int(i), int(j)) for i, j in np.argwhere(np.isnan(scores))]
        raise ValueError(f"missing scores at (algorithm, stream) cells {missing}")
    k, n = scores.shape
    algorithms = list(algorithms) if algorithms is not None else [f"A{i}" for i in range(k)]
    per_stream = np.column_stack([_rank_column(scores[:, s], higher_is_better) for s in range(n)])
    return RankSummary(algorithms, per_stream.mean(axis=1), per_stream, n)


@dataclass
class BonferroniDunnResult:
    control: str
    alpha: float
    critical_value: float
    critical_difference: float
    z: dict
    significant: dict


def bonferroni_dunn(summary: RankSummary, alpha: float = 0.05, control: str | None = None) -> BonferroniDunnResult:
    """Compare every algorithm with ``control`` (default: best average rank)."""
    k, n = summary.k, summary.n_streams
    if k < 2 or n < 2:
        raise ValueError("the test needs at least two algorithms and two streams")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if control is None:
        control = summary.algorithms[int(np.argmin(summary.ranks))]
    if control not in summary.algorithms:
        raise ValueError(f"unknown control algorithm {control!r}")
    se = math.sqrt(k * (k + 1) / (6.0 * n))
    q = norm_ppf(1.0 - alpha / (2.0 * (k - 1)))
    r_c = summary.rank_of(control)
    z, sig = {}, {}
    for algo in summary.algorithms:
        if algo == control:
            continue
        z[algo] = (summary.rank_of(algo) - r_c) / se
        sig[algo] = abs(z[algo]) > q
    return BonferroniDunnResult(control, alpha, q, q * se, z, sig)
