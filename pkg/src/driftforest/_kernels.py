"""Compiled inner loops for split evaluation."""

import math

import numpy as np
from numba import njit

_SQRT1_2 = 1.0 / math.sqrt(2.0)


@njit(cache=True, inline="always")
def _xlog2x(v):
    return v * math.log2(v) if v > 0.0 else 0.0


@njit(cache=True)
def best_gaussian_splits(n, mean, m2, lo, hi, zq, min_branch_frac):
    """Score quantile thresholds of each feature's pooled Gaussian.

    Arrays ``mean``, ``m2``, ``lo``, ``hi`` are (classes, features). The
    candidates for feature ``j`` are ``mu_j + sd_j * zq`` where ``mu_j`` and
    ``sd_j`` are the moments of all classes pooled; class left-fractions
    come from the per-class Gaussians clipped by observed min/max. Returns
    best information gain, threshold and per-class left-fraction for each
    feature; features without a valid candidate get gain ``-inf``.
    """
    c, k = mean.shape
    q = zq.shape[0]
    total = 0.0
    parent = 0.0
    for y in range(c):
        total += n[y]
        parent += _xlog2x(n[y])
    h_parent = math.log2(total) - parent / total
    sd = np.zeros((c, k))
    for y in range(c):
        if n[y] > 1.0:
            for j in range(k):
                v = m2[y, j] / (n[y] - 1.0)
                sd[y, j] = math.sqrt(v) if v > 0.0 else 0.0
    best_gain = np.full(k, -np.inf)
    best_thr = np.zeros(k)
    best_frac = np.zeros((k, c))
    frac = np.zeros(c)
    min_w = min_branch_frac * total
    for j in range(k):
        mu = 0.0
        for y in range(c):
            mu += n[y] * mean[y, j]
        mu /= total
        ss = 0.0
        for y in range(c):
            d = mean[y, j] - mu
            ss += m2[y, j] + n[y] * d * d
        pooled_sd = math.sqrt(ss / (total - 1.0)) if total > 1.0 and ss > 0.0 else 0.0
        for qi in range(q):
            t = mu + pooled_sd * zq[qi]
            wl = 0.0
            sl = 0.0
            sr = 0.0
            for y in range(c):
                if n[y] <= 0.0:
                    frac[y] = 0.0
                    continue
                if t < lo[y, j]:
                    f = 0.0
                elif t >= hi[y, j]:
                    f = 1.0
                elif sd[y, j] > 0.0:
                    f = 0.5 * math.erfc(-(t - mean[y, j]) / sd[y, j] * _SQRT1_2)
                else:
                    f = 0.5
                frac[y] = f
                left = f * n[y]
                wl += left
                sl += _xlog2x(left)
                sr += _xlog2x(n[y] - left)
            wr = total - wl
            if wl < min_w or wr < min_w:
                continue
            gain = h_parent - (_xlog2x(wl) - sl + _xlog2x(wr) - sr) / total
            if gain > best_gain[j]:
                best_gain[j] = gain
                best_thr[j] = t
                for y in range(c):
                    best_frac[j, y] = frac[y]
    return best_gain, best_thr, best_frac
