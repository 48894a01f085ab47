"""Statistical-domain features (distribution shape, order statistics, ECDF, histogram).

Moments use population (ddof=0) conventions; kurtosis is Fisher (excess)
and skewness the biased sample skewness.  Zero-variance inputs give NaN for
the shape statistics.
"""

from __future__ import annotations

import numpy as np


def ecdf_values(x: np.ndarray, n_points: int = 10) -> np.ndarray:
    """Empirical CDF evaluated at the first ``n_points`` sorted samples."""
    xs = np.sort(x)
    return np.searchsorted(xs, xs[:n_points], side="right") / len(xs)


def ecdf_percentile(x: np.ndarray, percentiles=(0.2, 0.8)) -> np.ndarray:
    """Largest sorted sample whose rank fraction i/n does not exceed each percentile.

    Falls back to the smallest sample when even 1/n exceeds the percentile.
    """
    xs = np.sort(x)
    frac = np.arange(1, len(xs) + 1) / len(xs)
    out = []
    for p in percentiles:
        hit = np.flatnonzero(frac <= p)
        out.append(xs[hit[-1]] if hit.size else xs[0])
    return np.array(out, dtype=float)


def ecdf_percentile_count(x: np.ndarray, percentiles=(0.2, 0.8)) -> np.ndarray:
    """Number of samples at or below each :func:`ecdf_percentile` value."""
    x = np.asarray(x)
    return np.array([np.sum(x <= v) for v in ecdf_percentile(x, percentiles)], dtype=float)


def histogram(x: np.ndarray, n_bins: int = 10) -> np.ndarray:
    """Counts in ``n_bins`` equal-width bins over [min, max]; a constant series fills bin 0."""
    lo, hi = float(np.min(x)), float(np.max(x))
    if hi == lo:
        out = np.zeros(n_bins)
        out[0] = len(x)
        return out
    return np.histogram(x, bins=n_bins, range=(lo, hi))[0].astype(float)


def interquartile_range(x) -> float:
    q1, q3 = np.percentile(x, [25, 75])
    return float(q3 - q1)


def kurtosis(x) -> float:
    d = x - np.mean(x)
    m2 = np.mean(d ** 2)
    return float("nan") if m2 == 0 else float(np.mean(d ** 4) / m2 ** 2 - 3.0)


def skewness(x) -> float:
    d = x - np.mean(x)
    m2 = np.mean(d ** 2)
    return float("nan") if m2 == 0 else float(np.mean(d ** 3) / m2 ** 1.5)


def mean_abs_deviation(x) -> float:
    return float(np.mean(np.abs(x - np.mean(x))))


def median_abs_deviation(x) -> float:
    return float(np.median(np.abs(x - np.median(x))))


def rms(x) -> float:
    return float(np.sqrt(np.mean(np.square(x))))
