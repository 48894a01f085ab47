"""Temporal-domain features.  Time stamps are ``arange(n) / fs``."""

from __future__ import annotations

import numpy as np


def abs_energy(x) -> float:
    return float(np.sum(np.square(x)))


def auc(x, fs: float = 1.0) -> float:
    """Trapezoidal area ``sum 0.5 * dt * |x[i] + x[i+1]|``."""
    return float(np.sum(0.5 * np.abs(x[:-1] + x[1:]) / fs))


def autocorrelation(x) -> float:
    """Lag-1 Pearson autocorrelation; NaN if either lagged copy is constant."""
    a, b = x[:-1] - np.mean(x[:-1]), x[1:] - np.mean(x[1:])
    den = np.sqrt(np.sum(a * a) * np.sum(b * b))
    return float("nan") if den == 0 else float(np.sum(a * b) / den)


def centroid(x, fs: float = 1.0) -> float:
    """Energy-weighted mean time."""
    energy = np.square(x)
    total = energy.sum()
    if total == 0:
        return float("nan")
    return float(np.dot(np.arange(len(x)) / fs, energy) / total)


def entropy(x) -> float:
    """Shannon entropy (bits) of the distinct-value frequencies, divided by log2(n).

    NaN for a constant series (zero entropy is flagged as degenerate).
    """
    _, counts = np.unique(x, return_counts=True)
    if counts.size == 1:
        return float("nan")
    p = counts / counts.sum()
    return float(-np.sum(p * np.log2(p)) / np.log2(len(x)))


def negative_turning_points(x) -> float:
    d = np.diff(x)
    return float(np.sum((d[:-1] < 0) & (d[1:] > 0)))


def positive_turning_points(x) -> float:
    d = np.diff(x)
    return float(np.sum((d[:-1] > 0) & (d[1:] < 0)))


def neighbourhood_peaks(x, n: int = 10) -> float:
    """Samples strictly larger than every other sample within ``n`` positions on both sides."""
    x = np.asarray(x, dtype=float)
    if len(x) <= 2 * n:
        return 0.0
    core = x[n:len(x) - n]
    is_peak = np.ones(core.shape, dtype=bool)
    for k in range(1, n + 1):
        is_peak &= core > x[n - k:len(x) - n - k]
        is_peak &= core > x[n + k:len(x) - n + k]
    return float(is_peak.sum())


def signal_distance(x) -> float:
    return float(np.sum(np.sqrt(1.0 + np.diff(x) ** 2)))


def slope(x, fs: float = 1.0) -> float:
    return float(np.polyfit(np.arange(len(x)) / fs, x, 1)[0])


def total_energy(x, fs: float = 1.0) -> float:
    """Signal energy divided by the series duration ``(n - 1) / fs``."""
    return float(np.sum(np.square(x)) / ((len(x) - 1) / fs))


def zero_crossing_rate(x) -> float:
    """Sign changes per transition."""
    return float(np.count_nonzero(np.diff(np.sign(x))) / (len(x) - 1))
