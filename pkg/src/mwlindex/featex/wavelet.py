"""Continuous wavelet transform (Ricker wavelet) and the per-scale wavelet features."""

from __future__ import annotations

import numpy as np

DEFAULT_WIDTHS = tuple(range(1, 10))


def ricker(points: int, a: float) -> np.ndarray:
    """Mexican-hat wavelet of ``points`` samples centred on the array midpoint."""
    amp = 2.0 / (np.sqrt(3.0 * a) * np.pi ** 0.25)
    t = np.arange(points) - (points - 1.0) / 2
    tsq = (t / a) ** 2
    return amp * (1.0 - tsq) * np.exp(-tsq / 2)


def cwt(x: np.ndarray, widths=DEFAULT_WIDTHS) -> np.ndarray:
    """Ricker CWT, shape (n_widths, n).

    Each row is the 'same'-mode convolution of ``x`` with a Ricker wavelet of
    ``min(10 * width, n)`` samples (the wavelet is symmetric, so convolution
    and correlation agree).
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((len(widths), len(x)))
    for i, w in enumerate(widths):
        psi = ricker(min(10 * w, len(x)), w)
        out[i] = np.convolve(x, psi[::-1], mode="same")
    return out


def wavelet_abs_mean(x, widths=DEFAULT_WIDTHS) -> np.ndarray:
    return np.abs(np.mean(cwt(x, widths), axis=1))


def wavelet_energy(x, widths=DEFAULT_WIDTHS) -> np.ndarray:
    """Mean squared coefficient per scale."""
    return np.mean(cwt(x, widths) ** 2, axis=1)


def wavelet_std(x, widths=DEFAULT_WIDTHS) -> np.ndarray:
    return np.std(cwt(x, widths), axis=1)


def wavelet_var(x, widths=DEFAULT_WIDTHS) -> np.ndarray:
    return np.var(cwt(x, widths), axis=1)


def wavelet_entropy(x, widths=DEFAULT_WIDTHS) -> float:
    """Shannon entropy (nats) of the relative energy distribution across scales.

    NaN when every coefficient is zero.
    """
    e = np.sum(cwt(x, widths) ** 2, axis=1)
    total = e.sum()
    if total == 0:
        return float("nan")
    p = e / total
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))
