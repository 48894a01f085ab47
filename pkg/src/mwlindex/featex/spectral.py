"""Spectral-domain features of an index series.

Most features work on the magnitude spectrum of the raw series,
``fmag[k] = |DFT(x)[k]|`` for ``k = 0 .. n//2 - 1`` with bin frequencies
``k * fs / n``.  Degenerate inputs (zero spectrum, zero spread) give NaN,
which the extractor maps to 0 and flags.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sp_fft
from scipy import signal


def magnitude_spectrum(x: np.ndarray, fs: float) -> tuple[np.ndarray, np.ndarray]:
    n = len(x)
    fmag = np.abs(np.fft.fft(x))[: n // 2]
    f = np.arange(n // 2) * fs / n
    return f, fmag


def hann_psd(x: np.ndarray, fs: float) -> tuple[np.ndarray, np.ndarray]:
    """Single-segment Welch estimate: mean-removed, Hann-tapered, density-scaled."""
    return signal.welch(x, fs=fs, nperseg=len(x))


def fft_mean_coeff(x: np.ndarray, fs: float = 1.0, nfft: int = 256, n_coeff: int = 76) -> np.ndarray:
    """Mean rfft magnitude of the first ``n_coeff`` bins over consecutive ``nfft``-sample segments.

    The last segment is zero-padded, so a series of at most ``nfft`` samples
    is a single padded segment.
    """
    x = np.asarray(x, dtype=float)
    n_seg = -(-len(x) // nfft)
    segs = np.zeros(n_seg * nfft)
    segs[:len(x)] = x
    return np.abs(np.fft.rfft(segs.reshape(n_seg, nfft), axis=1))[:, :n_coeff].mean(axis=0)


def fundamental_frequency(x: np.ndarray, fs: float = 1.0) -> float:
    """Frequency of the lowest non-DC spectral peak reaching 30% of the spectrum maximum."""
    f, fmag = magnitude_spectrum(x - np.mean(x), fs)
    if fmag.max() == 0:
        return float("nan")
    peaks = signal.find_peaks(fmag, height=fmag.max() * 0.3)[0]
    peaks = peaks[peaks != 0]
    return float(f[peaks.min()]) if peaks.size else 0.0


def human_range_energy(x: np.ndarray, fs: float = 1.0) -> float:
    """Share of spectral energy between 0.6 and 2.5 Hz.

    Inherited from accelerometry; for 1 Hz index series the band lies above
    Nyquist, so the value is 0 for every input.
    """
    f, fmag = magnitude_spectrum(x, fs)
    total = np.sum(fmag ** 2)
    if total == 0:
        return float("nan")
    lo, hi = np.argmin(np.abs(0.6 - f)), np.argmin(np.abs(2.5 - f))
    return float(np.sum(fmag[lo:hi] ** 2) / total)


def levinson_durbin(r: np.ndarray, order: int) -> tuple[np.ndarray, float]:
    """Prediction polynomial ``[1, a1, .., ap]`` and final error power from autocorrelations."""
    a = np.zeros(order + 1)
    a[0] = 1.0
    err = r[0]
    for m in range(1, order + 1):
        if err <= 0:
            return a, 0.0
        k = -(r[m] + np.dot(a[1:m], r[m - 1:0:-1])) / err
        a[1:m] = a[1:m] + k * a[m - 1:0:-1]
        a[m] = k
        err *= 1.0 - k * k
    return a, float(err)


def lpcc(x: np.ndarray, order: int = 12) -> np.ndarray:
    """Cepstrum of the order-``order`` all-pole model of the series.

    Autocorrelation LPC (biased estimate, Levinson-Durbin), then
    ``c0 = ln(E)`` and ``c_m = -a_m - sum_{k<m} (k/m) c_k a_{m-k}``, the real
    cepstrum of the model log power spectrum ``ln(E / |A(e^jw)|^2)``.
    Returns ``order + 1`` coefficients.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n <= order:
        raise ValueError(f"series of length {n} too short for order-{order} LPC")
    r = np.array([np.dot(x[: n - k], x[k:]) / n for k in range(order + 1)])
    out = np.full(order + 1, np.nan)
    if r[0] == 0:
        return out
    a, err = levinson_durbin(r, order)
    if err <= 0:
        return out
    c = np.zeros(order + 1)
    c[0] = np.log(err)
    for m in range(1, order + 1):
        c[m] = -a[m] - sum(k / m * c[k] * a[m - k] for k in range(1, m))
    return c


def mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def inverse_mel(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(fs: float, nfft: int, n_filters: int) -> np.ndarray:
    """Triangular filters (unit peak) equally spaced on the mel scale from 0 to Nyquist."""
    hz = inverse_mel(np.linspace(mel(0.0), mel(fs / 2), n_filters + 2))
    edges = np.floor((nfft + 1) * hz / fs)
    k = np.arange(nfft // 2 + 1)[None, :]
    left, centre, right = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        rising = np.where((k >= left) & (k < centre), (k - left) / (centre - left), 0.0)
        falling = np.where((k >= centre) & (k < right), (right - k) / (right - centre), 0.0)
    return rising + falling


def mfcc(x: np.ndarray, fs: float = 1.0, n_filters: int = 26, n_ceps: int = 12,
         nfft: int = 512, pre_emphasis: float = 0.97) -> np.ndarray:
    """Mel-frequency cepstral coefficients 1..n_ceps of the whole series.

    Pre-emphasis, power spectrum ``|rfft(y, nfft)|^2 / nfft``, mel filter
    energies floored at machine epsilon, natural log, orthonormal DCT-II.
    """
    x = np.asarray(x, dtype=float)
    y = np.append(x[0], x[1:] - pre_emphasis * x[:-1])
    power = np.abs(np.fft.rfft(y, nfft)) ** 2 / nfft
    energies = mel_filterbank(fs, nfft, n_filters) @ power
    energies = np.where(energies <= 0, np.finfo(float).eps, energies)
    return sp_fft.dct(np.log(energies), type=2, norm="ortho")[1:n_ceps + 1]


def max_power_spectrum(x: np.ndarray, fs: float = 1.0) -> float:
    sd = np.std(x)
    _, p = hann_psd(x / sd if sd > 0 else x, fs)
    return float(np.max(p))


def _cumulative_edge(fmag: np.ndarray, f: np.ndarray, fraction: float) -> float:
    cum = np.cumsum(fmag)
    if cum[-1] == 0:
        return float("nan")
    hit = np.flatnonzero(cum > cum[-1] * fraction)
    return float(f[hit[0]] if hit.size else f[np.argmax(cum)])


def max_frequency(x: np.ndarray, fs: float = 1.0) -> float:
    """Frequency below which 95% of the cumulative magnitude lies."""
    f, fmag = magnitude_spectrum(x, fs)
    return _cumulative_edge(fmag, f, 0.95)


def median_frequency(x: np.ndarray, fs: float = 1.0) -> float:
    f, fmag = magnitude_spectrum(x, fs)
    return _cumulative_edge(fmag, f, 0.50)


def power_bandwidth(x: np.ndarray, fs: float = 1.0) -> float:
    """Width of the band holding 95% of the PSD, measured from both spectrum ends."""
    sd = np.std(x)
    freq, p = hann_psd(x / sd if sd > 0 else x, fs)
    total = np.sum(p)
    if total == 0:
        return float("nan")
    f_lower = freq[np.flatnonzero(np.cumsum(p) >= total * 0.95)[0]]
    f_upper = freq[len(p) - 1 - np.flatnonzero(np.cumsum(p[::-1]) >= total * 0.95)[0]]
    return float(abs(f_upper - f_lower))


def _weights(fmag):
    s = fmag.sum()
    return None if s == 0 else fmag / s


def spectral_centroid(x: np.ndarray, fs: float = 1.0) -> float:
    f, fmag = magnitude_spectrum(x, fs)
    w = _weights(fmag)
    return float("nan") if w is None else float(np.dot(f, w))


def spectral_spread(x: np.ndarray, fs: float = 1.0) -> float:
    f, fmag = magnitude_spectrum(x, fs)
    w = _weights(fmag)
    if w is None:
        return float("nan")
    c = np.dot(f, w)
    return float(np.sqrt(np.dot((f - c) ** 2, w)))


def _spectral_moment(x, fs, power):
    f, fmag = magnitude_spectrum(x, fs)
    w = _weights(fmag)
    if w is None:
        return float("nan")
    c = np.dot(f, w)
    spread = np.sqrt(np.dot((f - c) ** 2, w))
    if spread == 0:
        return float("nan")
    return float(np.dot((f - c) ** power, w) / spread ** power)


def spectral_skewness(x: np.ndarray, fs: float = 1.0) -> float:
    return _spectral_moment(x, fs, 3)


def spectral_kurtosis(x: np.ndarray, fs: float = 1.0) -> float:
    return _spectral_moment(x, fs, 4)


def spectral_decrease(x: np.ndarray, fs: float = 1.0) -> float:
    _, fmag = magnitude_spectrum(x, fs)
    band = fmag[1:]
    if band.sum() == 0:
        return float("nan")
    k = np.arange(1, len(fmag))
    return float(np.sum((band - fmag[0]) / k) / band.sum())


def spectral_distance(x: np.ndarray, fs: float = 1.0) -> float:
    """Signed area between the cumulative magnitude and the straight line to its end value."""
    _, fmag = magnitude_spectrum(x, fs)
    cum = np.cumsum(fmag)
    line = np.linspace(0, cum[-1], len(cum))
    return float(np.sum(line - cum))


def spectral_entropy(x: np.ndarray, fs: float = 1.0) -> float:
    """Shannon entropy (bits) of the normalised power spectrum, divided by log2 of its support size."""
    _, fmag = magnitude_spectrum(x - np.mean(x), fs)
    power = fmag ** 2
    if power.sum() == 0:
        return float("nan")
    p = power / power.sum()
    # round-off leaves the demeaned DC bin at ~1e-32 instead of 0; it must not count towards the support
    p = p[p > 1e-20]
    if p.size == 1:
        return 0.0
    return float(-np.sum(p * np.log2(p)) / np.log2(p.size))


def spectral_positive_turning(x: np.ndarray, fs: float = 1.0) -> float:
    _, fmag = magnitude_spectrum(x, fs)
    d = np.diff(fmag)
    return float(np.sum((d[:-1] > 0) & (d[1:] < 0)))


def _roll(x, fs, fraction):
    f, fmag = magnitude_spectrum(x, fs)
    total = fmag.sum()
    if total == 0:
        return float("nan")
    return float(f[np.flatnonzero(np.cumsum(fmag) >= fraction * total)[0]])


def spectral_roll_off(x: np.ndarray, fs: float = 1.0) -> float:
    return _roll(x, fs, 0.95)


def spectral_roll_on(x: np.ndarray, fs: float = 1.0) -> float:
    return _roll(x, fs, 0.05)


def spectral_slope(x: np.ndarray, fs: float = 1.0) -> float:
    """Least-squares slope of the sum-normalised magnitude spectrum against frequency."""
    f, fmag = magnitude_spectrum(x, fs)
    total = fmag.sum()
    n = len(f)
    den = n * np.dot(f, f) - f.sum() ** 2
    if total == 0 or den == 0:
        return float("nan")
    return float((n * np.dot(f, fmag) - f.sum() * total) / total / den)


def spectral_variation(x: np.ndarray, fs: float = 1.0) -> float:
    """One minus the normalised correlation of adjacent magnitude bins."""
    _, fmag = magnitude_spectrum(x, fs)
    s1 = np.sum(fmag[:-1] * fmag[1:])
    s2 = np.sum(fmag[1:] ** 2)
    s3 = np.sum(fmag[:-1] ** 2)
    if s2 == 0 or s3 == 0:
        return float("nan")
    return float(1.0 - s1 / (np.sqrt(s2) * np.sqrt(s3)))
