"""Denoising: average reference, 1 Hz high-pass, ICA and automatic artefact rejection.

Bad components are found from four per-component statistics, each z-scored
across the components of one recording; a component is rejected when any of
its z-scores leaves [-3, 3].

Statistic definitions (all pluggable through ``component_stats(statistics=...)``):

spectral_kurtosis
    excess kurtosis of the Welch PSD values between 1 and 45 Hz.
slope
    least-squares slope of log10 power against log10 frequency, 1-45 Hz.
hurst
    rescaled-range Hurst exponent over dyadic windows from 16 samples to n/4.
gradient_median
    median of the absolute first differences of the component time course.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import signal

from .ica import IcaDecomposition, fast_ica
from .records import EegRecording

STAT_NAMES = ("spectral_kurtosis", "slope", "hurst", "gradient_median")
PSD_BAND = (1.0, 45.0)


def average_rereference(rec: EegRecording) -> EegRecording:
    if rec.n_channels < 2:
        raise ValueError("average re-reference needs at least two channels")
    x = rec.samples
    return rec.with_samples(x - x.mean(axis=1, keepdims=True))


def highpass_1hz(rec: EegRecording, cutoff_hz: float = 1.0, order: int = 4, pad_s: float = 1.0) -> EegRecording:
    """Zero-phase Butterworth high-pass, applied forward and backward.

    Each channel is reflect-padded by ``pad_s`` seconds at both ends before
    filtering and trimmed afterwards.
    """
    fs = rec.sampling_rate_hz
    if fs <= 2 * cutoff_hz:
        raise ValueError(f"sampling rate {fs} Hz too low for a {cutoff_hz} Hz high-pass")
    sos = signal.butter(order, cutoff_hz, btype="highpass", fs=fs, output="sos")
    x = rec.samples
    pad = min(int(round(pad_s * fs)), x.shape[0] - 1)
    xp = np.pad(x, ((pad, pad), (0, 0)), mode="reflect") if pad > 0 else x
    y = signal.sosfiltfilt(sos, xp, axis=0, padlen=0)
    return rec.with_samples(y[pad:pad + x.shape[0]])


def welch_psd(x: np.ndarray, fs: float) -> tuple[np.ndarray, np.ndarray]:
    nperseg = int(min(len(x), 2 * fs))
    return signal.welch(x, fs=fs, nperseg=nperseg)


def _band(freqs, fs):
    lo, hi = PSD_BAND
    return (freqs >= lo) & (freqs <= min(hi, fs / 2))


def spectral_kurtosis(x: np.ndarray, fs: float) -> float:
    f, p = welch_psd(x, fs)
    p = p[_band(f, fs)]
    sd = p.std()
    if sd == 0:
        return float("nan")
    return float(np.mean((p - p.mean()) ** 4) / sd ** 4 - 3.0)


def spectral_slope(x: np.ndarray, fs: float) -> float:
    f, p = welch_psd(x, fs)
    m = _band(f, fs) & (p > 0)
    if m.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log10(f[m]), np.log10(p[m]), 1)[0])


def hurst_rs(x: np.ndarray, min_window: int = 16, max_window: int | None = None) -> float:
    """Rescaled-range (R/S) Hurst exponent.

    The series is cut into non-overlapping chunks at every dyadic size
    between ``min_window`` and ``max_window`` (default n/4); R/S is averaged
    over chunks and the exponent is the slope of log(R/S) on log(size).
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    max_window = n // 4 if max_window is None else max_window
    sizes = []
    s = min_window
    while s <= max_window:
        sizes.append(s)
        s *= 2
    if len(sizes) < 2:
        raise ValueError(f"series of length {n} too short for R/S estimation")
    log_s, log_rs = [], []
    for s in sizes:
        m = n // s
        seg = x[:m * s].reshape(m, s)
        dev = np.cumsum(seg - seg.mean(axis=1, keepdims=True), axis=1)
        r = dev.max(axis=1) - dev.min(axis=1)
        sd = seg.std(axis=1)
        ok = sd > 0
        if not ok.any():
            continue
        log_s.append(np.log(s))
        log_rs.append(np.log(np.mean(r[ok] / sd[ok])))
    if len(log_s) < 2:
        return float("nan")
    return float(np.polyfit(log_s, log_rs, 1)[0])


def gradient_median(x: np.ndarray, fs: float | None = None) -> float:
    return float(np.median(np.abs(np.diff(x))))


DEFAULT_STATISTICS: Mapping[str, Callable[[np.ndarray, float], float]] = {
    "spectral_kurtosis": spectral_kurtosis,
    "slope": spectral_slope,
    "hurst": lambda x, fs: hurst_rs(x),
    "gradient_median": gradient_median,
}


@dataclass
class ComponentStats:
    names: tuple[str, ...]
    raw: np.ndarray            # (n_components, n_stats)
    z: np.ndarray              # same shape
    degenerate: np.ndarray     # bool, raw statistic was not finite or had no spread

    @property
    def n_components(self) -> int:
        return self.raw.shape[0]

    def per_component(self) -> list[dict]:
        out = []
        for i in range(self.n_components):
            d = {}
            for j, name in enumerate(self.names):
                v = self.raw[i, j]
                d[name] = float(v) if np.isfinite(v) else None
                d[f"{name}_z"] = float(self.z[i, j])
            out.append(d)
        return out


def zscore_columns(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Population z-scores per column; non-finite entries and zero-spread columns give 0 and are flagged."""
    z = np.zeros_like(raw, dtype=float)
    degenerate = ~np.isfinite(raw)
    for j in range(raw.shape[1]):
        ok = ~degenerate[:, j]
        col = raw[ok, j]
        if col.size < 2:
            degenerate[:, j] = True
            continue
        sd = col.std()
        if sd == 0 or not np.isfinite(sd):
            degenerate[ok, j] = True
            continue
        z[ok, j] = (col - col.mean()) / sd
    return z, degenerate


def component_stats(dec: IcaDecomposition, sampling_rate_hz: float,
                    statistics: Mapping[str, Callable] | None = None) -> ComponentStats:
    statistics = DEFAULT_STATISTICS if statistics is None else statistics
    if dec.n_components < 2:
        raise ValueError("need at least two components to z-score statistics")
    names = tuple(statistics)
    raw = np.empty((dec.n_components, len(names)))
    for i in range(dec.n_components):
        s = dec.sources[:, i]
        for j, name in enumerate(names):
            raw[i, j] = np.nan if np.ptp(s) == 0 else statistics[name](s, sampling_rate_hz)
    z, degenerate = zscore_columns(raw)
    return ComponentStats(names, raw, z, degenerate)


def flag_bad_components(stats: ComponentStats, threshold: float = 3.0) -> frozenset[int]:
    bad = np.any(np.abs(stats.z) > threshold, axis=1)
    return frozenset(int(i) for i in np.flatnonzero(bad))


@dataclass
class RemovalReport:
    subject_id: int
    condition: str
    removed_indices: list[int]
    n_components: int
    converged: bool
    stats: ComponentStats = field(repr=False)

    @property
    def n_removed(self) -> int:
        return len(self.removed_indices)

    def to_json(self) -> dict:
        return {"subject": self.subject_id, "condition": self.condition,
                "removed_indices": list(self.removed_indices), "n_components": self.n_components,
                "ica_converged": self.converged, "per_component_stats": self.stats.per_component()}


def preprocess(rec: EegRecording, highpass_order: int = 4, cutoff_hz: float = 1.0) -> EegRecording:
    return highpass_1hz(average_rereference(rec), cutoff_hz=cutoff_hz, order=highpass_order)


def denoise(rec: EegRecording, seed: int = 0, threshold: float = 3.0, highpass_order: int = 4,
            cutoff_hz: float = 1.0, ica_tol: float = 1e-4, ica_max_iter: int = 200,
            statistics: Mapping[str, Callable] | None = None) -> tuple[EegRecording, RemovalReport]:
    """Run the full denoising chain on one recording.

    Returns the reconstructed recording (flagged components zeroed before the
    inverse ICA) and a report with the removed component indices and their
    statistics.
    """
    pre = preprocess(rec, highpass_order=highpass_order, cutoff_hz=cutoff_hz)
    dec = fast_ica(pre, seed=seed, tol=ica_tol, max_iter=ica_max_iter)
    stats = component_stats(dec, rec.sampling_rate_hz, statistics)
    bad = sorted(flag_bad_components(stats, threshold))
    clean = pre.with_samples(dec.reconstruct(zeroed=bad))
    report = RemovalReport(rec.subject_id, rec.condition.value, bad, dec.n_components, dec.converged, stats)
    return clean, report
