"""Cluster band powers and the ten mental-workload index series.

Each recording is cut into non-overlapping 1 s windows.  For every window and
channel a single Hann-tapered periodogram is computed; the band power is the
mean PSD over the bins ``f_lo <= f < f_hi``.  Cluster power is the mean band
power over the cluster's electrodes, and the ratio indexes divide the parietal
alpha cluster by a frontal theta cluster (and vice versa).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .records import Condition, EegRecording

THETA = (4.0, 8.0)
ALPHA = (8.0, 12.0)
EPSILON = 1e-12


@dataclass(frozen=True)
class ClusterSpec:
    name: str
    band: tuple[float, float]
    electrodes: tuple[str, ...]

    def __post_init__(self):
        if not self.electrodes:
            raise ValueError(f"cluster {self.name} has no electrodes")


CLUSTERS = {
    "c1-theta": ClusterSpec("c1-theta", THETA, ("AF3", "AF4", "F3", "F4", "F7", "F8")),
    "c2-theta": ClusterSpec("c2-theta", THETA, ("F3", "F4")),
    "c3-theta": ClusterSpec("c3-theta", THETA, ("F3", "F4", "F7", "F8")),
    "c-alpha": ClusterSpec("c-alpha", ALPHA, ("P7", "P8")),
}

INDEX_IDS = ("c1-theta", "c2-theta", "c3-theta", "c-alpha",
             "at-1", "at-2", "at-3", "ta-1", "ta-2", "ta-3")
RATIO_INDEXES = INDEX_IDS[4:]
CLUSTER_INDEXES = INDEX_IDS[:4]


@dataclass(frozen=True)
class IndexSeries:
    index_id: str
    subject_id: int
    condition: Condition
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "condition", Condition.parse(self.condition))


def segment_windows(rec: EegRecording, window_s: float = 1.0) -> np.ndarray:
    """Non-overlapping windows as an array of shape (n_windows, window_len, n_channels).

    The trailing partial window is dropped.
    """
    win = int(round(window_s * rec.sampling_rate_hz))
    if win < 1 or win > rec.n_samples:
        raise ValueError(f"window of {window_s} s longer than the {rec.duration_s:.3f} s recording")
    n_win = rec.n_samples // win
    return rec.samples[:n_win * win].reshape(n_win, win, rec.n_channels)


def _hann(n: int) -> np.ndarray:
    # periodic Hann, the usual choice for spectral analysis
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)


def periodogram(x: np.ndarray, fs: float, axis: int = -1) -> tuple[np.ndarray, np.ndarray]:
    """One-sided Hann periodogram PSD (units^2/Hz) along ``axis``."""
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    n = x.shape[-1]
    w = _hann(n)
    spec = np.fft.rfft(x * w, axis=-1)
    psd = np.abs(spec) ** 2 / (fs * np.sum(w ** 2))
    if n % 2 == 0:
        psd[..., 1:-1] *= 2
    else:
        psd[..., 1:] *= 2
    freqs = np.arange(psd.shape[-1]) * fs / n
    return freqs, np.moveaxis(psd, -1, axis)


def _band_mask(freqs: np.ndarray, fs: float, band: tuple[float, float]) -> np.ndarray:
    lo, hi = band
    if lo < 0 or hi <= lo or hi > fs / 2:
        raise ValueError(f"band [{lo}, {hi}) Hz outside the 0-{fs / 2} Hz Nyquist range")
    mask = (freqs >= lo) & (freqs < hi)
    if not mask.any():
        raise ValueError(f"no frequency bins in band [{lo}, {hi}) Hz")
    return mask


def band_power(window: np.ndarray, sampling_rate_hz: float, band: tuple[float, float]) -> float:
    """Mean PSD over the half-open band for one channel's window, floored at 1e-12."""
    window = np.asarray(window, dtype=float)
    if window.ndim != 1:
        raise ValueError("band_power expects a single channel")
    if len(window) < sampling_rate_hz:
        raise ValueError("window must span at least 1 s")
    freqs, psd = periodogram(window, sampling_rate_hz)
    return float(max(psd[_band_mask(freqs, sampling_rate_hz, band)].mean(), EPSILON))


def band_powers(windows: np.ndarray, sampling_rate_hz: float, band: tuple[float, float]) -> np.ndarray:
    """Vectorised band power for windows shaped (n_windows, window_len, n_channels)."""
    if windows.shape[1] < sampling_rate_hz:
        raise ValueError("window must span at least 1 s")
    freqs, psd = periodogram(windows, sampling_rate_hz, axis=1)
    mask = _band_mask(freqs, sampling_rate_hz, band)
    return np.maximum(psd[:, mask, :].mean(axis=1), EPSILON)


def _electrode_columns(spec: ClusterSpec, channel_names: Sequence[str]) -> list[int]:
    missing = [e for e in spec.electrodes if e not in channel_names]
    if missing:
        raise KeyError(f"cluster {spec.name}: electrodes {missing} missing from recording")
    return [list(channel_names).index(e) for e in spec.electrodes]


def cluster_power(window: np.ndarray, spec: ClusterSpec, sampling_rate_hz: float,
                  channel_names: Sequence[str]) -> float:
    """Mean band power over the cluster electrodes for one (window_len, n_channels) window."""
    cols = _electrode_columns(spec, channel_names)
    return float(np.mean([band_power(window[:, c], sampling_rate_hz, spec.band) for c in cols]))


def cluster_series(rec: EegRecording, spec: ClusterSpec, window_s: float = 1.0) -> np.ndarray:
    cols = _electrode_columns(spec, rec.channel_names)
    windows = segment_windows(rec, window_s)[:, :, cols]
    return band_powers(windows, rec.sampling_rate_hz, spec.band).mean(axis=1)


def compute_indexes(rec: EegRecording, window_s: float = 1.0,
                    clusters: dict[str, ClusterSpec] | None = None) -> list[IndexSeries]:
    """The ten index series (four clusters, three alpha/theta and three theta/alpha ratios)."""
    clusters = CLUSTERS if clusters is None else clusters
    power = {name: cluster_series(rec, spec, window_s) for name, spec in clusters.items()}
    alpha = power["c-alpha"]
    values = dict(power)
    for k in (1, 2, 3):
        theta = power[f"c{k}-theta"]
        values[f"at-{k}"] = alpha / theta
        values[f"ta-{k}"] = theta / alpha
    return [IndexSeries(i, rec.subject_id, rec.condition, values[i]) for i in INDEX_IDS]


def write_index_csv(series: Iterable[IndexSeries], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["subject", "condition", "index_id", "window", "value"])
        for s in series:
            for k, v in enumerate(s.values):
                w.writerow([s.subject_id, s.condition.value, s.index_id, k, repr(float(v))])


def read_index_csv(path) -> list[IndexSeries]:
    groups: dict[tuple, list[tuple[int, float]]] = {}
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            key = (int(row["subject"]), row["condition"], row["index_id"])
            groups.setdefault(key, []).append((int(row["window"]), float(row["value"])))
    out = []
    for (sid, cond, idx), items in groups.items():
        items.sort()
        out.append(IndexSeries(idx, sid, cond, np.array([v for _, v in items])))
    return out
