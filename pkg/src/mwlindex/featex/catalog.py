"""The 210-entry feature catalog.

Features are organised in groups: one function per group returns either a
scalar or a fixed-length vector, and each vector element becomes a catalog
entry named ``"<group>_<k>"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import spectral as sp
from . import statistical as st
from . import temporal as tm
from . import wavelet as wv

DOMAINS = ("Spectral", "Wavelet", "Statistical", "Temporal")


@dataclass(frozen=True)
class FeatureGroup:
    name: str
    domain: str
    func: Callable = field(repr=False, compare=False)
    size: int | None = None          # None for scalar features
    parameters: dict = field(default_factory=dict, compare=False)
    uses_fs: bool = False

    def compute(self, x: np.ndarray, fs: float) -> np.ndarray:
        out = self.func(x, fs, **self.parameters) if self.uses_fs else self.func(x, **self.parameters)
        return np.atleast_1d(np.asarray(out, dtype=float))


@dataclass(frozen=True)
class FeatureDef:
    name: str
    domain: str
    group: str
    position: int | None
    parameters: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"name": self.name, "domain": self.domain, "group": self.group,
                "position": self.position, "parameters": dict(self.parameters)}


def _g(name, domain, func, size=None, uses_fs=False, **parameters):
    return FeatureGroup(name, domain, func, size, parameters, uses_fs)


def _stat(fn):
    return lambda x: fn(x)


GROUPS: tuple[FeatureGroup, ...] = (
    _g("FFT mean coefficient", "Spectral", sp.fft_mean_coeff, 76, True, nfft=256, n_coeff=76),
    _g("Fundamental frequency", "Spectral", sp.fundamental_frequency, uses_fs=True),
    _g("Human range energy", "Spectral", sp.human_range_energy, uses_fs=True),
    _g("LPCC", "Spectral", sp.lpcc, 13, order=12),
    _g("MFCC", "Spectral", sp.mfcc, 12, True, n_filters=26, n_ceps=12, nfft=512, pre_emphasis=0.97),
    _g("Maximum power spectrum", "Spectral", sp.max_power_spectrum, uses_fs=True),
    _g("Maximum frequency", "Spectral", sp.max_frequency, uses_fs=True),
    _g("Median frequency", "Spectral", sp.median_frequency, uses_fs=True),
    _g("Power bandwidth", "Spectral", sp.power_bandwidth, uses_fs=True),
    _g("Spectral centroid", "Spectral", sp.spectral_centroid, uses_fs=True),
    _g("Spectral decrease", "Spectral", sp.spectral_decrease, uses_fs=True),
    _g("Spectral distance", "Spectral", sp.spectral_distance, uses_fs=True),
    _g("Spectral entropy", "Spectral", sp.spectral_entropy, uses_fs=True),
    _g("Spectral kurtosis", "Spectral", sp.spectral_kurtosis, uses_fs=True),
    _g("Spectral positive turning points", "Spectral", sp.spectral_positive_turning, uses_fs=True),
    _g("Spectral roll-off", "Spectral", sp.spectral_roll_off, uses_fs=True),
    _g("Spectral roll-on", "Spectral", sp.spectral_roll_on, uses_fs=True),
    _g("Spectral skewness", "Spectral", sp.spectral_skewness, uses_fs=True),
    _g("Spectral slope", "Spectral", sp.spectral_slope, uses_fs=True),
    _g("Spectral spread", "Spectral", sp.spectral_spread, uses_fs=True),
    _g("Spectral variation", "Spectral", sp.spectral_variation, uses_fs=True),
    _g("Wavelet absolute mean", "Wavelet", wv.wavelet_abs_mean, 9, widths=wv.DEFAULT_WIDTHS),
    _g("Wavelet energy", "Wavelet", wv.wavelet_energy, 9, widths=wv.DEFAULT_WIDTHS),
    _g("Wavelet entropy", "Wavelet", wv.wavelet_entropy, widths=wv.DEFAULT_WIDTHS),
    _g("Wavelet standard deviation", "Wavelet", wv.wavelet_std, 9, widths=wv.DEFAULT_WIDTHS),
    _g("Wavelet variance", "Wavelet", wv.wavelet_var, 9, widths=wv.DEFAULT_WIDTHS),
    _g("ECDF", "Statistical", st.ecdf_values, 10, n_points=10),
    _g("ECDF Percentile", "Statistical", st.ecdf_percentile, 2, percentiles=(0.2, 0.8)),
    _g("ECDF Percentile Count", "Statistical", st.ecdf_percentile_count, 2, percentiles=(0.2, 0.8)),
    _g("Histogram", "Statistical", st.histogram, 10, n_bins=10),
    _g("Interquartile range", "Statistical", st.interquartile_range),
    _g("Kurtosis", "Statistical", st.kurtosis),
    _g("Max", "Statistical", _stat(np.max)),
    _g("Mean", "Statistical", _stat(np.mean)),
    _g("Mean absolute deviation", "Statistical", st.mean_abs_deviation),
    _g("Median", "Statistical", _stat(np.median)),
    _g("Median absolute deviation", "Statistical", st.median_abs_deviation),
    _g("Min", "Statistical", _stat(np.min)),
    _g("Root mean square", "Statistical", st.rms),
    _g("Skewness", "Statistical", st.skewness),
    _g("Standard deviation", "Statistical", _stat(np.std)),
    _g("Variance", "Statistical", _stat(np.var)),
    _g("Absolute energy", "Temporal", tm.abs_energy),
    _g("Area under the curve", "Temporal", tm.auc, uses_fs=True),
    _g("Autocorrelation", "Temporal", tm.autocorrelation),
    _g("Centroid", "Temporal", tm.centroid, uses_fs=True),
    _g("Entropy", "Temporal", tm.entropy),
    _g("Mean absolute diff", "Temporal", _stat(lambda x: np.mean(np.abs(np.diff(x))))),
    _g("Mean diff", "Temporal", _stat(lambda x: np.mean(np.diff(x)))),
    _g("Median absolute diff", "Temporal", _stat(lambda x: np.median(np.abs(np.diff(x))))),
    _g("Median diff", "Temporal", _stat(lambda x: np.median(np.diff(x)))),
    _g("Negative turning points", "Temporal", tm.negative_turning_points),
    _g("Neighbourhood peaks", "Temporal", tm.neighbourhood_peaks, n=10),
    _g("Peak to peak distance", "Temporal", _stat(np.ptp)),
    _g("Positive turning points", "Temporal", tm.positive_turning_points),
    _g("Signal distance", "Temporal", tm.signal_distance),
    _g("Slope", "Temporal", tm.slope, uses_fs=True),
    _g("Sum absolute diff", "Temporal", _stat(lambda x: np.sum(np.abs(np.diff(x))))),
    _g("Total energy", "Temporal", tm.total_energy, uses_fs=True),
    _g("Zero crossing rate", "Temporal", tm.zero_crossing_rate),
)

GROUPS_BY_NAME = {g.name: g for g in GROUPS}


def _json_params(params: dict) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in params.items()}


@dataclass(frozen=True)
class FeatureCatalog:
    features: tuple[FeatureDef, ...]

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        for f in self.features:
            if f.domain not in DOMAINS:
                raise ValueError(f"{f.name}: unknown domain {f.domain!r}")
            if f.group not in GROUPS_BY_NAME:
                raise ValueError(f"{f.name}: unknown feature group {f.group!r}")

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def subset(self, names: Sequence[str]) -> "FeatureCatalog":
        by_name = {f.name: f for f in self.features}
        missing = [n for n in names if n not in by_name]
        if missing:
            raise KeyError(f"features not in catalog: {missing}")
        return FeatureCatalog(tuple(by_name[n] for n in names))

    def to_json(self) -> list[dict]:
        return [f.to_dict() for f in self.features]

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def from_json(cls, items: list[dict]) -> "FeatureCatalog":
        return cls(tuple(FeatureDef(d["name"], d["domain"], d["group"], d.get("position"),
                                    d.get("parameters", {})) for d in items))

    @classmethod
    def load(cls, path) -> "FeatureCatalog":
        return cls.from_json(json.loads(Path(path).read_text()))


def full_catalog() -> FeatureCatalog:
    feats = []
    for g in GROUPS:
        params = _json_params(g.parameters)
        if g.size is None:
            feats.append(FeatureDef(g.name, g.domain, g.name, None, params))
        else:
            feats.extend(FeatureDef(f"{g.name}_{k}", g.domain, g.name, k, params) for k in range(g.size))
    return FeatureCatalog(tuple(feats))
