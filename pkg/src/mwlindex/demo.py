"""Deterministic synthetic EEG cohort in the STEW layout.

Each recording mixes twelve narrow-band "neural" sources and one eye-blink
source into the 14 STEW channels through a fixed head model, plus a little
sensor noise.  Thirteen sources keep the average-referenced data fully
separable by ICA.  Recordings rated SuperOptimal have their frontal theta
source power multiplied by ``theta_gain`` (1.5 = +50%).

Only the theta and alpha sources sit inside 4-12 Hz; the remaining sources
occupy 13-42 Hz, so the theta gain is not diluted by unrelated in-band
activity.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dataio import (STEW_CHANNELS, STEW_N_SAMPLES, STEW_SAMPLING_RATE, DatasetManifest, ManifestEntry,
                     map_rating_to_class, write_ratings, write_recording)
from .records import Condition, EegRecording, Rating, WorkloadClass

# (centre frequency Hz, half bandwidth Hz); index 0 is frontal theta, index 1 parietal alpha
SOURCE_BANDS = ((6.0, 1.5), (10.0, 1.5), (14.0, 1.0), (16.5, 1.0), (19.0, 1.2), (21.5, 1.2),
                (24.0, 1.2), (27.0, 1.5), (30.0, 1.5), (33.0, 1.5), (36.5, 2.0), (40.0, 2.0))
THETA_SOURCE, ALPHA_SOURCE = 0, 1

_PATTERNS = {
    "theta": {"AF3": 1.0, "AF4": 1.0, "F3": 1.0, "F4": 1.0, "F7": 0.9, "F8": 0.9, "FC5": 0.5, "FC6": 0.5,
              "T7": 0.2, "T8": 0.2},
    "alpha": {"P7": 1.0, "P8": 1.0, "O1": 0.8, "O2": 0.8, "T7": 0.3, "T8": 0.3},
    "blink": {"AF3": 1.0, "AF4": 1.0, "F7": 0.7, "F8": 0.7, "F3": 0.5, "F4": 0.5, "FC5": 0.2, "FC6": 0.2},
}


@dataclass(frozen=True)
class DemoSpec:
    n_subjects: int = 48
    seed: int = 0
    n_samples: int = STEW_N_SAMPLES
    sampling_rate_hz: float = STEW_SAMPLING_RATE
    theta_gain: float = 1.5
    subject_sd: float = 0.015
    burst_depth: float = 0.5        # sd of the log amplitude envelope of the background sources
    index_burst_depth: float = 0.25  # same for the theta and alpha sources
    blink_rate_hz: float = 0.25
    blink_amplitude: float = 6.0
    sensor_noise: float = 0.02
    rating_mode: str = "mixed"      # "mixed": per-condition ratings incl. some 5s; "subject": one class per subject

    def __post_init__(self):
        if self.n_subjects < 4:
            raise ValueError("a demo cohort needs at least 4 subjects")
        if self.rating_mode not in ("mixed", "subject"):
            raise ValueError("rating_mode must be 'mixed' or 'subject'")


def head_model(seed: int = 0) -> np.ndarray:
    """Fixed (14 channels, 13 sources) mixing matrix; the last column is the blink."""
    rng = np.random.default_rng([seed, 7919])
    n_ch = len(STEW_CHANNELS)
    a = rng.normal(0, 0.5, size=(n_ch, len(SOURCE_BANDS) + 1))
    for col, key in ((THETA_SOURCE, "theta"), (ALPHA_SOURCE, "alpha"), (len(SOURCE_BANDS), "blink")):
        a[:, col] = 0.05 * rng.normal(size=n_ch)
        for ch, w in _PATTERNS[key].items():
            a[STEW_CHANNELS.index(ch), col] += w
    return a


def band_noise(rng, n: int, fs: float, centre: float, half_width: float) -> np.ndarray:
    """Unit-variance Gaussian noise band-limited to ``centre +- half_width`` by FFT masking."""
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1 / fs)
    spec[np.abs(f - centre) > half_width] = 0
    x = np.fft.irfft(spec, n)
    return x / x.std()


def pink_noise(rng, n: int, fs: float) -> np.ndarray:
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1 / fs)
    spec[1:] /= np.sqrt(f[1:])
    spec[0] = 0
    x = np.fft.irfft(spec, n)
    return x / x.std()


def bursty_source(rng, n: int, fs: float, centre: float, half_width: float, depth: float = 0.5) -> np.ndarray:
    """Band-limited oscillation with a slowly varying log-normal envelope, unit variance."""
    carrier = band_noise(rng, n, fs, centre, half_width)
    envelope = np.exp(depth * band_noise(rng, n, fs, 0.0, 0.5))
    x = carrier * envelope + 0.2 * pink_noise(rng, n, fs)
    return x / x.std()


def blink_signal(rng, n: int, fs: float, rate_hz: float) -> np.ndarray:
    """Sum of Gaussian bumps (sd 0.12 s) at Poisson times."""
    t = np.arange(n) / fs
    n_blinks = rng.poisson(rate_hz * n / fs)
    x = np.zeros(n)
    for c in np.sort(rng.uniform(0, n / fs, n_blinks)):
        x += rng.uniform(0.7, 1.3) * np.exp(-0.5 * ((t - c) / 0.12) ** 2)
    return x


def demo_ratings(spec: DemoSpec) -> list[Rating]:
    rng = np.random.default_rng([spec.seed, 1])
    out = []
    for s in range(1, spec.n_subjects + 1):
        if spec.rating_mode == "subject":
            high = s % 2 == 0
            rest = int(rng.integers(6, 10)) if high else int(rng.integers(1, 5))
            load = int(rng.integers(6, 10)) if high else int(rng.integers(1, 5))
        else:
            rest = int(rng.integers(1, 6))
            load = int(rng.integers(3, 10))
        out.append(Rating(s, Condition.REST, rest))
        out.append(Rating(s, Condition.SIMKAP, load))
    return out


@dataclass
class RecordingParts:
    neural: np.ndarray     # (n_samples, n_channels) brain sources only
    blink: np.ndarray      # blink contribution
    noise: np.ndarray      # sensor noise


def synth_recording(spec: DemoSpec, subject_id: int, condition, superoptimal: bool,
                    mixing: np.ndarray | None = None, blink: bool = True,
                    return_parts: bool = False):
    """One recording; optionally also its neural, blink and noise parts."""
    cond = Condition.parse(condition)
    mixing = head_model(spec.seed) if mixing is None else mixing
    rng = np.random.default_rng([spec.seed, subject_id, 0 if cond is Condition.REST else 1])
    subj_rng = np.random.default_rng([spec.seed, subject_id, 99])
    n, fs = spec.n_samples, spec.sampling_rate_hz
    gains = np.exp(spec.subject_sd * subj_rng.standard_normal(len(SOURCE_BANDS)))
    if superoptimal:
        gains[THETA_SOURCE] *= np.sqrt(spec.theta_gain)
    depth = [spec.index_burst_depth if j in (THETA_SOURCE, ALPHA_SOURCE) else spec.burst_depth
             for j in range(len(SOURCE_BANDS))]
    sources = np.column_stack([g * bursty_source(rng, n, fs, c, w, d)
                               for g, (c, w), d in zip(gains, SOURCE_BANDS, depth)])
    neural = sources @ mixing[:, :len(SOURCE_BANDS)].T
    b = spec.blink_amplitude * blink_signal(rng, n, fs, spec.blink_rate_hz) if blink else np.zeros(n)
    blink_part = np.outer(b, mixing[:, -1])
    noise = spec.sensor_noise * rng.standard_normal(neural.shape)
    rec = EegRecording(subject_id, cond, neural + blink_part + noise, fs, STEW_CHANNELS)
    if return_parts:
        return rec, RecordingParts(neural, blink_part, noise)
    return rec


def make_cohort(spec: DemoSpec) -> tuple[list[EegRecording], list[Rating]]:
    ratings = demo_ratings(spec)
    mixing = head_model(spec.seed)
    recs = []
    for r in ratings:
        cls = map_rating_to_class(r.score)
        recs.append(synth_recording(spec, r.subject_id, r.condition, cls is WorkloadClass.SUPEROPTIMAL, mixing))
    return recs, ratings


def write_cohort(spec: DemoSpec, out_dir) -> Path:
    """Write the cohort as STEW-style text files plus ratings and a manifest; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    recs, ratings = make_cohort(spec)
    entries = []
    for rec in recs:
        name = f"sub{rec.subject_id:02d}_{'lo' if rec.condition is Condition.REST else 'hi'}.txt"
        write_recording(rec, out / name)
        entries.append(ManifestEntry(name, rec.subject_id, rec.condition))
    write_ratings(ratings, out / "ratings.txt")
    manifest = DatasetManifest(root=Path("."), entries=entries, ratings_path=Path("ratings.txt"),
                               sampling_rate_hz=spec.sampling_rate_hz, channel_names=STEW_CHANNELS,
                               n_samples=spec.n_samples)
    path = out / "manifest.json"
    manifest.save(path)
    (out / "demo_spec.json").write_text(json.dumps(asdict(spec), indent=1, sort_keys=True) + "\n")
    return path
