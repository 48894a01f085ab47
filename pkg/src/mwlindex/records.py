"""Core record types shared across the pipeline stages."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np


class Condition(str, enum.Enum):
    REST = "Rest"
    SIMKAP = "Simkap"

    @classmethod
    def parse(cls, value) -> "Condition":
        if isinstance(value, Condition):
            return value
        text = str(value).strip().lower()
        for member in cls:
            if member.value.lower() == text:
                return member
        aliases = {"lo": cls.REST, "hi": cls.SIMKAP}
        if text in aliases:
            return aliases[text]
        raise ValueError(f"unknown condition {value!r}")


class WorkloadClass(enum.IntEnum):
    """Binary workload label. SuperOptimal is the positive class."""

    SUBOPTIMAL = 0
    SUPEROPTIMAL = 1

    @property
    def label(self) -> str:
        return "Suboptimal" if self is WorkloadClass.SUBOPTIMAL else "SuperOptimal"

    @classmethod
    def parse(cls, value) -> "WorkloadClass":
        if isinstance(value, WorkloadClass):
            return value
        text = str(value).strip().lower()
        if text in ("0", "suboptimal"):
            return cls.SUBOPTIMAL
        if text in ("1", "superoptimal"):
            return cls.SUPEROPTIMAL
        raise ValueError(f"unknown workload class {value!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EegRecording:
    """One subject/condition recording, samples laid out as (n_samples, n_channels)."""

    subject_id: int
    condition: Condition
    samples: np.ndarray
    sampling_rate_hz: float
    channel_names: tuple[str, ...]

    def __post_init__(self):
        samples = _frozen(self.samples)
        if samples.ndim != 2:
            raise ValueError(f"samples must be 2-D (n_samples, n_channels), got shape {samples.shape}")
        names = tuple(str(c) for c in self.channel_names)
        if len(names) != samples.shape[1]:
            raise ValueError(f"{len(names)} channel names for {samples.shape[1]} columns")
        if len(set(names)) != len(names):
            raise ValueError("channel names must be unique")
        if not np.all(np.isfinite(samples)):
            raise ValueError("recording contains non-finite samples")
        if not self.sampling_rate_hz > 0:
            raise ValueError("sampling rate must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "channel_names", names)
        object.__setattr__(self, "condition", Condition.parse(self.condition))
        object.__setattr__(self, "subject_id", int(self.subject_id))
        object.__setattr__(self, "sampling_rate_hz", float(self.sampling_rate_hz))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sampling_rate_hz

    def channel_index(self, name: str) -> int:
        try:
            return self.channel_names.index(name)
        except ValueError:
            raise KeyError(f"channel {name!r} not in recording (subject {self.subject_id}, "
                           f"{self.condition.value})") from None

    def with_samples(self, samples: np.ndarray) -> "EegRecording":
        return replace(self, samples=samples)


@dataclass(frozen=True)
class Rating:
    subject_id: int
    condition: Condition
    score: int

    def __post_init__(self):
        object.__setattr__(self, "condition", Condition.parse(self.condition))
        if int(self.score) != self.score or not 1 <= self.score <= 9:
            raise ValueError(f"rating score must be an integer in [1, 9], got {self.score!r}")
        object.__setattr__(self, "score", int(self.score))


@dataclass
class FeatureMatrix:
    """Rows keyed by (subject, condition, index) with named feature columns and labels."""

    subject_ids: np.ndarray
    conditions: np.ndarray
    index_ids: np.ndarray
    feature_names: tuple[str, ...]
    values: np.ndarray
    labels: np.ndarray
    synthetic: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.subject_ids)
        self.subject_ids = np.asarray(self.subject_ids, dtype=np.int64).reshape(n)
        self.conditions = np.array([Condition.parse(c).value for c in self.conditions], dtype=object)
        self.index_ids = np.array([str(i) for i in self.index_ids], dtype=object)
        self.feature_names = tuple(str(f) for f in self.feature_names)
        self.values = np.asarray(self.values, dtype=float).reshape(n, len(self.feature_names))
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(n)
        if self.synthetic is None:
            self.synthetic = np.zeros(n, dtype=bool)
        self.synthetic = np.asarray(self.synthetic, dtype=bool).reshape(n)
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("feature names must be unique")
        if len(self.conditions) != n or len(self.index_ids) != n:
            raise ValueError("row key arrays differ in length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature matrix contains non-finite values")
        if not np.all(np.isin(self.labels, (0, 1))):
            raise ValueError("labels must be 0 (Suboptimal) or 1 (SuperOptimal)")
        keys = set(self.row_keys())
        if len(keys) != n:
            raise ValueError("row keys (subject, condition, index) must be unique")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def row_keys(self) -> list[tuple[int, str, str]]:
        return list(zip(self.subject_ids.tolist(), self.conditions.tolist(), self.index_ids.tolist()))

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.feature_names.index(name)]

    def select_columns(self, names: Sequence[str]) -> "FeatureMatrix":
        idx = [self.feature_names.index(n) for n in names]
        return replace(self, feature_names=tuple(names), values=self.values[:, idx])

    def take(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows)
        return FeatureMatrix(self.subject_ids[rows], self.conditions[rows], self.index_ids[rows],
                             self.feature_names, self.values[rows], self.labels[rows],
                             self.synthetic[rows])

    @classmethod
    def empty(cls, feature_names: Sequence[str]) -> "FeatureMatrix":
        return cls(np.zeros(0, int), np.zeros(0, object), np.zeros(0, object), tuple(feature_names),
                   np.zeros((0, len(feature_names))), np.zeros(0, int))

    @classmethod
    def concat(cls, parts: Sequence["FeatureMatrix"]) -> "FeatureMatrix":
        names = parts[0].feature_names
        for p in parts[1:]:
            if p.feature_names != names:
                raise ValueError("cannot concatenate feature matrices with different columns")
        return cls(np.concatenate([p.subject_ids for p in parts]),
                   np.concatenate([p.conditions for p in parts]),
                   np.concatenate([p.index_ids for p in parts]),
                   names,
                   np.vstack([p.values for p in parts]),
                   np.concatenate([p.labels for p in parts]),
                   np.concatenate([p.synthetic for p in parts]))
