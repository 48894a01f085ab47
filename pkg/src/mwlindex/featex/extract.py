"""Feature extraction from index series into a labelled FeatureMatrix."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..bandindex import IndexSeries
from ..records import Condition, FeatureMatrix, WorkloadClass
from .catalog import GROUPS_BY_NAME, FeatureCatalog, full_catalog

log = logging.getLogger(__name__)

MIN_LENGTH = 16


@dataclass
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray
    degenerate: np.ndarray     # True where the raw value was NaN/Inf and was replaced by 0

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


def extract_features(series: IndexSeries | np.ndarray, catalog: FeatureCatalog | None = None,
                     sampling_rate: float = 1.0) -> FeatureVector:
    """Compute every catalog feature on the raw series.

    Non-finite results (zero variance, empty spectrum, log of zero) are
    replaced by 0 and marked in ``degenerate``.
    """
    catalog = full_catalog() if catalog is None else catalog
    x = np.asarray(series.values if isinstance(series, IndexSeries) else series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if len(x) < MIN_LENGTH:
        raise ValueError(f"series of length {len(x)} too short; need at least {MIN_LENGTH}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    cache: dict[str, np.ndarray] = {}
    raw = np.empty(len(catalog))
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for i, f in enumerate(catalog):
            if f.group not in cache:
                cache[f.group] = GROUPS_BY_NAME[f.group].compute(x, sampling_rate)
            raw[i] = cache[f.group][0 if f.position is None else f.position]
    bad = ~np.isfinite(raw)
    return FeatureVector(catalog.names, np.where(bad, 0.0, raw), bad)


@dataclass
class ExtractionReport:
    degenerate_cells: list[dict] = field(default_factory=list)
    dropped: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"n_degenerate_cells": len(self.degenerate_cells), "degenerate_cells": self.degenerate_cells,
                "n_dropped": len(self.dropped), "dropped": self.dropped}


def extract_all(series_set: Sequence[IndexSeries], labels: Mapping[tuple[int, str], WorkloadClass | None],
                catalog: FeatureCatalog | None = None,
                sampling_rate: float = 1.0) -> tuple[FeatureMatrix, ExtractionReport]:
    """One labelled row per (subject, condition, index).

    ``labels`` maps ``(subject_id, condition value)`` to a class; series
    without a class (no rating, or a rating of 5 given as None) are dropped
    and listed in the report.
    """
    catalog = full_catalog() if catalog is None else catalog
    report = ExtractionReport()
    keys, rows, ys = [], [], []
    for s in series_set:
        cond = Condition.parse(s.condition).value
        label = labels.get((s.subject_id, cond))
        if label is None:
            reason = "no class (missing rating or neutral score)"
            log.info("dropping subject %s %s %s: %s", s.subject_id, cond, s.index_id, reason)
            report.dropped.append({"subject": s.subject_id, "condition": cond, "index_id": s.index_id,
                                   "reason": reason})
            continue
        fv = extract_features(s, catalog, sampling_rate)
        for j in np.flatnonzero(fv.degenerate):
            report.degenerate_cells.append({"subject": s.subject_id, "condition": cond,
                                            "index_id": s.index_id, "feature": fv.names[j]})
        keys.append((s.subject_id, cond, s.index_id))
        rows.append(fv.values)
        ys.append(int(WorkloadClass.parse(label)))
    if not rows:
        warnings.warn("no labelled series left; feature matrix is empty", stacklevel=2)
        return FeatureMatrix.empty(catalog.names), report
    sid, cond, idx = zip(*keys)
    fm = FeatureMatrix(np.array(sid), np.array(cond, dtype=object), np.array(idx, dtype=object),
                       catalog.names, np.vstack(rows), np.array(ys))
    return fm, report
