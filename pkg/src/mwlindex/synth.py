"""Gaussian-copula synthesis of feature rows and synthetic-data quality scores.

Quality scores are percentages, higher is better:

field correlation stability
    ``100 * (1 - mean |r_orig - r_synth| / 2)`` over all field pairs.
deep structure stability
    PCA on the standardised original (components reaching 95% variance, at
    most 5); both datasets projected; ``100 * (1 - mean JS distance)`` over
    components, using 20-bin histograms on the pooled range.
field distribution stability
    ``100 * (1 - mean JS distance)`` over per-field 20-bin histograms.

JS distances are in bits, so each lies in [0, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import special, stats

from .records import Condition, FeatureMatrix
from .select import pearson_matrix

N_BINS = 20
EIG_FLOOR = 1e-10
BANDS = ((80.0, "Excellent"), (60.0, "Good"), (40.0, "Moderate"), (20.0, "Poor"))


@dataclass(frozen=True)
class CopulaModel:
    field_names: tuple[str, ...]
    sorted_values: tuple[np.ndarray, ...]
    correlation: np.ndarray

    @property
    def n_fields(self) -> int:
        return len(self.field_names)


def normal_scores(x: np.ndarray) -> np.ndarray:
    """Column-wise ``Phi^-1(rank / (n + 1))`` with average ranks for ties."""
    n = x.shape[0]
    ranks = stats.rankdata(x, method="average", axis=0)
    return special.ndtri(ranks / (n + 1))


def nearest_correlation(r: np.ndarray, floor: float = EIG_FLOOR) -> np.ndarray:
    """Symmetrise, floor eigenvalues and rescale to a unit diagonal."""
    r = (r + r.T) / 2
    w, v = np.linalg.eigh(r)
    r = (v * np.maximum(w, floor)) @ v.T
    d = np.sqrt(np.diag(r))
    r = r / np.outer(d, d)
    np.fill_diagonal(r, 1.0)
    return r


def fit_copula(rows, field_names: Sequence[str] | None = None) -> CopulaModel:
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2 or x.shape[0] < 10:
        raise ValueError("copula fitting needs at least 10 rows")
    if x.shape[1] < 2:
        raise ValueError("copula fitting needs at least 2 fields")
    if not np.all(np.isfinite(x)):
        raise ValueError("rows contain non-finite values")
    names = tuple(field_names) if field_names is not None else tuple(f"field_{j}" for j in range(x.shape[1]))
    if len(names) != x.shape[1]:
        raise ValueError("one name per field required")
    corr = nearest_correlation(pearson_matrix(normal_scores(x)))
    return CopulaModel(names, tuple(np.sort(x[:, j]) for j in range(x.shape[1])), corr)


def generate(model: CopulaModel, n: int, seed=0) -> np.ndarray:
    """Draw ``n`` rows: correlated normals mapped through each field's step inverse ECDF."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    w, v = np.linalg.eigh(model.correlation)
    root = v * np.sqrt(np.maximum(w, 0.0))
    z = rng.standard_normal((n, model.n_fields)) @ root.T
    u = special.ndtr(z)
    out = np.empty((n, model.n_fields))
    for j, sv in enumerate(model.sorted_values):
        idx = np.minimum((u[:, j] * len(sv)).astype(np.int64), len(sv) - 1)
        out[:, j] = sv[idx]
    return out


def js_distance(p, q) -> float:
    """Jensen-Shannon divergence in bits: ``H(M) - (H(P) + H(Q)) / 2`` with ``M = (P + Q) / 2``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("histograms must have the same number of bins")
    if p.sum() <= 0 or q.sum() <= 0:
        raise ValueError("histogram has no mass")
    p, q = p / p.sum(), q / q.sum()

    def h(a):
        a = a[a > 0]
        return -np.sum(a * np.log2(a))

    return float(min(max(h((p + q) / 2) - (h(p) + h(q)) / 2, 0.0), 1.0))


def _pooled_histograms(a, b, n_bins=N_BINS):
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if hi == lo:
        return np.ones(1), np.ones(1)
    return (np.histogram(a, bins=n_bins, range=(lo, hi))[0].astype(float),
            np.histogram(b, bins=n_bins, range=(lo, hi))[0].astype(float))


def _check_pair(original, synthetic):
    o = np.asarray(original, dtype=float)
    s = np.asarray(synthetic, dtype=float)
    if o.ndim != 2 or s.ndim != 2 or o.shape[1] != s.shape[1]:
        raise ValueError("original and synthetic must have the same fields")
    if len(o) == 0 or len(s) == 0:
        raise ValueError("datasets must be non-empty")
    return o, s


def field_correlation_stability(original, synthetic) -> float:
    o, s = _check_pair(original, synthetic)
    if o.shape[1] < 2:
        raise ValueError("correlation stability needs at least two fields")
    iu = np.triu_indices(o.shape[1], 1)
    diff = np.abs(pearson_matrix(o)[iu] - pearson_matrix(s)[iu])
    return float(100.0 * (1.0 - diff.mean() / 2.0))


def field_distribution_stability(original, synthetic, n_bins: int = N_BINS) -> float:
    o, s = _check_pair(original, synthetic)
    jsd = [js_distance(*_pooled_histograms(o[:, j], s[:, j], n_bins)) for j in range(o.shape[1])]
    return float(100.0 * (1.0 - np.mean(jsd)))


def pca_components(original, variance: float = 0.95, max_components: int = 5, rank_tol: float = 1e-10):
    """Standardisation stats and leading principal axes of the original data."""
    o = np.asarray(original, dtype=float)
    mu = o.mean(axis=0)
    sd = o.std(axis=0)
    sd = np.where(sd < 1e-12, 1.0, sd)
    z = (o - mu) / sd
    w, v = np.linalg.eigh(z.T @ z / len(z))
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    if w[0] <= 0:
        return mu, sd, v[:, :0]
    rank = int(np.sum(w > rank_tol * w[0]))
    frac = np.cumsum(w) / w.sum()
    k = min(int(np.searchsorted(frac, variance - 1e-12) + 1), max_components, rank)
    return mu, sd, v[:, :k]


def deep_structure_stability(original, synthetic, n_bins: int = N_BINS) -> float:
    o, s = _check_pair(original, synthetic)
    mu, sd, axes = pca_components(o)
    if axes.shape[1] == 0:
        # no variance in the original at all: compare the raw fields instead
        return field_distribution_stability(o, s, n_bins)
    po, ps = ((o - mu) / sd) @ axes, ((s - mu) / sd) @ axes
    jsd = [js_distance(*_pooled_histograms(po[:, j], ps[:, j], n_bins)) for j in range(axes.shape[1])]
    return float(100.0 * (1.0 - np.mean(jsd)))


def quality_band(score: float) -> str:
    for lo, name in BANDS:
        if score > lo:
            return name
    return "Very Poor"


@dataclass(frozen=True)
class SyntheticQualityReport:
    field_correlation_stability: float
    deep_structure_stability: float
    field_distribution_stability: float

    @property
    def overall(self) -> float:
        return (self.field_correlation_stability + self.deep_structure_stability
                + self.field_distribution_stability) / 3.0

    @property
    def band(self) -> str:
        return quality_band(self.overall)

    def to_json(self) -> dict:
        return {"field_correlation_stability": self.field_correlation_stability,
                "deep_structure_stability": self.deep_structure_stability,
                "field_distribution_stability": self.field_distribution_stability,
                "overall": self.overall, "band": self.band}


def quality_report(original, synthetic) -> SyntheticQualityReport:
    return SyntheticQualityReport(field_correlation_stability(original, synthetic),
                                  deep_structure_stability(original, synthetic),
                                  field_distribution_stability(original, synthetic))


def _fields(fm: FeatureMatrix) -> np.ndarray:
    return np.column_stack([fm.values, fm.labels.astype(float)])


def synthesize_matrix(fm: FeatureMatrix, n_subjects: int, seed=0, first_subject_id: int | None = None) -> FeatureMatrix:
    """Synthetic rows for ``n_subjects`` new subjects, one row per condition present in ``fm``.

    A copula is fitted per condition on the feature columns plus the class
    label (so the label keeps its relation to the features); synthetic subject
    ids start after the largest original id and are shared across
    conditions.
    """
    if first_subject_id is None:
        first_subject_id = int(fm.subject_ids.max()) + 1 if fm.n_rows else 1
    ids = np.arange(first_subject_id, first_subject_id + n_subjects)
    parts = []
    index_ids = sorted(set(fm.index_ids.tolist()))
    if len(index_ids) != 1:
        raise ValueError("synthesize one index at a time")
    for ci, cond in enumerate(c.value for c in Condition):
        rows = fm.conditions == cond
        if not rows.any():
            continue
        model = fit_copula(_fields(fm.take(np.flatnonzero(rows))), fm.feature_names + ("label",))
        gen = generate(model, n_subjects, seed=[*np.atleast_1d(seed).tolist(), ci])
        labels = np.rint(gen[:, -1]).astype(np.int64)
        parts.append(FeatureMatrix(ids, [cond] * n_subjects, index_ids * n_subjects, fm.feature_names,
                                   gen[:, :-1], labels, np.ones(n_subjects, dtype=bool)))
    return FeatureMatrix.concat(parts)


def matrix_quality(original: FeatureMatrix, synthetic: FeatureMatrix) -> SyntheticQualityReport:
    """Quality of the synthetic rows, with the class label scored as one more field."""
    return quality_report(_fields(original), _fields(synthetic))


def save_quality(reports: dict[str, SyntheticQualityReport], path) -> None:
    Path(path).write_text(json.dumps({k: r.to_json() for k, r in sorted(reports.items())},
                                     indent=1, sort_keys=True) + "\n")
