"""Repeated subject-level 70/30 evaluation and the t-test comparison tables.

Every iteration draws its split from ``default_rng([seed, iteration,
attempt])``, so results do not depend on evaluation order and the same
subjects are held out for every index and learner in a given iteration.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import special, stats

from .learn import DEFAULT_SPECS, METRIC_NAMES, MetricsReport, ModelSpec, metrics, train
from .records import FeatureMatrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentConfig:
    indexes: tuple[str, ...]
    learners: tuple[ModelSpec, ...] = DEFAULT_SPECS
    train_fraction: float = 0.7
    iterations: int = 100
    seed: int = 0
    dataset: str = "original"
    max_resamples: int = 100

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie strictly between 0 and 1")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.dataset not in ("original", "combined"):
            raise ValueError("dataset must be 'original' or 'combined'")


def round_half_up(v: float) -> int:
    return int(np.floor(v + 0.5))


def subject_strata(subject_ids, labels) -> dict[int, tuple[int, ...]]:
    """Each subject's stratum: the sorted set of classes among its rows."""
    out: dict[int, set] = {}
    for s, y in zip(np.asarray(subject_ids).tolist(), np.asarray(labels).tolist()):
        out.setdefault(s, set()).add(int(y))
    return {s: tuple(sorted(c)) for s, c in out.items()}


def stratified_subject_split(subject_ids, labels, fraction: float = 0.7,
                             seed=0) -> tuple[np.ndarray, np.ndarray]:
    """Split subjects (never rows) into train and test, stratified by class.

    Subjects are grouped by the set of classes their rows carry (a subject
    rated low at rest and high under load forms a mixed stratum); each
    stratum sends ``round_half_up(fraction * size)`` shuffled subjects to
    train and the rest to test.  ``seed`` is anything accepted by
    ``numpy.random.default_rng``.
    """
    strata = subject_strata(subject_ids, labels)
    for cls in (0, 1):
        n = sum(cls in c for c in strata.values())
        if n < 2:
            raise ValueError(f"class {cls} is present in only {n} subject(s); need at least 2")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for key in sorted(set(strata.values())):
        members = np.array(sorted(s for s, c in strata.items() if c == key))
        members = members[rng.permutation(len(members))]
        k = round_half_up(fraction * len(members))
        train.extend(members[:k].tolist())
        test.extend(members[k:].tolist())
    return np.array(sorted(train)), np.array(sorted(test))


def split_rows(fm: FeatureMatrix, train_ids, test_ids) -> tuple[np.ndarray, np.ndarray]:
    return np.flatnonzero(np.isin(fm.subject_ids, train_ids)), np.flatnonzero(np.isin(fm.subject_ids, test_ids))


def draw_split(fm: FeatureMatrix, fraction: float, seed: int, iteration: int, max_resamples: int = 100):
    """Split for one iteration, redrawn until both sides hold both classes.

    Returns (train_rows, test_rows, attempts_used).
    """
    for attempt in range(max_resamples + 1):
        tr_ids, te_ids = stratified_subject_split(fm.subject_ids, fm.labels, fraction,
                                                  [seed, iteration, attempt])
        tr, te = split_rows(fm, tr_ids, te_ids)
        if len(np.unique(fm.labels[tr])) == 2 and len(np.unique(fm.labels[te])) == 2:
            if attempt:
                log.info("iteration %d: resampled split %d time(s) to get both classes on each side",
                         iteration, attempt)
            return tr, te, attempt
    raise RuntimeError(f"no split with both classes on both sides after {max_resamples} resamples")


def evaluate_split(fm: FeatureMatrix, spec: ModelSpec, train_rows, test_rows, seed: int = 0) -> MetricsReport:
    model = train(spec, fm.values[train_rows], fm.labels[train_rows], seed=seed)
    return metrics(model.predict(fm.values[test_rows]), fm.labels[test_rows])


@dataclass
class ExperimentResult:
    """Metric values keyed by (dataset, index, learner short name, metric)."""

    config: ExperimentConfig
    values: dict[tuple[str, str, str, str], np.ndarray] = field(default_factory=dict)
    resamples: list[dict] = field(default_factory=list)

    def distribution(self, index: str, learner: str, metric: str, dataset: str | None = None) -> np.ndarray:
        key = (dataset or self.config.dataset, index, learner, metric)
        if key not in self.values:
            raise KeyError(f"no distribution for {key}")
        return self.values[key]

    def summary(self) -> list[dict]:
        return [{"dataset": d, "index": i, "learner": l, "metric": m, "mean": float(np.mean(v)),
                 "sd": float(np.std(v, ddof=1)) if len(v) > 1 else 0.0, "n": len(v)}
                for (d, i, l, m), v in sorted(self.values.items())]

    def merge(self, other: "ExperimentResult") -> "ExperimentResult":
        return ExperimentResult(self.config, {**self.values, **other.values}, self.resamples + other.resamples)


def run_experiment(cfg: ExperimentConfig, matrices: Mapping[str, FeatureMatrix]) -> ExperimentResult:
    """Monte Carlo evaluation of every (index, learner) pair.

    Each iteration: split subjects, fit the normaliser and model on the train
    rows only, score the test rows, record the four metrics.
    """
    result = ExperimentResult(cfg)
    for index in cfg.indexes:
        if index not in matrices:
            raise KeyError(f"no feature matrix for index {index}")
        fm = matrices[index]
        scores = {(spec.family.short, m): np.empty(cfg.iterations) for spec in cfg.learners for m in METRIC_NAMES}
        for it in range(cfg.iterations):
            tr, te, attempts = draw_split(fm, cfg.train_fraction, cfg.seed, it, cfg.max_resamples)
            if attempts:
                result.resamples.append({"index": index, "iteration": it, "resamples": attempts})
            for spec in cfg.learners:
                rep = evaluate_split(fm, spec, tr, te, seed=cfg.seed + it)
                for m in METRIC_NAMES:
                    scores[(spec.family.short, m)][it] = getattr(rep, m)
        for (learner, m), v in scores.items():
            result.values[(cfg.dataset, index, learner, m)] = v
    return result


def accuracy_evaluator(spec: ModelSpec, iterations: int = 20, fraction: float = 0.7, seed: int = 0):
    """Mean Monte Carlo accuracy of ``spec`` on a feature matrix, for the K search."""
    def evaluate(fm: FeatureMatrix) -> float:
        accs = []
        for it in range(iterations):
            tr, te, _ = draw_split(fm, fraction, seed, it)
            accs.append(evaluate_split(fm, spec, tr, te, seed=seed + it).accuracy)
        return float(np.mean(accs))
    return evaluate


def t_sf_two_sided(t: float, df: float) -> float:
    """Two-tailed Student-t p-value, ``I_{df/(df+t^2)}(df/2, 1/2)``."""
    if np.isinf(t):
        return 0.0
    return float(special.betainc(df / 2, 0.5, df / (df + t * t)))


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    p_adjusted: float
    df: int
    m_comparisons: int
    mean_a: float
    mean_b: float

    @property
    def significant_05(self) -> bool:
        return self.p < 0.05

    @property
    def significant_005(self) -> bool:
        return self.p < 0.005

    def as_dict(self) -> dict:
        return {"t": self.t, "p": self.p, "p_bonferroni": self.p_adjusted, "df": self.df,
                "m": self.m_comparisons, "mean_a": self.mean_a, "mean_b": self.mean_b,
                "significant_0.05": self.significant_05, "significant_0.005": self.significant_005}


def two_tailed_ttest(a, b, m_comparisons: int = 1) -> TTestResult:
    """Pooled-variance two-sample t-test; t is positive when ``a`` has the larger mean."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValueError("each sample needs at least two values")
    if m_comparisons < 1:
        raise ValueError("m_comparisons must be at least 1")
    df = na + nb - 2
    diff = a.mean() - b.mean()
    sp2 = (np.sum((a - a.mean()) ** 2) + np.sum((b - b.mean()) ** 2)) / df
    se = np.sqrt(sp2 * (1 / na + 1 / nb))
    if se == 0:
        t = 0.0 if diff == 0 else float(np.sign(diff) * np.inf)
    else:
        t = float(diff / se)
    p = 1.0 if t == 0 else t_sf_two_sided(t, df)
    return TTestResult(t, p, min(1.0, m_comparisons * p), df, m_comparisons, float(a.mean()), float(b.mean()))


LEARNER_PAIRS = (("L-R", "SVM"), ("L-R", "DTR"), ("SVM", "DTR"))


def _pair_rows(result, pairs, m, dataset, learners, metrics_):
    rows = []
    for learner in learners:
        for metric in metrics_:
            for a, b in pairs:
                try:
                    va = result.distribution(a, learner, metric, dataset)
                    vb = result.distribution(b, learner, metric, dataset)
                except KeyError:
                    continue
                rows.append({"dataset": dataset, "learner": learner, "metric": metric, "a": a, "b": b,
                             **two_tailed_ttest(va, vb, m).as_dict()})
    return rows


def ratio_vs_constituent_pairs() -> list[tuple[str, str]]:
    pairs = []
    for k in (1, 2, 3):
        for ratio in (f"at-{k}", f"ta-{k}"):
            pairs += [(ratio, f"c{k}-theta"), (ratio, "c-alpha")]
    return pairs


RATIO_VS_RATIO_PAIRS = (("at-1", "at-2"), ("at-3", "at-2"), ("ta-1", "ta-2"), ("ta-3", "ta-2"))


def compare_indexes(result: ExperimentResult, dataset: str | None = None,
                    learners: Sequence[str] = ("L-R", "SVM", "DTR"),
                    metrics_: Sequence[str] = METRIC_NAMES) -> dict[str, list[dict]]:
    """The three comparison tables.

    learners
        accuracy of each learner pair, pooled over all indexes (m = 1).
    ratio_vs_constituent
        every ratio index against the two clusters it is built from, 12
        comparisons per learner and metric (Bonferroni m = 12).
    ratio_vs_ratio
        at-1 and at-3 against at-2, ta-1 and ta-3 against ta-2 (m = 4).
    """
    dataset = dataset or result.config.dataset
    learner_rows = []
    indexes = sorted({i for (d, i, _, _) in result.values if d == dataset})
    for metric in metrics_:
        for a, b in LEARNER_PAIRS:
            va = [result.values[(dataset, i, a, metric)] for i in indexes if (dataset, i, a, metric) in result.values]
            vb = [result.values[(dataset, i, b, metric)] for i in indexes if (dataset, i, b, metric) in result.values]
            if va and vb:
                learner_rows.append({"dataset": dataset, "metric": metric, "a": a, "b": b,
                                     **two_tailed_ttest(np.concatenate(va), np.concatenate(vb), 1).as_dict()})
    pairs = ratio_vs_constituent_pairs()
    return {"learners": learner_rows,
            "ratio_vs_constituent": _pair_rows(result, pairs, len(pairs), dataset, learners, metrics_),
            "ratio_vs_ratio": _pair_rows(result, RATIO_VS_RATIO_PAIRS, len(RATIO_VS_RATIO_PAIRS), dataset,
                                         learners, metrics_)}


def density_series(values, grid=None) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian KDE of a metric distribution on [0, 1].

    A distribution without spread is returned as a single spike of unit mass
    at the nearest grid point.
    """
    grid = np.linspace(0.0, 1.0, 101) if grid is None else np.asarray(grid)
    v = np.asarray(values, dtype=float)
    if len(v) < 2 or np.ptp(v) == 0:
        d = np.zeros_like(grid)
        d[np.argmin(np.abs(grid - v[0]))] = 1.0 / (grid[1] - grid[0])
        return grid, d
    return grid, stats.gaussian_kde(v)(grid)


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_rows(rows: Sequence[dict], path, columns: Sequence[str] | None = None) -> None:
    columns = list(columns or (rows[0].keys() if rows else []))
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r[c]) for c in columns])


def write_long_csv(result: ExperimentResult, path) -> None:
    rows = []
    for (d, i, l, m), v in sorted(result.values.items()):
        rows += [{"dataset": d, "index": i, "learner": l, "metric": m, "iteration": k, "value": float(x)}
                 for k, x in enumerate(v)]
    write_rows(rows, path, ["dataset", "index", "learner", "metric", "iteration", "value"])


def read_long_csv(path, config: ExperimentConfig | None = None) -> ExperimentResult:
    groups: dict[tuple, list[tuple[int, float]]] = {}
    with Path(path).open(newline="") as fh:
        for r in csv.DictReader(fh):
            key = (r["dataset"], r["index"], r["learner"], r["metric"])
            groups.setdefault(key, []).append((int(r["iteration"]), float(r["value"])))
    values = {k: np.array([v for _, v in sorted(items)]) for k, items in groups.items()}
    if config is None:
        config = ExperimentConfig(tuple(sorted({k[1] for k in values})))
    return ExperimentResult(config, values)
