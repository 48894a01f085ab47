"""Feature ranking by one-way ANOVA F, halving search for the feature count,
and a greedy correlation filter.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .records import FeatureMatrix

log = logging.getLogger(__name__)


def f_sf(f: float, dfn: float, dfd: float) -> float:
    """Upper tail of the F distribution via the regularized incomplete beta."""
    if np.isinf(f):
        return 0.0
    if f <= 0:
        return 1.0
    return float(special.betainc(dfd / 2, dfn / 2, dfd / (dfd + dfn * f)))


def anova_f(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """One-way ANOVA F between the two label groups, with its F(1, n-2) p-value.

    Zero within-group variance gives ``inf`` when the group means differ and
    0 when they coincide.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    groups = [x[y == c] for c in np.unique(y)]
    if len(groups) != 2:
        raise ValueError("ANOVA F needs exactly two classes")
    n = len(x)
    if n < 3:
        raise ValueError("ANOVA F needs at least three samples")
    grand = x.mean()
    ss_between = sum(len(g) * (g.mean() - grand) ** 2 for g in groups)
    ss_within = sum(np.sum((g - g.mean()) ** 2) for g in groups)
    # rounding noise in an exactly-zero between-group term
    if ss_between <= 1e-14 * max(ss_within, np.sum((x - grand) ** 2), 1e-300):
        ss_between = 0.0
    if ss_within == 0:
        f = np.inf if ss_between > 0 else 0.0
    else:
        f = ss_between / (ss_within / (n - 2))
    return float(f), f_sf(f, 1, n - 2)


@dataclass(frozen=True)
class FeatureScore:
    name: str
    f: float
    p: float


@dataclass
class FeatureRanking:
    scores: list[FeatureScore]

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.scores]

    def top(self, k: int) -> "FeatureRanking":
        if not 1 <= k <= len(self.scores):
            raise ValueError(f"k={k} outside 1..{len(self.scores)}")
        return FeatureRanking(self.scores[:k])

    def to_json(self) -> list[dict]:
        return [{"name": s.name, "f": _num(s.f), "p": s.p} for s in self.scores]


def _num(v: float):
    return "inf" if np.isinf(v) else v


def rank_features(fm: FeatureMatrix) -> FeatureRanking:
    """All features sorted by descending F; ties keep column order."""
    scores = [FeatureScore(n, *anova_f(fm.values[:, j], fm.labels)) for j, n in enumerate(fm.feature_names)]
    order = sorted(range(len(scores)), key=lambda j: -scores[j].f)
    return FeatureRanking([scores[j] for j in order])


def select_k_best(fm: FeatureMatrix, k: int) -> FeatureRanking:
    return rank_features(fm).top(k)


def halving_sequence(n: int) -> list[int]:
    ks = []
    while n >= 1:
        ks.append(n)
        n //= 2
    return ks


def pearson_matrix(values: np.ndarray) -> np.ndarray:
    """Pearson correlations between columns; a constant column correlates 0 with everything else."""
    x = values - values.mean(axis=0)
    norm = np.sqrt(np.sum(x * x, axis=0))
    ok = norm > 0
    r = np.zeros((values.shape[1], values.shape[1]))
    xo = x[:, ok] / norm[ok]
    r[np.ix_(ok, ok)] = np.clip(xo.T @ xo, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return r


@dataclass
class SelectionResult:
    chosen: list[str]
    k: int
    trace: list[tuple[int, float]] = field(default_factory=list)
    ranking: list[FeatureScore] = field(default_factory=list)
    dropped: list[dict] = field(default_factory=list)
    correlation: np.ndarray | None = None

    def to_json(self) -> dict:
        return {"chosen": list(self.chosen), "k": self.k,
                "trace": [{"k": k, "mean_accuracy": a} for k, a in self.trace],
                "ranking": FeatureRanking(self.ranking).to_json(),
                "dropped": self.dropped}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n")

    def save_correlation(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["feature"] + list(self.chosen))
            for name, row in zip(self.chosen, self.correlation):
                w.writerow([name] + [repr(float(v)) for v in row])

    @classmethod
    def load(cls, path) -> "SelectionResult":
        d = json.loads(Path(path).read_text())
        ranking = [FeatureScore(s["name"], float(s["f"]), s["p"]) for s in d["ranking"]]
        return cls(d["chosen"], d["k"], [(t["k"], t["mean_accuracy"]) for t in d["trace"]], ranking, d["dropped"])


def iterative_k_search(fm: FeatureMatrix, evaluator: Callable[[FeatureMatrix], float],
                       ranking: FeatureRanking | None = None) -> SelectionResult:
    """Halve the number of top-ranked features while accuracy strictly improves.

    ``evaluator`` maps a feature matrix restricted to the top-K columns to a
    mean accuracy.  The search stops at the first K whose accuracy does not
    beat the previous one and keeps the previous K.
    """
    if fm.n_features < 2:
        raise ValueError("K search needs at least two features")
    ranking = rank_features(fm) if ranking is None else ranking
    trace: list[tuple[int, float]] = []
    best_k = None
    for k in halving_sequence(fm.n_features):
        acc = float(evaluator(fm.select_columns(ranking.names[:k])))
        log.info("K=%d mean accuracy %.4f", k, acc)
        if trace and acc <= trace[-1][1]:
            trace.append((k, acc))
            break
        trace.append((k, acc))
        best_k = k
    return SelectionResult(ranking.names[:best_k], best_k, trace, ranking.scores[:best_k])


def multicollinearity_filter(fm: FeatureMatrix, ranked_names: Sequence[str],
                             threshold: float = 0.5) -> SelectionResult:
    """Greedy pass in rank order, dropping any feature with |r| > threshold against one already kept."""
    r = pearson_matrix(fm.select_columns(list(ranked_names)).values)
    kept: list[int] = []
    dropped = []
    for j, name in enumerate(ranked_names):
        clash = [i for i in kept if abs(r[i, j]) > threshold]
        if clash:
            winner = clash[0]
            dropped.append({"feature": name, "retained": ranked_names[winner], "r": float(r[winner, j])})
            log.info("dropping %s: |r|=%.3f with retained %s", name, abs(r[winner, j]), ranked_names[winner])
        else:
            kept.append(j)
    chosen = [ranked_names[j] for j in kept]
    return SelectionResult(chosen, len(chosen), dropped=dropped, correlation=r[np.ix_(kept, kept)])


def select_features(fm: FeatureMatrix, evaluator: Callable[[FeatureMatrix], float] | None = None,
                    threshold: float = 0.5, k: int | None = None) -> SelectionResult:
    """Rank, choose K (halving search when ``k`` is None), then filter correlated features."""
    ranking = rank_features(fm)
    if k is not None:
        search = SelectionResult(ranking.top(k).names, k, [], ranking.scores[:k])
    else:
        if evaluator is None:
            raise ValueError("an evaluator is required for the K search")
        search = iterative_k_search(fm, evaluator, ranking)
    if len(search.chosen) >= 2:
        filtered = multicollinearity_filter(fm, search.chosen, threshold)
    else:
        filtered = SelectionResult(list(search.chosen), len(search.chosen), correlation=np.ones((1, 1)))
    by_name = {s.name: s for s in search.ranking}
    return SelectionResult(filtered.chosen, search.k, search.trace,
                           [by_name[n] for n in filtered.chosen], filtered.dropped, filtered.correlation)
