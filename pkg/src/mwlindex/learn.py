"""Z-score normalisation, three binary classifiers and the evaluation metrics.

Labels are WorkloadClass codes: 0 = Suboptimal, 1 = SuperOptimal (the
positive class).  Internally the linear models use y in {-1, +1} and fold
the bias into the weight vector as a constant feature of 1, so the bias is
regularised along with the weights (the liblinear convention).
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

log = logging.getLogger(__name__)

SIGMA_FLOOR = 1e-12


class Family(str, enum.Enum):
    LOGISTIC = "LogisticRegression"
    SVM = "LinearSVM"
    TREE = "DecisionTree"

    @property
    def short(self) -> str:
        return {"LogisticRegression": "L-R", "LinearSVM": "SVM", "DecisionTree": "DTR"}[self.value]

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        for f in cls:
            if value in (f.value, f.short, f.name):
                return f
        raise ValueError(f"unknown model family {value!r}")


@dataclass(frozen=True)
class Normalizer:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != len(self.mean):
            raise ValueError(f"expected rows with {len(self.mean)} features")
        return (x - self.mean) / self.std

    def to_json(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_json(cls, d) -> "Normalizer":
        return cls(np.array(d["mean"], dtype=float), np.array(d["std"], dtype=float))


def fit_normalizer(x) -> Normalizer:
    """Column means and population standard deviations; sd below 1e-12 is replaced by 1."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("cannot fit a normalizer on an empty training set")
    sd = x.std(axis=0)
    return Normalizer(x.mean(axis=0), np.where(sd < SIGMA_FLOOR, 1.0, sd))


@dataclass(frozen=True)
class ModelSpec:
    family: Family
    C: float = 1.0
    tol: float = 1e-4
    max_iter: int = 1000
    max_depth: int | None = None
    min_samples_split: int = 2

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.C <= 0:
            raise ValueError("regularization strength C must be positive")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be at least 2")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")

    def to_json(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        return d

    @classmethod
    def from_json(cls, d) -> "ModelSpec":
        return cls(**d)


DEFAULT_SPECS = (ModelSpec(Family.LOGISTIC), ModelSpec(Family.SVM), ModelSpec(Family.TREE))


def _augment(x):
    return np.hstack([x, np.ones((x.shape[0], 1))])


def _signed(y) -> np.ndarray:
    y = np.asarray(y)
    if not np.all(np.isin(y, (0, 1))):
        raise ValueError("labels must be 0 (Suboptimal) or 1 (SuperOptimal)")
    return np.where(y == 1, 1.0, -1.0)


def logistic_objective(w, xa, ys, C):
    m = ys * (xa @ w)
    return 0.5 * w @ w + C * np.sum(np.logaddexp(0.0, -m))


def logistic_gradient(w, xa, ys, C):
    m = ys * (xa @ w)
    return w - C * xa.T @ (ys * special.expit(-m))


def fit_logistic(xa, ys, C=1.0, tol=1e-4, max_iter=1000):
    """Newton's method with backtracking on the L2-regularised logistic loss.

    Returns (weights, converged, iterations, final gradient norm).
    """
    w = np.zeros(xa.shape[1])
    f = logistic_objective(w, xa, ys, C)
    for it in range(max_iter + 1):
        g = logistic_gradient(w, xa, ys, C)
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            return w, True, it, gnorm
        if it == max_iter:
            break
        p = special.expit(xa @ w)
        h = np.eye(len(w)) + C * (xa.T * (p * (1 - p))) @ xa
        step = np.linalg.solve(h, g)
        t = 1.0
        while True:
            w_new = w - t * step
            f_new = logistic_objective(w_new, xa, ys, C)
            if f_new <= f - 1e-4 * t * (g @ step) or t < 1e-12:
                break
            t *= 0.5
        w, f = w_new, f_new
    return w, False, max_iter, gnorm


def svm_objective(w, xa, ys, C):
    return 0.5 * w @ w + C * np.sum(np.maximum(0.0, 1.0 - ys * (xa @ w)))


def fit_linear_svm(xa, ys, C=1.0, tol=1e-4, max_iter=1000, seed=0):
    """Dual coordinate descent for the L2-regularised hinge loss.

    Solves ``min_a 0.5 a'Qa - sum(a)`` with ``0 <= a <= C`` and
    ``Q_ij = y_i y_j x_i.x_j``; the primal weights are ``sum a_i y_i x_i``.
    Stops when the spread of projected gradients falls to ``tol``.  The
    visiting order of each sweep is a seeded permutation.
    """
    n = xa.shape[0]
    alpha = np.zeros(n)
    w = np.zeros(xa.shape[1])
    qii = np.einsum("ij,ij->i", xa, xa)
    rng = np.random.default_rng(seed)
    gap = np.inf
    for it in range(1, max_iter + 1):
        pg_max, pg_min = -np.inf, np.inf
        for i in rng.permutation(n):
            g = ys[i] * (xa[i] @ w) - 1.0
            if alpha[i] == 0:
                pg = min(g, 0.0)
            elif alpha[i] == C:
                pg = max(g, 0.0)
            else:
                pg = g
            pg_max, pg_min = max(pg_max, pg), min(pg_min, pg)
            if pg != 0:
                old = alpha[i]
                alpha[i] = min(max(old - g / qii[i], 0.0), C)
                w += (alpha[i] - old) * ys[i] * xa[i]
        gap = pg_max - pg_min
        if gap <= tol:
            return w, alpha, True, it, float(gap)
    return w, alpha, False, max_iter, float(gap)


def _gini(counts):
    n = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / n[..., None]
    return np.where(n > 0, 1.0 - np.sum(p * p, axis=-1), 0.0)


def best_split(x, y):
    """Exhaustive CART split search on Gini impurity.

    Returns (feature, threshold, gain) or None when no split separates any
    rows.  Candidate thresholds are midpoints of consecutive distinct values;
    ties go to the lowest feature index, then the lowest threshold.
    """
    n, d = x.shape
    parent = _gini(np.bincount(y, minlength=2).astype(float))
    best = None
    for j in range(d):
        order = np.argsort(x[:, j], kind="stable")
        xs, ys = x[order, j], y[order]
        ones = np.cumsum(ys)[:-1].astype(float)
        left_n = np.arange(1, n, dtype=float)
        valid = xs[1:] > xs[:-1]
        if not valid.any():
            continue
        left = np.stack([left_n - ones, ones], axis=1)
        right = np.stack([(n - left_n) - (ys.sum() - ones), ys.sum() - ones], axis=1)
        child = (left_n * _gini(left) + (n - left_n) * _gini(right)) / n
        gain = np.where(valid, parent - child, -np.inf)
        k = int(np.argmax(gain))
        g = float(gain[k])
        if best is None or g > best[2] + 1e-15:
            best = (j, float((xs[k] + xs[k + 1]) / 2), g)
    return best


@dataclass
class TreeNode:
    prediction: int
    n_samples: int
    impurity: float
    feature: int | None = None
    threshold: float | None = None
    gain: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_json(self) -> dict:
        d = {"prediction": self.prediction, "n_samples": self.n_samples, "impurity": self.impurity}
        if not self.is_leaf:
            d.update(feature=self.feature, threshold=self.threshold, gain=self.gain,
                     left=self.left.to_json(), right=self.right.to_json())
        return d

    @classmethod
    def from_json(cls, d) -> "TreeNode":
        node = cls(d["prediction"], d["n_samples"], d["impurity"])
        if "feature" in d:
            node.feature, node.threshold, node.gain = d["feature"], d["threshold"], d["gain"]
            node.left, node.right = cls.from_json(d["left"]), cls.from_json(d["right"])
        return node

    def depth(self) -> int:
        return 0 if self.is_leaf else 1 + max(self.left.depth(), self.right.depth())

    def internal_nodes(self):
        if not self.is_leaf:
            yield self
            yield from self.left.internal_nodes()
            yield from self.right.internal_nodes()


def grow_tree(x, y, max_depth=None, min_samples_split=2, depth=0) -> TreeNode:
    """Greedy Gini tree grown until leaves are pure or a stop rule fires.

    A split with zero gain is accepted when the node is impure and nothing
    better exists (an XOR layout needs one); ties in the majority vote go to
    the positive class.
    """
    counts = np.bincount(y, minlength=2)
    node = TreeNode(int(counts[1] >= counts[0]), len(y), float(_gini(counts.astype(float))))
    if node.impurity == 0 or len(y) < min_samples_split or (max_depth is not None and depth >= max_depth):
        return node
    split = best_split(x, y)
    if split is None:
        return node
    node.feature, node.threshold, node.gain = split
    mask = x[:, node.feature] <= node.threshold
    node.left = grow_tree(x[mask], y[mask], max_depth, min_samples_split, depth + 1)
    node.right = grow_tree(x[~mask], y[~mask], max_depth, min_samples_split, depth + 1)
    return node


@dataclass
class TrainedModel:
    spec: ModelSpec
    normalizer: Normalizer
    weights: np.ndarray | None = None     # linear families; last entry is the bias
    tree: TreeNode | None = None
    converged: bool = True
    n_iter: int = 0
    final_tol: float = 0.0
    feature_names: tuple[str, ...] | None = None

    @property
    def n_features(self) -> int:
        return len(self.normalizer.mean)

    def decision_function(self, rows) -> np.ndarray:
        if self.weights is None:
            raise TypeError("decision trees have no linear score")
        z = self.normalizer.transform(rows)
        return z @ self.weights[:-1] + self.weights[-1]

    def predict(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        if rows.size == 0:
            return np.zeros(0, dtype=np.int64)
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.shape[1] != self.n_features:
            raise ValueError(f"model expects {self.n_features} features, got {rows.shape[1]}")
        if self.tree is None:
            return (self.decision_function(rows) > 0).astype(np.int64)
        z = self.normalizer.transform(rows)
        out = np.empty(len(z), dtype=np.int64)
        for i, r in enumerate(z):
            node = self.tree
            while not node.is_leaf:
                node = node.left if r[node.feature] <= node.threshold else node.right
            out[i] = node.prediction
        return out

    def to_json(self) -> dict:
        return {"spec": self.spec.to_json(), "normalizer": self.normalizer.to_json(),
                "weights": None if self.weights is None else self.weights.tolist(),
                "tree": None if self.tree is None else self.tree.to_json(),
                "converged": self.converged, "n_iter": self.n_iter, "final_tol": self.final_tol,
                "feature_names": None if self.feature_names is None else list(self.feature_names)}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n")

    @classmethod
    def from_json(cls, d) -> "TrainedModel":
        return cls(ModelSpec.from_json(d["spec"]), Normalizer.from_json(d["normalizer"]),
                   None if d["weights"] is None else np.array(d["weights"]),
                   None if d["tree"] is None else TreeNode.from_json(d["tree"]),
                   d["converged"], d["n_iter"], d["final_tol"],
                   None if d["feature_names"] is None else tuple(d["feature_names"]))

    @classmethod
    def load(cls, path) -> "TrainedModel":
        return cls.from_json(json.loads(Path(path).read_text()))


def train(spec: ModelSpec, x, y, seed: int = 0, feature_names=None) -> TrainedModel:
    """Fit the normaliser on ``x`` and train ``spec`` on the normalised rows.

    Non-convergence is logged and recorded on the model, which is still
    returned.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("x must be (n_rows, n_features) with one label per row")
    if len(np.unique(y)) != 2:
        raise ValueError("training data must contain both classes")
    norm = fit_normalizer(x)
    z = norm.transform(x)
    names = None if feature_names is None else tuple(feature_names)
    if spec.family is Family.TREE:
        tree = grow_tree(z, y, spec.max_depth, spec.min_samples_split)
        return TrainedModel(spec, norm, tree=tree, feature_names=names)
    xa, ys = _augment(z), _signed(y)
    if spec.family is Family.LOGISTIC:
        w, ok, it, final = fit_logistic(xa, ys, spec.C, spec.tol, spec.max_iter)
    else:
        w, _, ok, it, final = fit_linear_svm(xa, ys, spec.C, spec.tol, spec.max_iter, seed)
    if not ok:
        log.warning("%s did not converge in %d iterations (final %.3g)", spec.family.value, it, final)
    return TrainedModel(spec, norm, weights=w, converged=ok, n_iter=it, final_tol=final, feature_names=names)


def predict(model: TrainedModel, rows) -> np.ndarray:
    return model.predict(rows)


METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    undefined: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def as_dict(self) -> dict[str, float]:
        return {m: getattr(self, m) for m in METRIC_NAMES}


def _ratio(num, den, name, undefined):
    if den == 0:
        undefined.append(name)
        return 0.0
    return num / den


def metrics_from_counts(tp: int, tn: int, fp: int, fn: int) -> MetricsReport:
    undefined: list[str] = []
    acc = (tp + tn) / (tp + tn + fp + fn)
    prec = _ratio(tp, tp + fp, "precision", undefined)
    rec = _ratio(tp, tp + fn, "recall", undefined)
    f1 = _ratio(2 * prec * rec, prec + rec, "f1", undefined)
    return MetricsReport(tp, tn, fp, fn, acc, prec, rec, f1, tuple(undefined))


def metrics(predictions, truths) -> MetricsReport:
    """Confusion counts with SuperOptimal (1) as the positive class, and the four scores."""
    p = np.asarray(predictions, dtype=np.int64)
    t = np.asarray(truths, dtype=np.int64)
    if p.shape != t.shape:
        raise ValueError("predictions and truths differ in length")
    if p.size == 0:
        raise ValueError("cannot score an empty prediction set")
    tp = int(np.sum((p == 1) & (t == 1)))
    tn = int(np.sum((p == 0) & (t == 0)))
    fp = int(np.sum((p == 1) & (t == 0)))
    fn = int(np.sum((p == 0) & (t == 1)))
    return metrics_from_counts(tp, tn, fp, fn)
