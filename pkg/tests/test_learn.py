import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwlindex.learn import (Family, ModelSpec, TrainedModel, _augment, _signed, fit_linear_svm, fit_logistic,
                            fit_normalizer, logistic_gradient, logistic_objective, metrics, metrics_from_counts,
                            svm_objective, train)

LR, SVM, TREE = (ModelSpec(f) for f in Family)


def blobs(n=40, sep=6.0, seed=0):
    rng = np.random.default_rng(seed)
    y = np.r_[np.zeros(n // 2, int), np.ones(n // 2, int)]
    x = rng.normal(size=(n, 2))
    x[:, 0] += np.where(y == 1, sep / 2, -sep / 2)
    return x, y


def test_normalizer_two_point_and_constant():
    n = fit_normalizer(np.array([[2.0, 5.0], [4.0, 5.0]]))
    assert np.allclose(n.transform([[2.0, 5.0], [4.0, 5.0]]), [[-1, 0], [1, 0]])


def test_normalizer_random_and_no_leakage():
    rng = np.random.default_rng(0)
    train_x = rng.normal(3, 2, size=(50, 4))
    n = fit_normalizer(train_x)
    z = n.transform(train_x)
    assert np.all(np.abs(z.mean(0)) < 1e-9)
    assert np.allclose(z.std(0), 1.0)
    test_x = train_x + 10.0
    zt = n.transform(test_x)
    assert np.allclose(zt.mean(0), 10.0 / train_x.std(0))
    with pytest.raises(ValueError):
        fit_normalizer(np.zeros((0, 3)))


def test_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec("LinearSVM", C=0)
    with pytest.raises(ValueError):
        ModelSpec("L-R", tol=-1)
    assert ModelSpec("DTR").family is Family.TREE


@pytest.mark.parametrize("spec", [LR, SVM, TREE], ids=lambda s: s.family.short)
def test_separable_blobs(spec):
    x, y = blobs()
    m = train(spec, x, y)
    assert np.mean(m.predict(x) == y) == 1.0
    xt, yt = blobs(seed=1)
    assert np.mean(m.predict(xt) == yt) >= 0.95
    assert len(m.predict(np.zeros((0, 2)))) == 0
    with pytest.raises(ValueError):
        m.predict(np.zeros((3, 5)))


def test_logistic_matches_sklearn_liblinear():
    sk = pytest.importorskip("sklearn.linear_model")
    rng = np.random.default_rng(3)
    x = rng.normal(size=(60, 3))
    y = (x[:, 0] + 0.5 * rng.normal(size=60) > 0).astype(int)
    m = train(LR, x, y)
    z = m.normalizer.transform(x)
    ref = sk.LogisticRegression(C=1.0, solver="liblinear", intercept_scaling=1.0, tol=1e-10,
                                max_iter=10_000).fit(z, y)
    assert np.allclose(m.weights[:-1], ref.coef_[0], atol=1e-4)
    assert np.isclose(m.weights[-1], ref.intercept_[0], atol=1e-4)


def test_logistic_gradient_norm_and_finite_difference():
    rng = np.random.default_rng(4)
    xa = _augment(rng.normal(size=(25, 3)))
    ys = _signed(rng.integers(0, 2, 25))
    w, ok, _, gnorm = fit_logistic(xa, ys, C=1.0, tol=1e-4)
    assert ok and gnorm <= 1e-4
    h = 1e-6
    fd = np.array([(logistic_objective(w + h * e, xa, ys, 1.0) - logistic_objective(w - h * e, xa, ys, 1.0)) / (2 * h)
                   for e in np.eye(len(w))])
    probe = w + 0.3
    fd_probe = np.array([(logistic_objective(probe + h * e, xa, ys, 1.0)
                          - logistic_objective(probe - h * e, xa, ys, 1.0)) / (2 * h) for e in np.eye(len(w))])
    g_probe = logistic_gradient(probe, xa, ys, 1.0)
    assert np.linalg.norm(fd_probe - g_probe) / np.linalg.norm(g_probe) < 1e-4
    assert np.linalg.norm(fd) <= 1e-4 + 1e-6


def test_logistic_label_flip_negates_weights():
    x, y = blobs(sep=1.0, seed=5)
    a = train(LR, x, y)
    b = train(LR, x, 1 - y)
    assert np.allclose(a.weights, -b.weights, atol=1e-8)


def test_svm_matches_cvxpy_primal():
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(6)
    x = rng.normal(size=(40, 3))
    y = (x[:, 0] - x[:, 1] + 0.7 * rng.normal(size=40) > 0).astype(int)
    xa, ys = _augment(x), _signed(y)
    w, _, ok, _, _ = fit_linear_svm(xa, ys, C=1.0, tol=1e-8, max_iter=100_000)
    assert ok
    v = cp.Variable(4)
    prob = cp.Problem(cp.Minimize(0.5 * cp.sum_squares(v) + cp.sum(cp.pos(1 - cp.multiply(ys, xa @ v)))))
    prob.solve()
    assert np.isclose(svm_objective(w, xa, ys, 1.0), prob.value, rtol=1e-5)
    assert np.allclose(w, v.value, atol=1e-3)


def test_svm_deterministic_given_seed():
    x, y = blobs(sep=1.0)
    a, b = train(SVM, x, y, seed=3), train(SVM, x, y, seed=3)
    assert np.array_equal(a.weights, b.weights)


def test_tree_xor_depth_two():
    x = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    y = np.array([0, 1, 1, 0])
    m = train(TREE, x, y)
    assert m.tree.depth() == 2
    assert np.array_equal(m.predict(x), y)


def _exhaustive_root_gain(x, y):
    def gini(v):
        if len(v) == 0:
            return 0.0
        p = np.mean(v)
        return 1 - p * p - (1 - p) ** 2
    best = -1.0
    for j in range(x.shape[1]):
        vals = np.unique(x[:, j])
        for a, b in zip(vals[:-1], vals[1:]):
            m = x[:, j] <= (a + b) / 2
            g = gini(y) - (m.sum() * gini(y[m]) + (~m).sum() * gini(y[~m])) / len(y)
            best = max(best, g)
    return best


def test_tree_root_split_matches_exhaustive_search():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(30, 3))
    y = (x[:, 1] + 0.5 * rng.normal(size=30) > 0).astype(int)
    m = train(TREE, x, y)
    z = m.normalizer.transform(x)
    assert np.isclose(m.tree.gain, _exhaustive_root_gain(z, y))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_tree_internal_gains_positive_on_generic_data(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(30, 3))
    y = (x[:, 0] + x[:, 1] * rng.normal() + rng.normal(size=30) > 0).astype(int)
    if len(np.unique(y)) < 2:
        return
    m = train(TREE, x, y)
    assert all(node.gain > 0 for node in m.tree.internal_nodes())
    assert np.mean(m.predict(x) == y) == 1.0


def test_tree_max_depth_respected():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(50, 3))
    y = rng.integers(0, 2, 50)
    m = train(ModelSpec(Family.TREE, max_depth=2), x, y)
    assert m.tree.depth() <= 2


def test_positive_side_of_known_weights():
    x, y = blobs()
    m = train(LR, x, y)
    far = np.array([[50.0, 0.0]])
    assert m.predict(far)[0] == 1 and m.predict(-far)[0] == 0


@pytest.mark.parametrize("spec", [LR, SVM, TREE], ids=lambda s: s.family.short)
def test_model_json_roundtrip(spec, tmp_path):
    x, y = blobs(sep=1.0, seed=9)
    m = train(spec, x, y, feature_names=["a", "b"])
    m.save(tmp_path / "m.json")
    back = TrainedModel.load(tmp_path / "m.json")
    assert np.array_equal(back.predict(x), m.predict(x))
    assert back.feature_names == ("a", "b")


def test_train_requires_both_classes():
    with pytest.raises(ValueError):
        train(LR, np.zeros((4, 2)), np.zeros(4, int))


def test_metric_examples():
    r = metrics_from_counts(5, 5, 0, 0)
    assert (r.accuracy, r.precision, r.recall, r.f1) == (1.0, 1.0, 1.0, 1.0)
    r = metrics_from_counts(tp=1, tn=1, fp=1, fn=1)
    assert (r.accuracy, r.precision, r.recall, r.f1) == (0.5, 0.5, 0.5, 0.5)
    r = metrics_from_counts(tp=3, tn=4, fp=1, fn=2)
    assert np.isclose(r.accuracy, 0.7) and np.isclose(r.precision, 0.75) and np.isclose(r.recall, 0.6)
    assert np.isclose(r.f1, 2 / 3)


def test_metric_undefined_denominators_flagged():
    r = metrics([0, 0, 0], [0, 0, 0])
    assert r.precision == 0.0 and r.recall == 0.0 and r.f1 == 0.0
    assert set(r.undefined) == {"precision", "recall", "f1"}
    with pytest.raises(ValueError):
        metrics([1, 0], [1])
    with pytest.raises(ValueError):
        metrics([], [])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=40), st.randoms())
def test_metrics_permutation_invariant(pairs, rnd):
    p, t = map(list, zip(*pairs))
    r1 = metrics(p, t)
    idx = list(range(len(p)))
    rnd.shuffle(idx)
    r2 = metrics([p[i] for i in idx], [t[i] for i in idx])
    assert r1 == r2
    assert r1.tp + r1.tn + r1.fp + r1.fn == len(p)
