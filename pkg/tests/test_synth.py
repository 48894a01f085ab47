import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwlindex.records import FeatureMatrix
from mwlindex.synth import (deep_structure_stability, field_correlation_stability, field_distribution_stability,
                            fit_copula, generate, js_distance, matrix_quality, quality_band, quality_report,
                            save_quality, synthesize_matrix)


def gaussian(n, corr, seed=0):
    rng = np.random.default_rng(seed)
    return rng.multivariate_normal(np.zeros(len(corr)), corr, size=n)


CORR5 = np.array([[1, .6, .3, 0, -.4],
                  [.6, 1, .5, .1, -.2],
                  [.3, .5, 1, .2, 0],
                  [0, .1, .2, 1, .3],
                  [-.4, -.2, 0, .3, 1]])


def test_js_distance_examples():
    assert js_distance([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert js_distance([1, 0, 0], [0, 0, 1]) == 1.0
    # H(M) = H(0.75, 0.25) = 0.811278..., minus (1 + 0) / 2
    assert np.isclose(js_distance([0.5, 0.5], [1, 0]), 0.8112781244591328 - 0.5)
    assert np.isclose(js_distance([0.5, 0.5], [1, 0]), 0.3113, atol=1e-4)
    with pytest.raises(ValueError):
        js_distance([0, 0], [1, 0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=5, max_size=5).filter(lambda v: sum(v) > 0),
       st.lists(st.floats(0, 10), min_size=5, max_size=5).filter(lambda v: sum(v) > 0))
def test_js_distance_symmetric_and_bounded(p, q):
    d = js_distance(p, q)
    assert 0 <= d <= 1
    assert np.isclose(d, js_distance(q, p), atol=1e-12)
    assert js_distance(p, p) == pytest.approx(0.0, abs=1e-12)


def test_identical_data_scores_100():
    x = gaussian(300, CORR5)
    rep = quality_report(x, x)
    for v in (rep.field_correlation_stability, rep.deep_structure_stability, rep.field_distribution_stability,
              rep.overall):
        assert abs(v - 100.0) <= 1e-9
    assert rep.band == "Excellent"


def test_sign_flipped_perfect_correlations_score_zero():
    t = np.linspace(0, 1, 50)
    o = np.c_[t, t, t]
    s = np.c_[t, -t, t]
    # r = +1 everywhere originally; synthetic pairs (0,1) and (1,2) flip to -1, pair (0,2) stays
    assert np.isclose(field_correlation_stability(o, s), 100 * (1 - (2 + 2 + 0) / 3 / 2))
    s = np.c_[t, -t]
    assert field_correlation_stability(o[:, :2], s) == 0.0


def test_disjoint_supports_score_zero():
    x = gaussian(300, CORR5)
    far = x + 100.0
    assert field_distribution_stability(x, far) == 0.0
    assert deep_structure_stability(x, far) == 0.0


def test_deep_structure_drops_when_correlation_sign_flips():
    x = gaussian(2000, np.array([[1, .9], [.9, 1]]))
    flipped = x * np.array([1, -1])
    assert deep_structure_stability(x, flipped) < deep_structure_stability(x, x)


def test_copula_reproduces_bivariate_correlation():
    x = gaussian(400, np.array([[1, .9], [.9, 1]]), seed=1)
    syn = generate(fit_copula(x), 5000, seed=2)
    r = np.corrcoef(syn.T)[0, 1]
    assert 0.8 <= r <= 0.97


def test_copula_constant_field_and_determinism():
    rng = np.random.default_rng(3)
    x = np.c_[rng.normal(size=50), np.full(50, 4.2), rng.integers(0, 2, 50)]
    m = fit_copula(x)
    a, b = generate(m, 100, seed=7), generate(m, 100, seed=7)
    assert np.array_equal(a, b)
    assert np.all(a[:, 1] == 4.2)
    assert set(np.unique(a[:, 2])) <= {0.0, 1.0}
    assert a.shape == (100, 3)
    assert np.allclose(m.correlation, m.correlation.T)
    assert np.linalg.eigvalsh(m.correlation).min() > 0


def test_copula_preconditions():
    with pytest.raises(ValueError):
        fit_copula(np.zeros((9, 3)))
    with pytest.raises(ValueError):
        fit_copula(np.zeros((20, 1)))


def test_copula_quality_on_5_field_gaussian():
    x = gaussian(5000, CORR5, seed=4)
    syn = generate(fit_copula(x), 5000, seed=5)
    rep = quality_report(x, syn)
    assert rep.field_correlation_stability >= 90
    assert rep.field_distribution_stability >= 85
    assert rep.overall >= 85
    assert abs(rep.overall - np.mean([rep.field_correlation_stability, rep.deep_structure_stability,
                                      rep.field_distribution_stability])) < 1e-9


def test_quality_bands():
    assert [quality_band(v) for v in (100, 80.01, 80, 60, 40.5, 20, 0)] == \
        ["Excellent", "Excellent", "Good", "Moderate", "Moderate", "Very Poor", "Very Poor"]
    assert quality_band(30) == "Poor"


def test_field_mismatch_rejected():
    with pytest.raises(ValueError):
        field_distribution_stability(np.zeros((5, 2)), np.zeros((5, 3)))


def _index_fm(n_subjects=48, seed=0):
    rng = np.random.default_rng(seed)
    sid = np.repeat(np.arange(1, n_subjects + 1), 2)
    y = rng.integers(0, 2, len(sid))
    x = rng.normal(size=(len(sid), 4)) + y[:, None]
    return FeatureMatrix(sid, ["Rest", "Simkap"] * n_subjects, ["ta-1"] * len(sid),
                         ["a", "b", "c", "d"], x, y)


def test_synthesize_matrix_augmentation_bookkeeping(tmp_path):
    fm = _index_fm()
    syn = synthesize_matrix(fm, 180, seed=1)
    assert syn.n_rows == 360 and np.all(syn.synthetic)
    assert set(syn.subject_ids.tolist()) == set(range(49, 229))
    combined = FeatureMatrix.concat([fm, syn])
    assert len(set(combined.subject_ids.tolist())) == 228
    assert set(syn.labels.tolist()) <= {0, 1}
    rep = matrix_quality(fm, syn)
    assert 0 <= rep.overall <= 100
    save_quality({"ta-1": rep}, tmp_path / "q.json")
    assert json.loads((tmp_path / "q.json").read_text())["ta-1"]["band"] == rep.band
    assert np.array_equal(synthesize_matrix(fm, 10, seed=3).values, synthesize_matrix(fm, 10, seed=3).values)
