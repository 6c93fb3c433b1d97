from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scpd.scoring import ScoreSeries, ScoringConfig, normal_behavior, score_attribute_series, score_series, score_step

DATA = Path(__file__).parent / "data"


def unit(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


def test_identical_context_returns_vector():
    s = unit([1.0, 2.0, 0.0, 3.0])
    assert np.allclose(normal_behavior([s] * 4), s, atol=1e-14)


def test_orthonormal_tie_resolves_symmetrically():
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    assert np.allclose(normal_behavior([e1, e2]), (e1 + e2) / np.sqrt(2))


def test_context_matches_dense_svd():
    C = np.loadtxt(DATA / "context_50x5.csv", delimiter=",")
    u = normal_behavior(list(C.T))
    U, _, _ = np.linalg.svd(C)
    ref = U[:, 0] * np.sign(U[:, 0] @ C.mean(axis=1))
    assert np.abs(u - ref).max() < 1e-8


def test_sign_fix():
    C = np.abs(np.random.default_rng(0).standard_normal((8, 3)))
    u = normal_behavior(list(C.T))
    assert u @ C.mean(axis=1) >= 0 and np.linalg.norm(u) == pytest.approx(1.0)


def test_empty_context_raises():
    with pytest.raises(ValueError):
        normal_behavior([])


def test_score_step_examples():
    s = unit([1, 1, 0])
    assert score_step(s, s, s) == 0.0
    assert score_step(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([1.0, 0, 0])) == 1.0
    a = np.array([0.9, np.sqrt(1 - 0.81), 0])
    b = np.array([0.8, 0, np.sqrt(1 - 0.64)])
    assert score_step(np.array([1.0, 0, 0]), a, b) == pytest.approx(0.2)


def test_constant_series_scores_zero():
    s = unit(np.arange(1, 11))
    res = score_series([s] * 40)
    assert np.all(res.zstar == 0)
    assert np.allclose(res.z, 0, atol=1e-12)


def test_orthogonal_spike_is_top():
    u, v = np.eye(6)[0], np.eye(6)[3]
    series = [u] * 60
    series[29] = v  # t = 30
    res = score_series(series)
    assert res.top_n(1) == [30]


def test_first_step_and_short_series():
    res = score_series([unit([1, 0]), unit([0, 1])])
    assert res.z[0] == 0 and res.zstar[0] == 0 and res.zstar[1] == 1
    with pytest.raises(ValueError):
        score_series([unit([1, 0])])


def test_ranking_ties_prefer_earlier():
    res = ScoreSeries(np.array([1, 2, 3, 4]), np.zeros(4), np.array([0.0, 0.5, 0.5, 0.1]))
    assert res.ranking().tolist() == [2, 3, 4, 1]


def test_config_validation():
    with pytest.raises(ValueError):
        ScoringConfig(6, 5)
    with pytest.raises(ValueError):
        ScoringConfig(0, 5)


def _noisy_series(T=50, k=20, seed=0, noise=1e-3, spike=None):
    rng = np.random.default_rng(seed)
    u = np.abs(rng.standard_normal(k))
    rows = [u + noise * rng.random(k) for _ in range(T)]
    if spike is not None:
        v = np.zeros(k)
        v[np.argmin(u)] = 1.0
        v -= (v @ unit(u)) * unit(u)
        rows[spike - 1] = np.abs(v)
    return np.array(rows)


def test_scale_invariance_bitwise():
    raw = _noisy_series(seed=3, noise=0.1)
    a = score_series([unit(r) for r in raw])
    b = score_series([unit(3.7 * r) for r in raw])
    # unit() of a scaled row may differ in the last ulp, so compare via the same normalization path
    assert np.allclose(a.zstar, b.zstar, atol=1e-12)
    c = score_series([unit(r) for r in raw])
    assert np.array_equal(a.zstar, c.zstar)


def test_shift_detection_under_small_noise():
    for seed in range(5):
        raw = _noisy_series(T=60, seed=seed, spike=40)
        res = score_series([unit(r) for r in raw])
        assert res.top_n(1) == [40]


def test_z_monotone_under_alignment():
    x = unit([1, 0, 0])
    lo_s, lo_l = unit([0.5, 1, 0]), unit([0.4, 0, 1])
    hi_s, hi_l = unit([1, 0.5, 0]), unit([1, 0, 0.4])
    assert score_step(x, hi_s, hi_l) <= score_step(x, lo_s, lo_l)


def test_warm_start_consistency():
    raw = _noisy_series(T=40, seed=5, noise=0.2)
    X = np.array([unit(r) for r in raw])
    Y = X.copy()
    Y[:10] = np.array([unit(r) for r in np.random.default_rng(9).random((10, 20))])
    a = score_series(X)
    b = score_series(Y)
    cfg = ScoringConfig()
    # Z_t uses vectors t-w_l..t, Z*_t additionally Z_{t-1}
    start = 10 + cfg.long_window + 2
    assert np.array_equal(a.zstar[start - 1:], b.zstar[start - 1:])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.integers(2, 12), st.integers(0, 10_000))
def test_score_bounds(T, k, seed):
    X = np.random.default_rng(seed).random((T, k)) + 1e-9
    res = score_series([unit(r) for r in X], ScoringConfig(2, 4))
    assert np.all(res.z >= -1e-9) and np.all(res.z <= 1 + 1e-9)
    assert np.all(res.zstar >= 0)
    assert res.zstar[0] == 0


def test_single_label_reduces_to_plain_series():
    X = [unit(r) for r in np.random.default_rng(1).random((20, 8))]
    per, agg = score_attribute_series([{"a": x} for x in X])
    plain = score_series(X)
    assert np.array_equal(per["a"].zstar, plain.zstar)
    assert np.array_equal(agg.zstar, plain.zstar)


def test_aggregate_takes_max_over_labels():
    u, v = np.eye(5)[0], np.eye(5)[2]
    a = [u] * 60
    a[49] = v
    b = [unit([1, 1, 1, 1, 1])] * 60
    per, agg = score_attribute_series([{"A": x, "B": y} for x, y in zip(a, b)])
    assert agg.top_n(1) == [50]
    assert np.array_equal(agg.zstar, np.maximum(per["A"].zstar, per["B"].zstar))


def test_missing_label_is_zero_and_empty_raises():
    steps = [{"a": unit([1, 0])}, {"a": unit([1, 0]), "b": unit([0, 1])}, {"a": unit([1, 0])}]
    per, _ = score_attribute_series(steps)
    assert set(per) == {"a", "b"}
    with pytest.raises(ValueError):
        score_attribute_series([{}, {}])
