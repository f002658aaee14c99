import numpy as np
import pytest
from scipy import stats

from bfvar import (
    ModelSet,
    RegressionModel,
    ResamplePlan,
    bf_histogram,
    bootstrap_pmp,
    conclusiveness,
    log_marginal,
    pmp,
    resample_indices,
    stripe_export,
)
from bfvar.resample import (
    EVIDENCE_BINS,
    PmpMatrix,
    ResampleFailure,
    evidence_bins,
    evidence_counts,
    full_data_log_marginals,
)


def _data(rng, n=40):
    x = np.column_stack([np.ones(n), rng.normal(size=(n, 3))])
    y = x @ np.array([0.5, 1.0, -0.5, 0.0]) + rng.normal(size=n)
    ms = ModelSet(
        [RegressionModel(x[:, :2], 1.0, 2.0), RegressionModel(x[:, [0, 2]], 1.0, 2.0), RegressionModel(x, 1.0, 2.0)],
        ["a", "b", "c"],
    )
    return y, ms


def test_plan_validation():
    with pytest.raises(ValueError):
        ResamplePlan(scheme="stationary")
    with pytest.raises(ValueError):
        ResamplePlan(replicates=0)
    with pytest.raises(ValueError):
        ResamplePlan(seed=-1)
    with pytest.raises(ValueError):
        ResamplePlan(block_length=11).block_length_for(10)


@pytest.mark.parametrize("n, length", [(1, 1), (8, 2), (9, 3), (27, 3), (28, 4), (100, 5), (1000, 10), (1001, 11)])
def test_default_block_length(n, length):
    assert ResamplePlan().block_length_for(n) == length


def test_full_length_block_is_rotation():
    n = 17
    plan = ResamplePlan(block_length=n, seed=3)
    for b in range(20):
        idx = resample_indices(n, plan, b)
        np.testing.assert_array_equal(idx, np.roll(np.arange(n), -idx[0]))


def test_block_structure():
    plan = ResamplePlan(block_length=4, seed=1)
    idx = resample_indices(10, plan, 0)
    assert len(idx) == 10
    for start in (0, 4, 8):
        block = idx[start : start + 4]
        assert np.all(np.diff(block) % 10 == 1)


def test_unit_blocks_match_iid_distribution():
    n, draws = 10, 100_000
    circ = ResamplePlan(block_length=1, seed=7)
    idx = np.concatenate([resample_indices(n, circ, b) for b in range(draws // n)])
    counts = np.bincount(idx, minlength=n)
    assert stats.chisquare(counts).pvalue > 0.001
    iid = np.concatenate([resample_indices(n, ResamplePlan("iid", seed=7), b) for b in range(draws // n)])
    table = np.vstack([counts, np.bincount(iid, minlength=n)])
    assert stats.chi2_contingency(table).pvalue > 0.001


def test_indices_deterministic():
    plan = ResamplePlan(seed=123)
    np.testing.assert_array_equal(resample_indices(50, plan, 9), resample_indices(50, plan, 9))
    assert not np.array_equal(resample_indices(50, plan, 9), resample_indices(50, plan, 10))


def test_rows_sum_to_one_and_reproducible(rng):
    y, ms = _data(rng)
    plan = ResamplePlan("iid", 200, seed=5)
    a = bootstrap_pmp(y, ms, plan)
    np.testing.assert_allclose(a.values.sum(axis=1), 1.0, atol=1e-10)
    b = bootstrap_pmp(y, ms, plan)
    np.testing.assert_array_equal(a.values, b.values)


@pytest.mark.parametrize("threads", [2, 3, 8])
def test_thread_count_invariance(threads, rng):
    y, ms = _data(rng)
    plan = ResamplePlan("circular_block", 150, seed=11)
    np.testing.assert_array_equal(bootstrap_pmp(y, ms, plan).values, bootstrap_pmp(y, ms, plan, threads).values)


def test_replicates_match_direct_evaluation(rng):
    y, ms = _data(rng, 25)
    plan = ResamplePlan("circular_block", 5, seed=2)
    res = bootstrap_pmp(y, ms, plan)
    for b in range(5):
        idx = resample_indices(25, plan, b)
        lm = [log_marginal(RegressionModel(m.design[idx], m.noise, m.g), y[idx]) for m in ms.models]
        np.testing.assert_allclose(res.log_marginals[b], lm, rtol=1e-10)
        np.testing.assert_allclose(res.values[b], pmp(lm).probs, atol=1e-12)


def test_identical_models_have_equal_columns(rng):
    y, ms = _data(rng)
    twin = ModelSet([ms.models[0], ms.models[1], ms.models[0]], ["a", "b", "a2"])
    res = bootstrap_pmp(y, twin, ResamplePlan("iid", 100, seed=1))
    np.testing.assert_allclose(res.column("a"), res.column("a2"), atol=1e-10)


def test_degenerate_identical_rows_match_full_data():
    n = 6
    x = np.ones((n, 1))
    y = np.full(n, 0.7)
    ms = ModelSet([RegressionModel(x, 1.0), RegressionModel(2 * x, 2.0)], ["a", "b"])
    full = pmp(full_data_log_marginals(y, ms)).probs
    res = bootstrap_pmp(y, ms, ResamplePlan("iid", 1, seed=0))
    np.testing.assert_allclose(res.values[0], full, atol=1e-14)
    hist = bf_histogram(y, ms, ResamplePlan("iid", 1, seed=0), "a", "b")
    assert hist.values[0] == pytest.approx(hist.observed, abs=1e-12)


def test_rank_deficient_replicates_counted(rng):
    n = 20
    x = np.zeros((n, 1))
    x[:5, 0] = 1.0
    y = rng.normal(size=n)
    ms = ModelSet([RegressionModel(x, 1.0), RegressionModel(np.ones((n, 1)), 1.0)], ["sparse", "flat"])
    res = bootstrap_pmp(y, ms, ResamplePlan("iid", 1000, seed=4))
    assert 0 < res.n_failed <= 10
    assert res.values.shape[0] == 1000 - res.n_failed
    assert len(res.replicate_ids) == res.values.shape[0]
    x[:, 0] = 0.0
    x[0, 0] = 1.0
    ms = ModelSet([RegressionModel(x, 1.0), RegressionModel(np.ones((n, 1)), 1.0)], ["sparse", "flat"])
    with pytest.raises(ResampleFailure):
        bootstrap_pmp(y, ms, ResamplePlan("iid", 200, seed=4))


def test_too_few_rows(rng):
    x = rng.normal(size=(3, 3))
    ms = ModelSet([RegressionModel(x, 1.0), RegressionModel(x[:, :1], 1.0)], ["a", "b"])
    with pytest.raises(ValueError):
        bootstrap_pmp(np.zeros(3), ms, ResamplePlan("iid", 2))


def test_conclusiveness_examples():
    p = PmpMatrix(np.array([[1.0, 0.0], [0.5, 0.5]]), ("m1", "m2"))
    table = conclusiveness(p, [0.99])
    np.testing.assert_allclose(table.fractions[0], [0.5, 0.0])
    assert table.inconclusive[0] == 0.5
    flat = PmpMatrix(np.full((4, 3), 1 / 3), ("a", "b", "c"))
    table = conclusiveness(flat)
    assert table.thresholds == (0.9, 0.95, 0.99)
    np.testing.assert_array_equal(table.inconclusive, 1.0)
    with pytest.raises(ValueError):
        conclusiveness(p, [0.4])
    with pytest.raises(ValueError):
        conclusiveness(PmpMatrix(np.empty((0, 2)), ("a", "b")))


def test_conclusiveness_invariants(rng):
    y, ms = _data(rng)
    table = conclusiveness(bootstrap_pmp(y, ms, ResamplePlan("iid", 300, seed=8)), (0.6, 0.9, 0.95, 0.99))
    np.testing.assert_allclose(table.fractions.sum(axis=1) + table.inconclusive, 1.0, atol=1e-12)
    assert np.all(np.diff(table.fractions, axis=0) <= 0)
    rows = list(table.rows())
    assert rows[0][0] == 0.6 and set(rows[0][1]) == {"a", "b", "c"}


def test_stripes():
    vals = np.array([[0.9, 0.1], [0.5, 0.5], [0.2, 0.8]])
    p = PmpMatrix(vals, ("a", "b"), replicate_ids=np.arange(3))
    np.testing.assert_array_equal(stripe_export(p, "a").values, vals)
    np.testing.assert_array_equal(stripe_export(p, "b").values, vals[::-1])
    ties = PmpMatrix(np.array([[0.5, 0.5], [0.7, 0.3], [0.5, 0.5], [0.7, 0.3]]), ("a", "b"), replicate_ids=np.arange(4))
    np.testing.assert_array_equal(stripe_export(ties, "a").replicate_ids, [1, 3, 0, 2])
    with pytest.raises(KeyError):
        stripe_export(p, "zzz")


def test_evidence_bins():
    assert evidence_bins([0.0, 3.5, -6.0, 1.0]) == [
        "negligible",
        "strong for first",
        "very strong for second",
        "positive for first",
    ]
    counts = evidence_counts([0.0, 0.1, 10.0, -10.0])
    assert tuple(counts) == EVIDENCE_BINS
    assert counts["negligible"] == 2 and counts["very strong for first"] == 1 and counts["very strong for second"] == 1
    assert sum(counts.values()) == 4


def test_histogram_identical_models(rng):
    y, ms = _data(rng)
    twin = ModelSet([ms.models[0], ms.models[0]], ["a", "b"])
    hist = bf_histogram(y, twin, ResamplePlan("iid", 50, seed=1), "a", "b")
    np.testing.assert_allclose(hist.values, 0.0, atol=1e-12)
    assert hist.counts["negligible"] == 50


def test_histogram_reuses_pmps_and_families(rng):
    y, ms = _data(rng)
    plan = ResamplePlan("iid", 60, seed=3)
    pm = bootstrap_pmp(y, ms, plan)
    a = bf_histogram(y, ms, plan, "a", ["b", "c"])
    b = bf_histogram(y, ms, plan, "a", ["b", "c"], pmps=pm)
    np.testing.assert_array_equal(a.values, b.values)
    lm = pm.log_marginals
    expected = lm[:, 0] - np.logaddexp(lm[:, 1], lm[:, 2]) + np.log(2)
    np.testing.assert_allclose(a.values, expected, atol=1e-12)
    with pytest.raises(KeyError):
        bf_histogram(y, ms, plan, "a", "zzz", pmps=pm)


@pytest.mark.slow
def test_large_n_modal_model_matches_full_data():
    rng = np.random.default_rng(99)
    n = 500
    x = rng.normal(size=(n, 3))
    y = x[:, :2] @ np.array([1.0, -1.0]) + rng.normal(size=n)
    ms = ModelSet([RegressionModel(x[:, :2], 1.0, 5.0), RegressionModel(x[:, [0, 2]], 1.0, 5.0)], ["true", "wrong"])
    full = pmp(full_data_log_marginals(y, ms)).probs
    table = conclusiveness(bootstrap_pmp(y, ms, ResamplePlan("iid", 200, seed=1)), [0.99])
    assert np.argmax(table.fractions[0]) == np.argmax(full) == 0
