import dataclasses

import numpy as np
import pytest

from bfvar import DataGeneratingProcess, ModelSet, RegressionModel, log_marginal, log_marginal_mv
from bfvar.oracle import (
    batch_log_marginals,
    chunk_rng,
    closed_form,
    empirical_bf_moments,
    moment_summary,
    simulate_dgp,
    simulate_pmp,
)

from conftest import random_instance, random_spd


def test_vanishing_noise_returns_mean(rng):
    mu = rng.normal(size=12)
    y = simulate_dgp(DataGeneratingProcess(mu, 1e-20), chunk_rng(0, 0))
    np.testing.assert_allclose(y, mu, atol=1e-8)


def test_sample_mean_law_of_large_numbers(rng):
    mu = rng.normal(size=5)
    draws = simulate_dgp(DataGeneratingProcess(mu, 2.0), chunk_rng(1, 0), 100_000)
    se = np.sqrt(2.0 / draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0) - mu) < 4 * se)


def test_row_covariance_matches(rng):
    q = 3
    sigma = random_spd(rng, q)
    draws = simulate_dgp(DataGeneratingProcess(np.zeros((4, q)), sigma), chunk_rng(2, 0), 25_000)
    rows = draws.reshape(-1, q)
    m = rows.shape[0]
    cov = rows.T @ rows / m
    se = np.sqrt((np.outer(np.diag(sigma), np.diag(sigma)) + sigma**2) / m)
    assert np.all(np.abs(cov - sigma) < 4 * se)
    # rows are independent: lag-one cross moment vanishes
    cross = np.einsum("mi,mj->ij", draws[:, 0], draws[:, 1]) / draws.shape[0]
    assert np.all(np.abs(cross) < 4 * se * np.sqrt(4))


def test_general_covariance_draws(rng):
    cov = random_spd(rng, 4)
    draws = simulate_dgp(DataGeneratingProcess(np.ones(4), cov), chunk_rng(3, 0), 100_000)
    m = draws.shape[0]
    c = draws - 1.0
    se = np.sqrt((np.outer(np.diag(cov), np.diag(cov)) + cov**2) / m)
    assert np.all(np.abs(c.T @ c / m - cov) < 4 * se)


def test_batch_log_marginals_match_single(rng):
    x = rng.normal(size=(9, 3))
    models = (RegressionModel(x[:, :2], 1.4, 2.0), RegressionModel(x, 0.6, 2.0))
    ys = rng.normal(size=(5, 9))
    out = batch_log_marginals(models, ys)
    for i, y in enumerate(ys):
        np.testing.assert_allclose(out[i], [log_marginal(m, y) for m in models], rtol=1e-12)
    sigma = random_spd(rng, 2)
    mv = (RegressionModel(x[:, :2], sigma, 2.0), RegressionModel(x, sigma, 2.0))
    ys = rng.normal(size=(4, 9, 2))
    for exponent in ("p", "pq"):
        out = batch_log_marginals(mv, ys, exponent)
        for i, y in enumerate(ys):
            np.testing.assert_allclose(out[i], [log_marginal_mv(m, y, exponent) for m in mv], rtol=1e-12)


def test_moment_summary():
    values = np.array([1.0, 2.0, 3.0, 4.0])
    mean, var, se_mean, se_var = moment_summary(values)
    assert (mean, var) == (2.5, pytest.approx(5 / 3))
    assert se_mean == pytest.approx(np.sqrt(5 / 12))
    assert se_var > 0
    with pytest.raises(ValueError):
        moment_summary([1.0])


def test_identical_models_give_exact_zeros(rng):
    m1, _, dgp = random_instance(rng)
    rep = empirical_bf_moments(dgp, m1, m1, 2000, seed=1)
    assert rep.empirical_mean == 0.0 and rep.empirical_var == 0.0
    assert rep.z_mean == 0.0 and rep.z_var == 0.0


def test_minimum_simulations(rng):
    m1, m2, dgp = random_instance(rng)
    with pytest.raises(ValueError):
        empirical_bf_moments(dgp, m1, m2, 999)


def test_reproducible_and_thread_invariant(rng):
    m1, m2, dgp = random_instance(rng, n=20)
    a = empirical_bf_moments(dgp, m1, m2, 20_000, seed=9)
    b = empirical_bf_moments(dgp, m1, m2, 20_000, seed=9, threads=3)
    assert a == b
    c = empirical_bf_moments(dgp, m1, m2, 20_000, seed=10)
    assert c != a


def test_closed_form_routing(rng):
    m1, m2, dgp = random_instance(rng)
    assert closed_form(m1, m2, dgp) == closed_form(m1, m2, dgp)
    general = closed_form(m1, m2.with_noise(2.0), dgp)
    assert general.variance > 0


@pytest.mark.slow
def test_equal_variance_oracle_and_negative_control(rng):
    m1, m2, dgp = random_instance(rng, n=40, sigma2=1.0, sigma2_true=1.5)
    rep = empirical_bf_moments(dgp, m1, m2, 200_000, seed=1)
    assert rep.passes(), rep
    closed = closed_form(m1, m2, dgp)
    bad = dataclasses.replace(closed, variance=1.5 * closed.variance)
    rep = empirical_bf_moments(dgp, m1, m2, 200_000, seed=1, closed=bad)
    assert abs(rep.z_var) > 4


@pytest.mark.slow
def test_z_scores_look_standard_normal():
    rng = np.random.default_rng(77)
    exceed = 0
    for i in range(50):
        m1, m2, dgp = random_instance(
            rng,
            n=int(rng.integers(15, 35)),
            p1=int(rng.integers(1, 4)),
            p2=int(rng.integers(1, 4)),
            shared=0,
            sigma2_true=float(rng.choice([0.5, 1.0, 2.0])),
            g=float(rng.choice([1.0, 10.0])),
        )
        rep = empirical_bf_moments(dgp, m1, m2, 50_000, seed=i)
        exceed += abs(rep.z_mean) > 3
        exceed += abs(rep.z_var) > 3
    # 100 z-values; the expected count above 3 is about 0.3
    assert exceed <= 2


def test_simulate_pmp_rows(rng):
    m1, m2, dgp = random_instance(rng)
    p = simulate_pmp(dgp, ModelSet([m1, m2], ["a", "b"]), 3000, seed=2)
    assert p.shape == (3000, 2)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
