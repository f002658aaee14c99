"""Monte Carlo ground truth for the closed-form log Bayes factor moments.

Datasets are drawn from the data-generating process in fixed-size chunks, each
chunk with its own Philox stream keyed on ``(seed, chunk)``; the log Bayes
factor of every dataset is evaluated directly from the marginal likelihoods.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .gprior import LOG_2PI, kappa_exponent_factor
from .moments import bf_moments_equal_var, bf_moments_general, bf_moments_mv
from .posterior import pmp_matrix

CHUNK = 8192
DEFAULT_SIMS = 200_000


@dataclass(frozen=True)
class OracleReport:
    empirical_mean: float
    empirical_var: float
    se_mean: float
    se_var: float
    closed_mean: float
    closed_var: float
    z_mean: float
    z_var: float
    n_sims: int
    seed: int

    def as_dict(self):
        return asdict(self)

    def passes(self, z=4.0):
        return abs(self.z_mean) < z and abs(self.z_var) < z


def chunk_rng(seed, chunk):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(chunk),))
    return np.random.Generator(np.random.Philox(ss))


def _noise_factor(dgp):
    """Matrix ``F`` with ``noise = F F'`` for the DGP's non-scalar covariance."""
    w, v = np.linalg.eigh(dgp.noise)
    return v * np.sqrt(np.clip(w, 0.0, None))


def simulate_dgp(dgp, rng, size=None):
    """Draw dataset(s) from ``dgp``.

    Returns one response (vector or ``n x q``) when ``size`` is None, else a
    stack with a leading axis of length ``size``.
    """
    shape = () if size is None else (int(size),)
    mu = dgp.mean
    if dgp.kind == "scalar":
        return mu + np.sqrt(dgp.noise) * rng.standard_normal(shape + mu.shape)
    # general: z is n-dim; mv: rows of the n x q error are iid N(0, Sigma*)
    z = rng.standard_normal(shape + mu.shape)
    return mu + z @ _noise_factor(dgp).T


def batch_log_marginals(models, ys, kappa_exponent="p"):
    """Log marginal likelihood of each model for a stack of responses.

    ``ys`` has shape ``(m, n)`` or ``(m, n, q)``; returns ``(m, K)``.
    """
    ys = np.asarray(ys, dtype=float)
    out = np.empty((ys.shape[0], len(models)))
    for k, model in enumerate(models):
        n, p, kappa = model.n, model.p, model.kappa
        basis = model.basis
        if model.multivariate:
            sigma = model.noise
            q = sigma.shape[0]
            # tr(Y'(I - H)Y Sigma^{-1}) = ||Y C||^2 - kappa ||Q'Y C||^2 with C C' = Sigma^{-1}
            c = np.linalg.cholesky(np.linalg.inv(sigma))
            yc = ys @ c
            proj = np.einsum("ni,mnq->miq", basis, yc)
            tr = np.einsum("mnq,mnq->m", yc, yc) - kappa * np.einsum("miq,miq->m", proj, proj)
            _, logdet = np.linalg.slogdet(sigma)
            factor = kappa_exponent_factor(model, kappa_exponent)
            out[:, k] = (
                -0.5 * n * q * LOG_2PI - 0.5 * n * logdet + 0.5 * factor * p * np.log1p(-kappa) - 0.5 * tr
            )
        else:
            s2 = model.noise
            proj = ys @ basis
            rss = np.einsum("mn,mn->m", ys, ys) - kappa * np.einsum("mi,mi->m", proj, proj)
            out[:, k] = -0.5 * n * (LOG_2PI + np.log(s2)) + 0.5 * p * np.log1p(-kappa) - 0.5 * rss / s2
    return out


def simulate_log_bf(dgp, m1, m2, n_sims, seed, threads=1, kappa_exponent="p"):
    """Log Bayes factors of ``m1`` against ``m2`` on ``n_sims`` fresh datasets."""
    n_chunks = math.ceil(n_sims / CHUNK)

    def work(c):
        size = min(CHUNK, n_sims - c * CHUNK)
        ys = simulate_dgp(dgp, chunk_rng(seed, c), size)
        lm = batch_log_marginals((m1, m2), ys, kappa_exponent)
        return lm[:, 0] - lm[:, 1]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(n_chunks)))
    else:
        parts = [work(c) for c in range(n_chunks)]
    return np.concatenate(parts)


def simulate_pmp(dgp, model_set, n_sims, seed, kappa_exponent="p"):
    """PMPs over ``n_sims`` fresh datasets from ``dgp`` (sampling distribution oracle)."""
    parts = []
    for c in range(math.ceil(n_sims / CHUNK)):
        size = min(CHUNK, n_sims - c * CHUNK)
        ys = simulate_dgp(dgp, chunk_rng(seed, c), size)
        parts.append(batch_log_marginals(model_set.models, ys, kappa_exponent))
    return pmp_matrix(np.concatenate(parts), model_set.prior_probs)


def closed_form(m1, m2, dgp, kappa_exponent="p"):
    """Pick the closed-form route that applies to ``(m1, m2, dgp)``."""
    if m1.multivariate:
        return bf_moments_mv(m1, m2, dgp, kappa_exponent)
    if dgp.kind == "scalar" and m1.noise == m2.noise:
        return bf_moments_equal_var(m1, m2, dgp)
    return bf_moments_general(m1, m2, dgp)


def moment_summary(values):
    """Sample mean and variance with standard errors.

    The variance's standard error uses the fourth central moment,
    ``sqrt((m4 - s^4 (m - 3) / (m - 1)) / m)``.
    """
    values = np.asarray(values, dtype=float)
    m = values.shape[0]
    if m < 2:
        raise ValueError("need at least two values")
    mean = values.mean()
    centred = values - mean
    var = centred @ centred / (m - 1)
    m4 = np.mean(centred**4)
    se_mean = math.sqrt(var / m)
    se_var = math.sqrt(max(m4 - var**2 * (m - 3) / (m - 1), 0.0) / m)
    return float(mean), float(var), se_mean, se_var


def _z(empirical, closed, se):
    if se == 0.0:
        return 0.0 if empirical == closed else math.copysign(math.inf, empirical - closed)
    return (empirical - closed) / se


def empirical_bf_moments(dgp, m1, m2, n_sims=DEFAULT_SIMS, seed=0, closed=None, threads=1, kappa_exponent="p"):
    """Compare simulated log Bayes factor moments with a closed form.

    ``closed`` may be a :class:`~bfvar.moments.BfMoments`; by default the route
    matching the models and DGP is used.
    """
    if n_sims < 1000:
        raise ValueError(f"n_sims must be at least 1000, got {n_sims}")
    if closed is None:
        closed = closed_form(m1, m2, dgp, kappa_exponent)
    values = simulate_log_bf(dgp, m1, m2, n_sims, seed, threads, kappa_exponent)
    mean, var, se_mean, se_var = moment_summary(values)
    return OracleReport(
        empirical_mean=mean,
        empirical_var=var,
        se_mean=se_mean,
        se_var=se_var,
        closed_mean=float(closed.mean),
        closed_var=float(closed.variance),
        z_mean=float(_z(mean, closed.mean, se_mean)),
        z_var=float(_z(var, closed.variance, se_var)),
        n_sims=int(n_sims),
        seed=int(seed),
    )
