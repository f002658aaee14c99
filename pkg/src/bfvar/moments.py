"""Closed-form sampling moments of the log Bayes factor between two g-prior models.

The log Bayes factor of two known-variance g-prior regressions is a quadratic
form in the data, so its mean and variance under a Gaussian data-generating
process follow from :mod:`bfvar.quadform`.  Three routes are provided:

* :func:`bf_moments_equal_var` for a shared noise variance, written in terms of
  the divergence between the models' best approximations and the non-shared
  degrees of freedom ``||H1 - H2||_F^2``;
* :func:`bf_moments_general` for differing variances and for a general
  ``n x n`` data covariance, evaluated directly through quadratic-form moments;
* :func:`bf_moments_mv` for a matrix response with a shared row covariance.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._linalg import check_pd, full_column_rank, sym_power
from .gprior import (
    hat_matrix,
    kappa_exponent_factor,
    log_marginal,
    log_marginal_mv,
)
from .quadform import GaussianSpec, QuadForm, quad_cov, quad_mean, quad_var


@dataclass(frozen=True, eq=False)
class DataGeneratingProcess:
    """True mean and noise of the data.

    ``mean`` is an ``n``-vector (univariate) or an ``n x q`` matrix.  ``noise`` is
    a scalar variance ``sigma*^2``, a ``q x q`` row covariance for a matrix
    mean, or an ``n x n`` covariance for correlated/heteroscedastic errors on a
    vector mean.
    """

    mean: np.ndarray
    noise: object

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        if mean.ndim not in (1, 2):
            raise ValueError(f"mean must be a vector or matrix, got {mean.ndim} dimensions")
        noise = np.asarray(self.noise, dtype=float)
        if noise.ndim == 0:
            noise = float(noise)
            if not np.isfinite(noise) or noise <= 0:
                raise ValueError(f"noise variance must be positive, got {noise}")
        else:
            noise = check_pd(noise, "DGP noise covariance")
            expected = mean.shape[0] if mean.ndim == 1 else mean.shape[1]
            if noise.shape[0] != expected:
                raise ValueError(
                    f"DGP noise covariance is {noise.shape[0]}x{noise.shape[0]}, expected {expected}x{expected}"
                )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "noise", noise)

    @classmethod
    def from_regression(cls, design, coef, noise):
        design = full_column_rank(design, "true design")
        return cls(design @ np.asarray(coef, dtype=float), noise)

    @property
    def n(self):
        return self.mean.shape[0]

    @property
    def kind(self):
        """``"scalar"``, ``"mv"`` (matrix mean) or ``"general"`` (n x n covariance)."""
        if isinstance(self.noise, float):
            return "scalar"
        return "mv" if self.mean.ndim == 2 else "general"

    @property
    def q(self):
        return 1 if self.mean.ndim == 1 else self.mean.shape[1]

    def gaussian(self):
        """Distribution of the (vectorised) response as a :class:`GaussianSpec`."""
        if self.kind == "scalar":
            return GaussianSpec(self.mean, self.noise * np.eye(self.n))
        if self.kind == "general":
            return GaussianSpec(self.mean, self.noise)
        # vec stacks columns: cov(vec Y) = Sigma* kron I_n
        return GaussianSpec(self.mean.ravel(order="F"), np.kron(self.noise, np.eye(self.n)))


@dataclass(frozen=True)
class BfMoments:
    """Mean and variance of ``log B12`` with their named summands.

    ``mean = kl_difference_term + complexity_penalty_term`` and
    ``variance = divergence_term + nonshared_dof_term``.
    """

    mean: float
    variance: float
    kl_difference_term: float
    complexity_penalty_term: float
    divergence_term: float
    nonshared_dof_term: float

    @property
    def sd(self):
        return float(np.sqrt(self.variance))

    def as_dict(self):
        return {
            "mean": self.mean,
            "variance": self.variance,
            "kl_difference_term": self.kl_difference_term,
            "complexity_penalty_term": self.complexity_penalty_term,
            "divergence_term": self.divergence_term,
            "nonshared_dof_term": self.nonshared_dof_term,
        }


class DivergenceBound(NamedTuple):
    bound: float
    holds: bool
    divergence: float


class AlignmentReport(NamedTuple):
    alignment: np.ndarray
    per_direction_contributions: np.ndarray
    model_eigenvalues: np.ndarray
    true_eigenvalues: np.ndarray


def _same_kind(m1, m2):
    if m1.multivariate != m2.multivariate:
        raise TypeError("cannot compare a univariate model with a multivariate one")
    if m1.n != m2.n or m1.q != m2.q:
        raise ValueError(f"models disagree on data shape: ({m1.n}, {m1.q}) vs ({m2.n}, {m2.q})")


def _same_g(m1, m2):
    if m1.g != m2.g:
        raise ValueError(f"compared models must share g, got {m1.g} and {m2.g}")


def _check_dgp(model, dgp):
    if dgp.n != model.n:
        raise ValueError(f"DGP has n={dgp.n}, model has n={model.n}")
    if model.multivariate != (dgp.kind == "mv"):
        raise TypeError("model and DGP disagree on univariate vs multivariate response")
    if model.multivariate and dgp.q != model.q:
        raise ValueError(f"DGP has q={dgp.q}, model has q={model.q}")


def log_bf(m1, m2, y, kappa_exponent="p"):
    """``log p(y | M1) - log p(y | M2)``."""
    _same_kind(m1, m2)
    if m1.multivariate:
        return log_marginal_mv(m1, y, kappa_exponent) - log_marginal_mv(m2, y, kappa_exponent)
    return log_marginal(m1, y) - log_marginal(m2, y)


def projected_mean(model, dgp):
    """Best approximation ``H mu*`` of the true mean within ``model``."""
    _check_dgp(model, dgp)
    q = model.basis
    return model.kappa * (q @ (q.T @ dgp.mean))


def kl_dgp_to_model(model, dgp):
    """KL divergence of ``N(H mu*, model noise)`` from the true data distribution."""
    _check_dgp(model, dgp)
    n = model.n
    resid = dgp.mean - projected_mean(model, dgp)
    if dgp.kind == "scalar":
        ratio = dgp.noise / model.noise
        return float(0.5 * n * (ratio - np.log(ratio) - 1.0) + 0.5 * resid @ resid / model.noise)
    if dgp.kind == "general":
        s2 = model.noise
        _, logdet = np.linalg.slogdet(dgp.noise)
        return float(
            0.5 * (np.trace(dgp.noise) / s2 - n + n * np.log(s2) - logdet + resid @ resid / s2)
        )
    sigma, sigma_true = model.noise, dgp.noise
    q = model.q
    _, ld = np.linalg.slogdet(sigma)
    _, ld_true = np.linalg.slogdet(sigma_true)
    sigma_inv = np.linalg.inv(sigma)
    maha = np.sum((resid.T @ resid) * sigma_inv)
    return float(0.5 * (n * (ld - ld_true) - n * q + n * np.sum(sigma_inv * sigma_true) + maha))


def _shared_noise(m1, m2):
    if m1.multivariate:
        if not np.allclose(m1.noise, m2.noise, rtol=1e-12, atol=0):
            raise ValueError("models have different noise covariances")
    elif m1.noise != m2.noise:
        raise ValueError(
            f"models have different noise variances ({m1.noise} vs {m2.noise}); use bf_moments_general"
        )
    return m1.noise


def kl_between_models(m1, m2, dgp):
    """KL divergence between the two best-approximating models (equal noise)."""
    _same_kind(m1, m2)
    noise = _shared_noise(m1, m2)
    d = projected_mean(m1, dgp) - projected_mean(m2, dgp)
    if m1.multivariate:
        return float(0.5 * np.sum((d.T @ d) * np.linalg.inv(noise)))
    return float(0.5 * (d @ d) / noise)


def divergence_bound(m1, m2, dgp):
    """Triangle-inequality bound ``(||mu* - mu1|| + ||mu* - mu2||)^2`` on ``||mu1 - mu2||^2``.

    Under equal misspecification the bound is ``4 ||mu* - mu_i||^2``.
    """
    mu1 = projected_mean(m1, dgp)
    mu2 = projected_mean(m2, dgp)
    a = np.linalg.norm(dgp.mean - mu1)
    b = np.linalg.norm(dgp.mean - mu2)
    bound = float((a + b) ** 2)
    lhs = float(np.sum((mu1 - mu2) ** 2))
    # collinear configurations attain equality; allow rounding slack
    return DivergenceBound(bound, bool(lhs <= bound * (1.0 + 1e-12) + 1e-300), lhs)


def bf_moments_equal_var(m1, m2, dgp):
    """Sampling mean and variance of ``log B12`` for models sharing a known variance.

    The variance splits into a divergence term
    ``(sigma*^2 / sigma^4) ||mu1_hat - mu2_hat||^2`` and a non-shared degrees of
    freedom term ``(sigma*^4 / 2 sigma^4) ||H1 - H2||_F^2``.
    """
    _same_kind(m1, m2)
    if m1.multivariate:
        raise TypeError("bf_moments_equal_var is univariate; use bf_moments_mv")
    if dgp.kind != "scalar":
        raise ValueError("bf_moments_equal_var needs a scalar DGP variance; use bf_moments_general")
    _same_g(m1, m2)
    s2 = _shared_noise(m1, m2)
    s2_true = dgp.noise
    kappa = m1.kappa

    kl1 = kl_dgp_to_model(m1, dgp)
    kl2 = kl_dgp_to_model(m2, dgp)
    kl_term = (kl2 - kl1) / (2.0 - kappa)
    penalty = 0.5 * (m1.p - m2.p) * (np.log1p(-kappa) + kappa * s2_true / s2)

    d = projected_mean(m1, dgp) - projected_mean(m2, dgp)
    divergence = s2_true / s2**2 * float(d @ d)
    h_diff = hat_matrix(m1).matrix - hat_matrix(m2).matrix
    nonshared = s2_true**2 / (2.0 * s2**2) * float(np.sum(h_diff**2))
    return BfMoments(
        mean=float(kl_term + penalty),
        variance=float(divergence + nonshared),
        kl_difference_term=float(kl_term),
        complexity_penalty_term=float(penalty),
        divergence_term=float(divergence),
        nonshared_dof_term=float(nonshared),
    )


def bf_moments_general(m1, m2, dgp):
    """Moments of ``log B12`` via quadratic-form moments.

    Handles unequal model variances and a general ``n x n`` data covariance.
    With ``A_i = (I - H_i) / (2 sigma_i^2)`` the log Bayes factor is
    ``(n/2) log(s2^2/s1^2) + ((p1-p2)/2) log(1-kappa) + y'A2y - y'A1y``.
    """
    _same_kind(m1, m2)
    if m1.multivariate:
        raise TypeError("bf_moments_general is univariate; use bf_moments_mv")
    _same_g(m1, m2)
    _check_dgp(m1, dgp)
    n, kappa = m1.n, m1.kappa
    gauss = dgp.gaussian()
    eye = np.eye(n)
    a1 = QuadForm((eye - hat_matrix(m1).matrix) / (2.0 * m1.noise))
    a2 = QuadForm((eye - hat_matrix(m2).matrix) / (2.0 * m2.noise))

    const = 0.5 * n * np.log(m2.noise / m1.noise) + 0.5 * (m1.p - m2.p) * np.log1p(-kappa)
    mean = const + quad_mean(a2, gauss) - quad_mean(a1, gauss)
    variance = quad_var(a2, gauss) + quad_var(a1, gauss) - 2.0 * quad_cov(a2, a1, gauss)

    # summands from the single form A2 - A1: trace parts vs mean-vector parts
    diff = a2.matrix - a1.matrix
    mu, cov = gauss.mean, gauss.covariance
    b = diff @ cov
    kl_term = float(mu @ diff @ mu)
    penalty = float(const + np.sum(diff * cov))
    nonshared = float(2.0 * np.sum(b * b.T))
    divergence = float(4.0 * (diff @ mu) @ cov @ (diff @ mu))
    return BfMoments(
        mean=float(mean),
        variance=float(max(variance, 0.0)),
        kl_difference_term=kl_term,
        complexity_penalty_term=penalty,
        divergence_term=divergence,
        nonshared_dof_term=nonshared,
    )


def omega(model, dgp):
    """Generalised variance ratio ``Sigma^{-1/2} Sigma* Sigma^{-1/2}``."""
    _check_dgp(model, dgp)
    if not model.multivariate:
        raise TypeError("omega needs a multivariate model")
    root_inv = sym_power(model.noise, -0.5)
    out = root_inv @ dgp.noise @ root_inv
    return 0.5 * (out + out.T)


def bf_moments_mv(m1, m2, dgp, kappa_exponent="p"):
    """Sampling mean and variance of ``log B12`` for matrix responses with shared ``Sigma``.

    Variance is ``0.5 tr(Omega^2) ||H2 - H1||_F^2 +
    ||(mu2_hat - mu1_hat) Sigma^{-1/2} Omega^{1/2}||_F^2``.
    """
    _same_kind(m1, m2)
    if not m1.multivariate:
        raise TypeError("bf_moments_mv needs multivariate models")
    _same_g(m1, m2)
    sigma = _shared_noise(m1, m2)
    kappa = m1.kappa
    om = omega(m1, dgp)

    kl1 = kl_dgp_to_model(m1, dgp)
    kl2 = kl_dgp_to_model(m2, dgp)
    kl_term = (kl2 - kl1) / (2.0 - kappa)
    factor = kappa_exponent_factor(m1, kappa_exponent)
    penalty = 0.5 * (m1.p - m2.p) * (factor * np.log1p(-kappa) + kappa * np.trace(om))

    h_diff = hat_matrix(m2).matrix - hat_matrix(m1).matrix
    nonshared = 0.5 * float(np.sum(om * om)) * float(np.sum(h_diff**2))
    d = projected_mean(m2, dgp) - projected_mean(m1, dgp)
    scaled = d @ sym_power(sigma, -0.5) @ sym_power(om, 0.5)
    divergence = float(np.sum(scaled**2))
    return BfMoments(
        mean=float(kl_term + penalty),
        variance=float(divergence + nonshared),
        kl_difference_term=float(kl_term),
        complexity_penalty_term=float(penalty),
        divergence_term=divergence,
        nonshared_dof_term=nonshared,
    )


def _matched_eigenbasis(u, u_true, w_true):
    # reorder/sign-flip Sigma*'s eigenvectors to line up with Sigma's
    rows, cols = linear_sum_assignment(-np.abs(u.T @ u_true))
    order = cols[np.argsort(rows)]
    u_true, w_true = u_true[:, order], w_true[order]
    signs = np.sign(np.einsum("ij,ij->j", u, u_true))
    signs[signs == 0] = 1.0
    return u_true * signs, w_true


def alignment_decomposition(m1, m2, dgp):
    """Split the divergence variance term by eigendirections of ``Sigma`` and ``Sigma*``.

    ``alignment[i, j] = sqrt(lam*_j / lam_i) u_i'u*_j``.  With
    ``D = (mu2_hat - mu1_hat) U Lam^{-1/2}`` the contribution of the pair
    ``(i, j)`` is ``alignment[i, j] * <D_i, (D @ alignment)_j>``; the
    contributions sum to ``||(mu2_hat - mu1_hat) Sigma^{-1/2} Omega^{1/2}||_F^2``.
    """
    _same_kind(m1, m2)
    if not m1.multivariate:
        raise TypeError("alignment_decomposition needs multivariate models")
    sigma = _shared_noise(m1, m2)
    _check_dgp(m1, dgp)
    w, u = np.linalg.eigh(sigma)
    w_true, u_true = np.linalg.eigh(dgp.noise)
    u_true, w_true = _matched_eigenbasis(u, u_true, w_true)
    alignment = (u.T @ u_true) * np.sqrt(w_true[None, :] / w[:, None])
    d = (projected_mean(m2, dgp) - projected_mean(m1, dgp)) @ u / np.sqrt(w)
    contributions = alignment * (d.T @ (d @ alignment))
    return AlignmentReport(alignment, contributions, w, w_true)

