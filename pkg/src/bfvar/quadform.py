"""Moments of Gaussian quadratic forms ``y'Ay`` with ``y ~ N(mu, Sigma)``.

Every closed-form log Bayes factor moment in the package reduces to the three
functions here.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import as_symmetric, check_psd


@dataclass(frozen=True)
class GaussianSpec:
    """Mean vector and covariance of a multivariate normal ``y``."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = check_psd(self.covariance, "covariance")
        if cov.shape[0] != mean.shape[0]:
            raise ValueError(
                f"mean has length {mean.shape[0]} but covariance is {cov.shape[0]}x{cov.shape[1]}"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self):
        return self.mean.shape[0]

    @classmethod
    def standard(cls, n):
        return cls(np.zeros(n), np.eye(n))


@dataclass(frozen=True)
class QuadForm:
    """Symmetric matrix ``A`` of the form ``y'Ay``; input is symmetrized."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_symmetric(self.matrix, "quadratic form matrix"))

    @property
    def dim(self):
        return self.matrix.shape[0]


def _check(g, *forms):
    for a in forms:
        if a.dim != g.dim:
            raise ValueError(f"quadratic form has dimension {a.dim}, Gaussian has {g.dim}")


def _as_form(a):
    return a if isinstance(a, QuadForm) else QuadForm(a)


def quad_mean(a, g):
    """E(y'Ay) = mu'A mu + tr(A Sigma)."""
    a = _as_form(a)
    _check(g, a)
    A, mu, S = a.matrix, g.mean, g.covariance
    return float(mu @ A @ mu + np.sum(A * S))


def quad_cov(a1, a2, g):
    """Cov(y'A1y, y'A2y) = 2 tr(A1 Sigma A2 Sigma) + 4 mu'A1 Sigma A2 mu."""
    a1, a2 = _as_form(a1), _as_form(a2)
    _check(g, a1, a2)
    mu, S = g.mean, g.covariance
    B1 = a1.matrix @ S
    B2 = a2.matrix @ S
    # tr(B1 B2) as an elementwise sum keeps the result symmetric in (a1, a2)
    tr = np.sum(B1 * B2.T)
    lin = (a1.matrix @ mu) @ S @ (a2.matrix @ mu)
    return float(2.0 * tr + 4.0 * lin)


def quad_var(a, g):
    """Var(y'Ay) = 2 tr((A Sigma)^2) + 4 mu'A Sigma A mu."""
    a = _as_form(a)
    return quad_cov(a, a, g)
