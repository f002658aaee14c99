"""Gaussian linear regression under Zellner's g-prior with known noise.

The prior ``beta | sigma^2 ~ N(0, g sigma^2 (X'X)^{-1})`` makes the posterior
predictive mean a shrunken projection ``H y`` with ``H = kappa P`` and
``kappa = g / (g + 1)``.  Marginal likelihoods are available in closed form for a
univariate response (scalar variance) and a matrix response with row covariance
``Sigma``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._linalg import check_pd, full_column_rank, orthonormal_basis

LOG_2PI = np.log(2.0 * np.pi)
KAPPA_EXPONENTS = ("p", "pq")


def shrinkage(g):
    """Shrinkage factor ``g / (g + 1)``."""
    g = float(g)
    if not np.isfinite(g) or g <= 0:
        raise ValueError(f"g must be a positive finite number, got {g}")
    return g / (g + 1.0)


@dataclass(frozen=True)
class HatMatrix:
    matrix: np.ndarray
    kappa: float
    projection: np.ndarray

    @property
    def rank(self):
        return int(round(np.trace(self.projection)))


@dataclass(frozen=True, eq=False)
class RegressionModel:
    """A g-prior regression model with known noise.

    ``noise`` is a positive scalar variance for a univariate response or a
    ``q x q`` positive definite row covariance for a matrix response.
    """

    design: np.ndarray
    noise: object
    g: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "design", full_column_rank(self.design))
        noise = np.asarray(self.noise, dtype=float)
        if noise.ndim == 0:
            if not np.isfinite(noise) or noise <= 0:
                raise ValueError(f"noise variance must be positive, got {float(noise)}")
            noise = float(noise)
        else:
            noise = check_pd(np.atleast_2d(noise), "noise covariance")
        object.__setattr__(self, "noise", noise)
        object.__setattr__(self, "g", float(self.g))
        shrinkage(self.g)

    @property
    def n(self):
        return self.design.shape[0]

    @property
    def p(self):
        return self.design.shape[1]

    @property
    def multivariate(self):
        return not isinstance(self.noise, float)

    @property
    def q(self):
        return self.noise.shape[0] if self.multivariate else 1

    @property
    def kappa(self):
        return shrinkage(self.g)

    @cached_property
    def basis(self):
        """Orthonormal basis of the column space of the design."""
        return orthonormal_basis(self.design)

    def with_noise(self, noise):
        return RegressionModel(self.design, noise, self.g)


def hat_matrix(model):
    """Shrunken projection ``kappa X (X'X)^{-1} X'`` together with its projector."""
    q = model.basis
    proj = q @ q.T
    proj = 0.5 * (proj + proj.T)
    return HatMatrix(model.kappa * proj, model.kappa, proj)


def posterior_mean(model, y):
    """Posterior mean of the coefficients, ``kappa (X'X)^{-1} X'y``.

    ``y`` may be a vector or an ``n x q`` matrix.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[0] != model.n:
        raise ValueError(f"response has {y.shape[0]} rows, design has {model.n}")
    coef, *_ = np.linalg.lstsq(model.design, y, rcond=None)
    return model.kappa * coef


def residual_quadratic(model, y):
    """``y'(I - H)y`` for a vector, or ``Y'(I - H)Y`` for a matrix response."""
    y = np.asarray(y, dtype=float)
    if y.shape[0] != model.n:
        raise ValueError(f"response has {y.shape[0]} rows, design has {model.n}")
    proj = model.basis.T @ y
    return y.T @ y - model.kappa * (proj.T @ proj)


def log_marginal(model, y):
    """Natural log of ``p(y | M)`` for a univariate response."""
    if model.multivariate:
        raise TypeError("log_marginal expects a univariate model; use log_marginal_mv")
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError(f"response must be a vector, got shape {y.shape}")
    s2 = model.noise
    rss = residual_quadratic(model, y)
    return float(
        -0.5 * model.n * (LOG_2PI + np.log(s2))
        + 0.5 * model.p * np.log1p(-model.kappa)
        - 0.5 * rss / s2
    )


def kappa_exponent_factor(model, kappa_exponent="p"):
    """Multiplier on ``(p/2) log(1 - kappa)`` for a matrix response."""
    if kappa_exponent not in KAPPA_EXPONENTS:
        raise ValueError(f"kappa_exponent must be one of {KAPPA_EXPONENTS}, got {kappa_exponent!r}")
    return model.q if kappa_exponent == "pq" else 1


def log_marginal_mv(model, Y, kappa_exponent="p"):
    """Natural log of ``p(Y | M)`` for an ``n x q`` response with row covariance ``Sigma``.

    With ``kappa_exponent="p"`` the prior-volume term is ``(p/2) log(1-kappa)``;
    ``"pq"`` uses ``(pq/2) log(1-kappa)`` as a matrix-normal g-prior would give.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if not model.multivariate:
        sigma = np.array([[model.noise]])
    else:
        sigma = model.noise
    q = sigma.shape[0]
    if Y.shape != (model.n, q):
        raise ValueError(f"response must have shape {(model.n, q)}, got {Y.shape}")
    n, p = model.n, model.p
    _, logdet = np.linalg.slogdet(sigma)
    S = residual_quadratic(model, Y)
    tr = np.sum(S * np.linalg.inv(sigma))
    factor = kappa_exponent_factor(model, kappa_exponent) if model.multivariate else 1
    return float(
        -0.5 * n * q * LOG_2PI
        - 0.5 * n * logdet
        + 0.5 * factor * p * np.log1p(-model.kappa)
        - 0.5 * tr
    )
