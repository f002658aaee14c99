"""Small dense linear-algebra helpers shared across modules."""

import numpy as np

SYM_TOL = 1e-8
PSD_FLOOR = 1e-10
RANK_TOL = 1e-10
SQRT_FLOOR = 1e-12


def as_symmetric(a, name="matrix", tol=SYM_TOL):
    """Return ``(a + a.T) / 2`` after checking that ``a`` is square and nearly symmetric.

    The relative asymmetry ``||a - a.T||_F / ||a||_F`` must not exceed ``tol``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    scale = np.linalg.norm(a)
    if scale > 0 and np.linalg.norm(a - a.T) > tol * scale:
        raise ValueError(f"{name} is not symmetric (relative asymmetry above {tol:g})")
    return 0.5 * (a + a.T)


def check_psd(s, name="covariance"):
    s = as_symmetric(s, name)
    w = np.linalg.eigvalsh(s)
    top = max(w[-1], 0.0) if w.size else 0.0
    if w.size and w[0] < -PSD_FLOOR * top:
        raise ValueError(f"{name} is not positive semi-definite (min eigenvalue {w[0]:.3g})")
    if w.size and top <= 0 and w[0] < 0:
        raise ValueError(f"{name} is not positive semi-definite")
    return s


def check_pd(s, name="covariance"):
    s = as_symmetric(s, name)
    w = np.linalg.eigvalsh(s)
    if w.size == 0 or w[0] <= PSD_FLOOR * abs(w[-1]) or w[0] <= 0:
        raise ValueError(f"{name} is not positive definite")
    return s


def full_column_rank(x, name="design"):
    """Validate ``x`` as an ``n x p`` matrix of full column rank and return it as float."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got {x.ndim} dimensions")
    n, p = x.shape
    if p == 0 or n < p:
        raise ValueError(f"{name} with shape {x.shape} cannot have full column rank")
    sv = np.linalg.svd(x, compute_uv=False)
    if not np.all(np.isfinite(sv)) or sv[-1] <= RANK_TOL * sv[0]:
        raise ValueError(f"{name} is rank deficient")
    return x


def orthonormal_basis(x):
    """Orthonormal basis of span(x) via thin QR (x assumed full column rank)."""
    q, _ = np.linalg.qr(x)
    return q


def sym_power(s, power):
    """Principal power of a symmetric positive definite matrix by eigendecomposition.

    Eigenvalues below ``1e-12 * max eigenvalue`` are floored before the power.
    """
    w, v = np.linalg.eigh(s)
    w = np.maximum(w, SQRT_FLOOR * w[-1])
    return (v * w**power) @ v.T
