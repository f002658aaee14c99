"""Principal angles between design column spaces and the non-shared degrees of freedom.

``||H1 - H2||_F^2`` equals ``kappa^2 (p1 + p2 - 2 (s + sum cos^2 theta))`` where
``s`` counts the shared dimensions and the sum runs over the partially shared
principal angles.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ._linalg import full_column_rank, orthonormal_basis
from .gprior import shrinkage

COS2_TOL = 1e-10


class NearThresholdWarning(UserWarning):
    """A principal angle sits close to the shared/partial/orthogonal boundaries."""


@dataclass(frozen=True)
class PrincipalAngleReport:
    angles: np.ndarray
    shared_dims: int
    partial_dims: int
    nonshared_dof: float
    dims: tuple
    near_threshold: bool = False

    @property
    def cos2(self):
        return np.cos(self.angles) ** 2


def principal_angles(x1, x2, g=1.0):
    """Principal angles between ``span(x1)`` and ``span(x2)``, in radians, ascending.

    ``nonshared_dof`` in the report is the angle-based ``||H1 - H2||_F^2`` at
    shrinkage ``g``.
    """
    x1 = full_column_rank(x1, "first design")
    x2 = full_column_rank(x2, "second design")
    if x1.shape[0] != x2.shape[0]:
        raise ValueError(f"designs have different row counts: {x1.shape[0]} vs {x2.shape[0]}")
    if x1.shape[1] < x2.shape[1]:
        x1, x2 = x2, x1
    q1, q2 = orthonormal_basis(x1), orthonormal_basis(x2)
    cos = np.clip(np.linalg.svd(q1.T @ q2, compute_uv=False), 0.0, 1.0)
    cos2 = cos**2
    # singular values come out descending, so angles are ascending
    angles = np.arccos(cos)
    shared = cos2 > 1.0 - COS2_TOL
    partial = ~shared & (cos2 >= COS2_TOL)
    # exact zeros/right angles land at the boundary, only flag the grey zones
    near = np.any(
        ((cos2 > 1.0 - 10 * COS2_TOL) & (cos2 < 1.0 - 0.1 * COS2_TOL))
        | ((cos2 > 0.1 * COS2_TOL) & (cos2 < 10 * COS2_TOL))
    )
    if near:
        warnings.warn(
            "principal angle close to a classification threshold; s and r may be unstable",
            NearThresholdWarning,
            stacklevel=2,
        )
    s, r = int(shared.sum()), int(partial.sum())
    p1, p2 = x1.shape[1], x2.shape[1]
    kappa = shrinkage(g)
    dof = kappa**2 * (p1 + p2 - 2.0 * (s + float(np.sum(cos2[partial]))))
    angles = np.where(shared, 0.0, angles)
    return PrincipalAngleReport(angles, s, r, float(dof), (p1, p2), bool(near))


def nonshared_dof_direct(h1, h2):
    """``||H1 - H2||_F^2`` from the hat matrices, entry by entry."""
    a, b = np.asarray(getattr(h1, "matrix", h1)), np.asarray(getattr(h2, "matrix", h2))
    if a.shape != b.shape:
        raise ValueError(f"hat matrices have different shapes: {a.shape} vs {b.shape}")
    k1, k2 = getattr(h1, "kappa", None), getattr(h2, "kappa", None)
    if k1 is not None and k2 is not None and k1 != k2:
        raise ValueError("hat matrices use different shrinkage factors")
    return float(np.sum((a - b) ** 2))


def nonshared_dof_via_angles(x1, x2, g=1.0):
    """``||H1 - H2||_F^2`` from principal angles, counts of shared and partial dimensions."""
    return principal_angles(x1, x2, g).nonshared_dof
