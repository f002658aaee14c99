"""Sampling variability of Bayes factors for Gaussian linear regression under Zellner's g-prior."""

from .geometry import PrincipalAngleReport, nonshared_dof_direct, nonshared_dof_via_angles, principal_angles
from .gprior import RegressionModel, hat_matrix, log_marginal, log_marginal_mv, posterior_mean, shrinkage
from .kernels import BACKEND
from .moments import (
    BfMoments,
    DataGeneratingProcess,
    alignment_decomposition,
    bf_moments_equal_var,
    bf_moments_general,
    bf_moments_mv,
    divergence_bound,
    kl_between_models,
    kl_dgp_to_model,
    log_bf,
    omega,
    projected_mean,
)
from .oracle import OracleReport, empirical_bf_moments, simulate_dgp
from .posterior import ModelSet, PmpVector, family_pmp, kass_raftery_class, pmp
from .quadform import GaussianSpec, QuadForm, quad_cov, quad_mean, quad_var
from .resample import (
    ConclusivenessTable,
    PmpMatrix,
    ResamplePlan,
    bf_histogram,
    bootstrap_pmp,
    conclusiveness,
    resample_indices,
    stripe_export,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BfMoments",
    "ConclusivenessTable",
    "DataGeneratingProcess",
    "GaussianSpec",
    "ModelSet",
    "OracleReport",
    "PmpMatrix",
    "PmpVector",
    "PrincipalAngleReport",
    "QuadForm",
    "RegressionModel",
    "ResamplePlan",
    "alignment_decomposition",
    "bf_histogram",
    "bf_moments_equal_var",
    "bf_moments_general",
    "bf_moments_mv",
    "bootstrap_pmp",
    "conclusiveness",
    "divergence_bound",
    "empirical_bf_moments",
    "family_pmp",
    "hat_matrix",
    "kass_raftery_class",
    "kl_between_models",
    "kl_dgp_to_model",
    "log_bf",
    "log_marginal",
    "log_marginal_mv",
    "nonshared_dof_direct",
    "nonshared_dof_via_angles",
    "omega",
    "pmp",
    "posterior_mean",
    "principal_angles",
    "projected_mean",
    "quad_cov",
    "quad_mean",
    "quad_var",
    "resample_indices",
    "shrinkage",
    "simulate_dgp",
    "stripe_export",
    "__version__",
]
