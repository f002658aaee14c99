"""Posterior model probabilities, family aggregation and Kass-Raftery classification."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

# thresholds on 2 ln BF, from Kass and Raftery (1995)
KASS_RAFTERY_THRESHOLDS = (2.0, 6.0, 10.0)
KASS_RAFTERY_LABELS = ("negligible", "positive", "strong", "very strong")


@dataclass(frozen=True)
class ModelSet:
    models: tuple
    labels: tuple
    prior_probs: np.ndarray = None

    def __post_init__(self):
        models, labels = tuple(self.models), tuple(str(lab) for lab in self.labels)
        if len(models) < 2:
            raise ValueError("a model set needs at least two models")
        if len(labels) != len(models):
            raise ValueError(f"{len(labels)} labels for {len(models)} models")
        if len(set(labels)) != len(labels):
            raise ValueError(f"model labels must be unique, got {labels}")
        prior = (
            np.full(len(models), 1.0 / len(models))
            if self.prior_probs is None
            else _check_prior(self.prior_probs, len(models))
        )
        if abs(prior.sum() - 1.0) > 1e-12:
            raise ValueError(f"prior probabilities sum to {prior.sum()!r}, not 1")
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "prior_probs", prior)

    def __len__(self):
        return len(self.models)

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown model label {label!r}") from None


@dataclass(frozen=True)
class PmpVector:
    probs: np.ndarray
    log_marginals: np.ndarray
    labels: tuple = field(default=None)

    def as_dict(self):
        labels = self.labels or tuple(str(k) for k in range(len(self.probs)))
        return dict(zip(labels, self.probs.tolist()))


def _check_prior(prior, k):
    prior = np.asarray(prior, dtype=float).ravel()
    if prior.shape[0] != k:
        raise ValueError(f"prior has {prior.shape[0]} entries, expected {k}")
    if np.any(~np.isfinite(prior)) or np.any(prior < 0):
        raise ValueError("prior probabilities must be finite and non-negative")
    if prior.sum() <= 0:
        raise ValueError("prior probabilities are all zero")
    return prior


def pmp(log_marginals, priors=None, labels=None):
    """Posterior model probabilities from log marginal likelihoods.

    ``priors`` need not be normalised; they are rescaled to sum to one.
    Normalisation uses max-subtraction so that wildly different evidences do
    not overflow.
    """
    lm = np.asarray(log_marginals, dtype=float).ravel()
    if not np.all(np.isfinite(lm)):
        raise ValueError("log marginal likelihoods must be finite")
    prior = np.full(lm.shape[0], 1.0 / lm.shape[0]) if priors is None else _check_prior(priors, lm.shape[0])
    with np.errstate(divide="ignore"):
        z = lm + np.log(prior / prior.sum())
    probs = np.exp(z - logsumexp(z))
    probs /= probs.sum()
    return PmpVector(probs, lm, None if labels is None else tuple(labels))


def pmp_matrix(log_marginals, priors=None):
    """Row-wise :func:`pmp` for a ``B x K`` array, returning the probabilities only."""
    lm = np.atleast_2d(np.asarray(log_marginals, dtype=float))
    prior = np.full(lm.shape[1], 1.0 / lm.shape[1]) if priors is None else _check_prior(priors, lm.shape[1])
    with np.errstate(divide="ignore"):
        z = lm + np.log(prior / prior.sum())
    probs = np.exp(z - logsumexp(z, axis=1, keepdims=True))
    return probs / probs.sum(axis=1, keepdims=True)


def _family_index(labels, partition):
    missing = [lab for lab in labels if lab not in partition]
    if missing:
        raise ValueError(f"partition does not assign a family to {missing}")
    families = list(dict.fromkeys(partition[lab] for lab in labels))
    return families, np.array([families.index(partition[lab]) for lab in labels])


def family_pmp(p, partition, labels=None):
    """Sum model probabilities within families.

    ``partition`` maps every model label to a family name; families keep the
    order of first appearance.
    """
    labels = tuple(labels if labels is not None else p.labels)
    families, idx = _family_index(labels, partition)
    probs = np.bincount(idx, weights=p.probs, minlength=len(families))
    with np.errstate(divide="ignore"):
        # family evidence: equal-weight mean of member marginals
        lm = np.array(
            [logsumexp(p.log_marginals[idx == f]) - np.log(np.sum(idx == f)) for f in range(len(families))]
        )
    return PmpVector(probs, lm, tuple(families))


def family_log_marginal(log_marginals, members, priors=None):
    """Log marginal likelihood of a family, ``log sum_k w_k p(y | M_k)`` with within-family weights.

    Works row-wise on ``B x K`` arrays.
    """
    lm = np.asarray(log_marginals, dtype=float)
    members = np.asarray(members)
    prior = np.ones(lm.shape[-1]) if priors is None else np.asarray(priors, dtype=float)
    w = prior[members]
    w = w / w.sum()
    with np.errstate(divide="ignore"):
        return logsumexp(lm[..., members] + np.log(w), axis=-1)


def kass_raftery_class(log_bf, thresholds=KASS_RAFTERY_THRESHOLDS):
    """Classify a natural-log Bayes factor on the ``2 ln BF`` scale.

    Returns ``(category, favoured)`` where ``favoured`` is ``1`` for the first
    model, ``2`` for the second, or ``0`` when the evidence is negligible.
    """
    log_bf = float(log_bf)
    if not np.isfinite(log_bf):
        raise ValueError(f"log Bayes factor must be finite, got {log_bf}")
    level = int(np.searchsorted(np.asarray(thresholds), abs(2.0 * log_bf), side="right"))
    category = KASS_RAFTERY_LABELS[level]
    if level == 0:
        return category, 0
    return category, 1 if log_bf > 0 else 2
