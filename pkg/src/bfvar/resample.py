"""Bootstrap approximation of the sampling distribution of PMPs and log Bayes factors.

Rows of the response and of every design are resampled jointly, either by the
circular block bootstrap (time series) or iid (exchangeable units).  Each
replicate draws from its own counter-based stream keyed on ``(seed, replicate)``
so results do not depend on scheduling or thread count.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .gprior import LOG_2PI, kappa_exponent_factor
from .posterior import (
    KASS_RAFTERY_LABELS,
    KASS_RAFTERY_THRESHOLDS,
    family_log_marginal,
    pmp_matrix,
)

logger = logging.getLogger(__name__)

SCHEMES = ("circular_block", "iid")
DEFAULT_THRESHOLDS = (0.9, 0.95, 0.99)
MAX_FAILED_SHARE = 0.01


class ResampleFailure(RuntimeError):
    """Too many bootstrap replicates had rank-deficient designs."""


@dataclass(frozen=True)
class ResamplePlan:
    scheme: str = "circular_block"
    replicates: int = 1000
    seed: int = 0
    block_length: int = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if int(self.replicates) < 1:
            raise ValueError(f"replicates must be at least 1, got {self.replicates}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.block_length is not None and int(self.block_length) < 1:
            raise ValueError(f"block length must be positive, got {self.block_length}")
        object.__setattr__(self, "replicates", int(self.replicates))
        object.__setattr__(self, "seed", int(self.seed))

    def block_length_for(self, n):
        """Block length for ``n`` rows; defaults to ``ceil(n ** (1/3))``."""
        if self.block_length is None:
            # integer cube root, avoiding float round-up at perfect cubes
            length = round(n ** (1.0 / 3.0))
            while length**3 < n:
                length += 1
            while length > 1 and (length - 1) ** 3 >= n:
                length -= 1
            return max(1, length)
        if self.block_length > n:
            raise ValueError(f"block length {self.block_length} exceeds the {n} available rows")
        return int(self.block_length)


def replicate_rng(seed, replicate):
    """Independent Philox stream for one replicate."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(replicate),))
    return np.random.Generator(np.random.Philox(ss))


def resample_indices(n, plan, replicate):
    """Row indices of replicate ``replicate`` (deterministic given the plan's seed)."""
    if n < 1:
        raise ValueError("cannot resample an empty dataset")
    rng = replicate_rng(plan.seed, replicate)
    if plan.scheme == "iid":
        return rng.integers(0, n, size=n)
    length = plan.block_length_for(n)
    starts = rng.integers(0, n, size=math.ceil(n / length))
    return ((starts[:, None] + np.arange(length)) % n).ravel()[:n]


@dataclass(frozen=True)
class PmpMatrix:
    """Bootstrap PMPs, one row per successful replicate."""

    values: np.ndarray
    labels: tuple
    log_marginals: np.ndarray = None
    replicate_ids: np.ndarray = None
    n_failed: int = 0

    def column(self, label):
        try:
            return self.values[:, self.labels.index(label)]
        except ValueError:
            raise KeyError(f"unknown model label {label!r}") from None


@dataclass(frozen=True)
class ConclusivenessTable:
    thresholds: tuple
    labels: tuple
    fractions: np.ndarray
    inconclusive: np.ndarray

    def rows(self):
        for t, frac, inc in zip(self.thresholds, self.fractions, self.inconclusive):
            yield t, dict(zip(self.labels, frac.tolist())), float(inc)


@dataclass(frozen=True)
class BfHistogram:
    values: np.ndarray
    observed: float
    counts: dict
    first: tuple
    second: tuple
    n_failed: int = 0


def _stack_problem(y, model_set):
    """Pack designs and response into one table plus column maps for the kernel."""
    y = np.asarray(y, dtype=float)
    y2 = y[:, None] if y.ndim == 1 else y
    n = y2.shape[0]
    blocks, cols, ptr = [], [], [0]
    offset = 0
    for model in model_set.models:
        if model.n != n:
            raise ValueError(f"model design has {model.n} rows but the response has {n}")
        blocks.append(model.design)
        cols.extend(range(offset, offset + model.p))
        offset += model.p
        ptr.append(len(cols))
    Z = np.hstack(blocks + [y2])
    resp = np.arange(offset, offset + y2.shape[1])
    kappa = np.array([m.kappa for m in model_set.models])
    return Z, np.array(cols), np.array(ptr), resp, kappa


def _log_marginals_from_forms(forms, model_set, n, kappa_exponent):
    out = np.empty(forms.shape[:2])
    for k, model in enumerate(model_set.models):
        log_prior_vol = 0.5 * model.p * np.log1p(-model.kappa)
        if model.multivariate:
            sigma = model.noise
            q = sigma.shape[0]
            _, logdet = np.linalg.slogdet(sigma)
            tr = np.einsum("bij,ij->b", forms[:, k], np.linalg.inv(sigma))
            factor = kappa_exponent_factor(model, kappa_exponent)
            out[:, k] = -0.5 * n * q * LOG_2PI - 0.5 * n * logdet + factor * log_prior_vol - 0.5 * tr
        else:
            s2 = model.noise
            out[:, k] = -0.5 * n * (LOG_2PI + np.log(s2)) + log_prior_vol - 0.5 * forms[:, k, 0, 0] / s2
    return out


def _chunks(total, threads):
    size = max(1, math.ceil(total / max(1, threads * 4)))
    return [(start, min(total, start + size)) for start in range(0, total, size)]


def bootstrap_log_marginals(y, model_set, plan, threads=1, kappa_exponent="p", backend=None):
    """Log marginal likelihoods of every model on every bootstrap replicate.

    Returns ``(log_marginals, ok_rows)`` where ``log_marginals`` is ``B x K`` and
    ``ok_rows`` flags replicates whose resampled designs all had full rank.
    """
    Z, cols, ptr, resp, kappa = _stack_problem(y, model_set)
    n = Z.shape[0]
    if n < max(m.p for m in model_set.models) + 1:
        raise ValueError(f"need more than {max(m.p for m in model_set.models)} rows, got {n}")
    plan.block_length_for(n)

    def work(span):
        start, stop = span
        idx = np.stack([resample_indices(n, plan, b) for b in range(start, stop)])
        return kernels.replicate_residuals(Z, idx, cols, ptr, resp, kappa, backend=backend)

    spans = _chunks(plan.replicates, threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, spans))
    else:
        parts = [work(s) for s in spans]
    forms = np.concatenate([f for f, _ in parts])
    ok = np.concatenate([o for _, o in parts]).all(axis=1)
    lm = _log_marginals_from_forms(forms, model_set, n, kappa_exponent)
    return lm, ok


def full_data_log_marginals(y, model_set, kappa_exponent="p"):
    """Log marginals on the original rows, computed by the same kernel as the replicates."""
    Z, cols, ptr, resp, kappa = _stack_problem(y, model_set)
    n = Z.shape[0]
    forms, ok = kernels.replicate_residuals(Z, np.arange(n)[None, :], cols, ptr, resp, kappa)
    if not ok.all():
        raise ValueError("a model design is rank deficient on the full data")
    return _log_marginals_from_forms(forms, model_set, n, kappa_exponent)[0]


def _check_failures(ok, total):
    n_failed = int(total - ok.sum())
    if n_failed:
        logger.warning("%d of %d bootstrap replicates had rank-deficient designs", n_failed, total)
    if n_failed > MAX_FAILED_SHARE * total:
        raise ResampleFailure(
            f"{n_failed} of {total} replicates had rank-deficient designs (limit {MAX_FAILED_SHARE:.0%})"
        )
    return n_failed


def bootstrap_pmp(y, model_set, plan, threads=1, kappa_exponent="p", backend=None):
    """Bootstrap distribution of posterior model probabilities.

    ``y`` is the response (vector or ``n x q``); design rows of every model are
    resampled together with it.
    """
    lm, ok = bootstrap_log_marginals(y, model_set, plan, threads, kappa_exponent, backend)
    n_failed = _check_failures(ok, plan.replicates)
    lm = lm[ok]
    values = pmp_matrix(lm, model_set.prior_probs)
    return PmpMatrix(values, model_set.labels, lm, np.flatnonzero(ok), n_failed)


def conclusiveness(p, thresholds=DEFAULT_THRESHOLDS):
    """Share of replicates in which each model's PMP exceeds each threshold."""
    values = p.values if isinstance(p, PmpMatrix) else np.asarray(p, dtype=float)
    labels = p.labels if isinstance(p, PmpMatrix) else tuple(str(k) for k in range(values.shape[1]))
    if values.size == 0 or values.shape[0] == 0:
        raise ValueError("PMP matrix is empty")
    thresholds = tuple(float(t) for t in thresholds)
    if any(not 0.5 < t < 1.0 for t in thresholds):
        raise ValueError(f"thresholds must lie in (0.5, 1), got {thresholds}")
    fractions = np.array([(values > t).mean(axis=0) for t in thresholds])
    inconclusive = np.array([(~(values > t).any(axis=1)).mean() for t in thresholds])
    return ConclusivenessTable(thresholds, tuple(labels), fractions, inconclusive)


def stripe_export(p, sort_by):
    """Rows sorted by descending PMP of model ``sort_by`` (stable)."""
    order = np.argsort(-p.column(sort_by), kind="stable")
    return PmpMatrix(
        p.values[order],
        p.labels,
        None if p.log_marginals is None else p.log_marginals[order],
        None if p.replicate_ids is None else p.replicate_ids[order],
        p.n_failed,
    )


EVIDENCE_BINS = tuple(
    [f"{lab} for second" for lab in reversed(KASS_RAFTERY_LABELS[1:])]
    + [KASS_RAFTERY_LABELS[0]]
    + [f"{lab} for first" for lab in KASS_RAFTERY_LABELS[1:]]
)


def _signed_level(log_bfs, thresholds):
    v = 2.0 * np.asarray(log_bfs, dtype=float)
    level = np.searchsorted(np.asarray(thresholds), np.abs(v), side="right")
    return np.where(level == 0, 0, np.where(v > 0, level, -level)) + len(thresholds)


def evidence_bins(log_bfs, thresholds=KASS_RAFTERY_THRESHOLDS):
    """Signed Kass-Raftery category (an entry of :data:`EVIDENCE_BINS`) of each value."""
    return [EVIDENCE_BINS[i] for i in _signed_level(log_bfs, thresholds)]


def evidence_counts(log_bfs, thresholds=KASS_RAFTERY_THRESHOLDS):
    """Counts of ``log_bfs`` per signed Kass-Raftery category, keyed by :data:`EVIDENCE_BINS`."""
    counts = np.bincount(_signed_level(log_bfs, thresholds), minlength=2 * len(thresholds) + 1)
    return dict(zip(EVIDENCE_BINS, counts.tolist()))


def _as_members(sel, labels):
    sel = (sel,) if isinstance(sel, str) else tuple(sel)
    unknown = [s for s in sel if s not in labels]
    if unknown:
        raise KeyError(f"unknown model labels {unknown}")
    return sel, np.array([labels.index(s) for s in sel])


def family_log_bf(log_marginals, model_set, first, second):
    """``log`` of the ratio of (family) marginal likelihoods, row-wise.

    Each side is a model label or a list of labels; a family's marginal
    likelihood is the prior-weighted average over its members.
    """
    _, i1 = _as_members(first, model_set.labels)
    _, i2 = _as_members(second, model_set.labels)
    prior = model_set.prior_probs
    return family_log_marginal(log_marginals, i1, prior) - family_log_marginal(log_marginals, i2, prior)


def bf_histogram(y, model_set, plan, first, second, threads=1, kappa_exponent="p", backend=None, pmps=None):
    """Bootstrap log Bayes factors of ``first`` against ``second`` with evidence counts.

    Pass ``pmps`` (a :class:`PmpMatrix` from :func:`bootstrap_pmp` on the same
    data and plan) to reuse its replicates instead of resampling again.
    """
    first, _ = _as_members(first, model_set.labels)
    second, _ = _as_members(second, model_set.labels)
    if pmps is None:
        pmps = bootstrap_pmp(y, model_set, plan, threads, kappa_exponent, backend)
    values = family_log_bf(pmps.log_marginals, model_set, first, second)
    full = full_data_log_marginals(y, model_set, kappa_exponent)
    observed = float(family_log_bf(full, model_set, first, second))
    return BfHistogram(values, observed, evidence_counts(values), first, second, pmps.n_failed)
