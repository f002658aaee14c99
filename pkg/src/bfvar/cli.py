"""``bfvar`` command line.

Exit codes: 0 success, 1 numerical or statistical failure, 2 input error.
"""

import argparse
import logging
import os
import sys

import numpy as np

from . import geometry, moments, oracle, posterior, resample
from .config import COMMANDS, RunConfig
from .gprior import hat_matrix
from .io import InputError, emit_svg_histogram, write_csv

logger = logging.getLogger("bfvar")

MOMENT_FIELDS = (
    "mean",
    "variance",
    "kl_difference_term",
    "complexity_penalty_term",
    "divergence_term",
    "nonshared_dof_term",
)


class NumericalFailure(RuntimeError):
    pass


def run_moments(cfg):
    ms = cfg.model_set()
    (l1, m1), (l2, m2) = cfg.pair(ms)
    dgp = cfg.dgp()
    try:
        route = "mv" if m1.multivariate else ("equal_var" if dgp.kind == "scalar" and m1.noise == m2.noise else "general")
        res = oracle.closed_form(m1, m2, dgp, cfg.kappa_exponent)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None
    path = write_csv(
        cfg.out / "moments.csv",
        ("first", "second", "route") + MOMENT_FIELDS,
        [(l1, l2, route) + tuple(res.as_dict()[f] for f in MOMENT_FIELDS)],
    )
    written = [path]
    if route == "mv":
        rep = moments.alignment_decomposition(m1, m2, dgp)
        q = rep.alignment.shape[0]
        rows = [
            (i, j, rep.model_eigenvalues[i], rep.true_eigenvalues[j], rep.alignment[i, j], rep.per_direction_contributions[i, j])
            for i in range(q)
            for j in range(q)
        ]
        written.append(
            write_csv(
                cfg.out / "alignment.csv",
                ("model_direction", "true_direction", "model_eigenvalue", "true_eigenvalue", "alignment", "contribution"),
                rows,
            )
        )
    return written


def run_oracle(cfg):
    ms = cfg.model_set()
    (l1, m1), (l2, m2) = cfg.pair(ms)
    dgp = cfg.dgp()
    n_sims = cfg.section("oracle", required=False).get("n_sims", oracle.DEFAULT_SIMS)
    try:
        rep = oracle.empirical_bf_moments(
            dgp, m1, m2, int(n_sims), cfg.seed, threads=cfg.threads, kappa_exponent=cfg.kappa_exponent
        )
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None
    d = rep.as_dict()
    path = write_csv(cfg.out / "oracle_report.csv", ("first", "second") + tuple(d), [(l1, l2) + tuple(d.values())])
    if not rep.passes():
        raise NumericalFailure(
            f"closed form disagrees with simulation (z_mean={rep.z_mean:.2f}, z_var={rep.z_var:.2f}); report in {path}"
        )
    return [path]


def run_angles(cfg):
    ms = cfg.model_set()
    (l1, m1), (l2, m2) = cfg.pair(ms)
    if m1.g != m2.g:
        raise InputError("angles needs both models to share g")
    rep = geometry.principal_angles(m1.design, m2.design, m1.g)
    direct = geometry.nonshared_dof_direct(hat_matrix(m1), hat_matrix(m2))
    cos2 = rep.cos2
    rows = []
    for j, theta in enumerate(rep.angles):
        kind = "shared" if j < rep.shared_dims else ("partial" if j < rep.shared_dims + rep.partial_dims else "orthogonal")
        rows.append((j + 1, theta, cos2[j], kind, rep.shared_dims, rep.partial_dims, rep.nonshared_dof, direct))
    path = write_csv(
        cfg.out / "angles.csv",
        ("index", "theta", "cos2", "class", "s", "r", "nonshared_dof_angles", "nonshared_dof_direct"),
        rows,
    )
    return [path]


def run_pmp(cfg):
    ms = cfg.model_set()
    y = cfg.response()
    lm = resample.full_data_log_marginals(y, ms, cfg.kappa_exponent)
    p = posterior.pmp(lm, ms.prior_probs, ms.labels)
    written = [
        write_csv(
            cfg.out / "pmp.csv",
            ("label", "log_marginal", "prior", "pmp"),
            zip(ms.labels, lm, ms.prior_probs, p.probs),
        )
    ]
    families = cfg.raw.get("families")
    if families:
        try:
            fam = posterior.family_pmp(p, families)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        written.append(write_csv(cfg.out / "family_pmp.csv", ("family", "pmp"), zip(fam.labels, fam.probs)))
    return written


def run_bootstrap(cfg):
    ms = cfg.model_set()
    y = cfg.response()
    plan = cfg.plan()
    thresholds = cfg.thresholds()
    sec = cfg.section("bootstrap", required=False)
    sort_by = sec.get("sort_by", ms.labels[0])
    if sort_by not in ms.labels:
        raise InputError(f"sort_by refers to unknown model {sort_by!r}")
    first, second = cfg.comparison(ms)
    try:
        pm = resample.bootstrap_pmp(y, ms, plan, cfg.threads, cfg.kappa_exponent)
    except resample.ResampleFailure as exc:
        raise NumericalFailure(str(exc)) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = cfg.out
    header = ("replicate",) + ms.labels
    written = [write_csv(out / "pmp_matrix.csv", header, _rows(pm))]
    written.append(write_csv(out / "stripes.csv", header, _rows(resample.stripe_export(pm, sort_by))))
    table = resample.conclusiveness(pm, thresholds)
    written.append(
        write_csv(
            out / "conclusiveness.csv",
            ("threshold",) + ms.labels + ("inconclusive",),
            ((t,) + tuple(frac[lab] for lab in ms.labels) + (inc,) for t, frac, inc in table.rows()),
        )
    )
    hist = resample.bf_histogram(y, ms, plan, first, second, kappa_exponent=cfg.kappa_exponent, pmps=pm)
    values, observed, counts = hist.values, hist.observed, hist.counts
    written.append(
        write_csv(
            out / "bf_histogram.csv",
            ("replicate", "log_bf", "evidence"),
            [("observed", observed, resample.evidence_bins([observed])[0])]
            + list(zip(pm.replicate_ids.tolist(), values, resample.evidence_bins(values))),
        )
    )
    written.append(write_csv(out / "bf_evidence_counts.csv", ("evidence", "count"), counts.items()))
    written.append(out / "bf_histogram.svg")
    emit_svg_histogram(values, observed, out / "bf_histogram.svg", title=f"log BF: {_name(first)} vs {_name(second)}")
    if pm.n_failed:
        logger.warning("%d replicates dropped (rank-deficient resampled designs)", pm.n_failed)
    return written


def _name(side):
    return side if isinstance(side, str) else "+".join(side)


def _rows(pm):
    for rid, row in zip(pm.replicate_ids, pm.values):
        yield (int(rid),) + tuple(row)


RUNNERS = {
    "moments": run_moments,
    "bootstrap": run_bootstrap,
    "oracle": run_oracle,
    "angles": run_angles,
    "pmp": run_pmp,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bfvar",
        description="Bayes factor sampling moments and bootstrap overconfidence diagnostics.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="TOML run configuration")
    parser.add_argument("--seed", type=int, help="overrides the config seed")
    parser.add_argument("--out", help="output directory (default: config 'out' or the config's folder)")
    parser.add_argument("--replicates", type=int, help="bootstrap replicates B")
    parser.add_argument("--block-length", type=int, help="circular block length L")
    parser.add_argument("--threads", type=int, help="worker threads (overrides BFVAR_THREADS)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get("BFVAR_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"BFVAR_THREADS must be an integer, got {env!r}") from None
    return 1


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        threads = _threads(args.threads)
        cfg = RunConfig.load(
            args.command,
            args.config,
            seed=args.seed,
            out=args.out,
            threads=threads,
            replicates=args.replicates,
            block_length=args.block_length,
        )
        cfg.out.mkdir(parents=True, exist_ok=True)
        written = RUNNERS[args.command](cfg)
    except InputError as exc:
        print(f"bfvar: input error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"bfvar: numerical failure: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"bfvar: input error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        logger.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
