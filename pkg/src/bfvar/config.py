"""TOML run configuration for the ``bfvar`` command line.

Example::

    seed = 7
    out = "results"

    [data]
    path = "data.csv"
    response = "y"            # or a list of columns for a matrix response

    [[models]]
    label = "M1"
    columns = ["x1", "x2"]
    noise = 1.0               # variance, or a q x q nested list
    g = 1.0
    prior = 0.5               # optional; uniform when omitted everywhere

    [compare]                 # optional; defaults to the first two models
    first = "M1"              # a label or a list of labels (a family)
    second = "M2"

    [dgp]                     # moments / oracle
    mean_columns = ["mu"]     # or: design = [...] with coef = [...]
    noise = 4.0               # or a q x q list, or noise_column = "var"

    [bootstrap]
    scheme = "circular_block"
    replicates = 1000
    block_length = 5
    thresholds = [0.9, 0.95, 0.99]
    sort_by = "M1"

    [oracle]
    n_sims = 200000

    [families]                # optional model -> family map for ``pmp``
    M1 = "A"
"""

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .gprior import KAPPA_EXPONENTS, RegressionModel
from .io import InputError, load_dataset
from .moments import DataGeneratingProcess
from .posterior import ModelSet
from .resample import DEFAULT_THRESHOLDS, ResamplePlan

COMMANDS = ("moments", "bootstrap", "oracle", "angles", "pmp")


@dataclass
class RunConfig:
    command: str
    path: Path
    raw: dict
    out: Path = Path(".")
    seed: int = 0
    threads: int = 1
    replicates: int = None
    block_length: int = None
    _table: object = field(default=None, repr=False)

    @classmethod
    def load(cls, command, path, **overrides):
        if command not in COMMANDS:
            raise InputError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
        path = Path(path)
        try:
            raw = tomllib.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise InputError(f"{path}: config file not found") from None
        except (OSError, UnicodeDecodeError) as exc:
            raise InputError(f"{path}: cannot read config ({exc})") from None
        except tomllib.TOMLDecodeError as exc:
            raise InputError(f"{path}: invalid TOML ({exc})") from None
        declared = raw.get("command")
        if declared is not None and declared != command:
            raise InputError(f"{path}: config declares command {declared!r} but {command!r} was requested")
        cfg = cls(command=command, path=path, raw=raw)
        cfg.out = Path(overrides.get("out") or raw.get("out", "."))
        if not cfg.out.is_absolute() and overrides.get("out") is None:
            cfg.out = path.parent / cfg.out
        seed = overrides.get("seed")
        cfg.seed = _int(raw.get("seed", 0) if seed is None else seed, "seed", lo=0)
        cfg.threads = _int(overrides.get("threads") or 1, "threads", lo=1)
        cfg.replicates = overrides.get("replicates")
        cfg.block_length = overrides.get("block_length")
        return cfg

    def section(self, name, required=True):
        sec = self.raw.get(name)
        if sec is None:
            if required:
                raise InputError(f"{self.path}: missing [{name}] section")
            return {}
        if not isinstance(sec, dict):
            raise InputError(f"{self.path}: [{name}] must be a table")
        return sec

    def _resolve(self, p):
        p = Path(p)
        return p if p.is_absolute() else self.path.parent / p

    @property
    def table(self):
        if self._table is None:
            data = self.section("data")
            if "path" not in data:
                raise InputError(f"{self.path}: [data] needs a path")
            self._table = load_dataset(self._resolve(data["path"]))
        return self._table

    @property
    def kappa_exponent(self):
        value = self.raw.get("kappa_exponent", "p")
        if value not in KAPPA_EXPONENTS:
            raise InputError(f"{self.path}: kappa_exponent must be one of {KAPPA_EXPONENTS}")
        return value

    def response(self):
        cols = self.section("data").get("response")
        if cols is None:
            raise InputError(f"{self.path}: [data] needs a response column")
        y = self.table.select(cols)
        return y[:, 0] if isinstance(cols, str) else y

    def _model(self, spec, i):
        where = f"{self.path}: models[{i}]"
        if not isinstance(spec, dict):
            raise InputError(f"{where} must be a table")
        if "columns" not in spec:
            raise InputError(f"{where} needs design columns")
        x = self.table.select(spec["columns"])
        try:
            return RegressionModel(x, spec.get("noise", 1.0), spec.get("g", 1.0))
        except (ValueError, TypeError) as exc:
            raise InputError(f"{where} ({spec.get('label', i)}): {exc}") from None

    def model_set(self):
        specs = self.raw.get("models")
        if not isinstance(specs, list) or len(specs) < 2:
            raise InputError(f"{self.path}: need at least two [[models]] entries")
        models = [self._model(s, i) for i, s in enumerate(specs)]
        labels = [str(s.get("label", f"M{i + 1}")) for i, s in enumerate(specs)]
        priors = [s.get("prior") for s in specs]
        if all(p is None for p in priors):
            prior = None
        elif any(p is None for p in priors):
            raise InputError(f"{self.path}: give a prior for every model or for none")
        else:
            prior = np.asarray(priors, dtype=float)
            if np.any(prior < 0) or prior.sum() <= 0:
                raise InputError(f"{self.path}: priors must be non-negative and not all zero")
            prior = prior / prior.sum()
        try:
            return ModelSet(models, labels, prior)
        except ValueError as exc:
            raise InputError(f"{self.path}: {exc}") from None

    def comparison(self, model_set):
        cmp_ = self.section("compare", required=False)
        first = cmp_.get("first", model_set.labels[0])
        second = cmp_.get("second", model_set.labels[1])
        for side in (first, second):
            for lab in [side] if isinstance(side, str) else side:
                if lab not in model_set.labels:
                    raise InputError(f"{self.path}: [compare] refers to unknown model {lab!r}")
        return first, second

    def pair(self, model_set):
        first, second = self.comparison(model_set)
        if not (isinstance(first, str) and isinstance(second, str)):
            raise InputError(f"{self.path}: {self.command} compares two single models, not families")
        return (
            (first, model_set.models[model_set.index(first)]),
            (second, model_set.models[model_set.index(second)]),
        )

    def dgp(self):
        sec = self.section("dgp")
        t = self.table
        try:
            if "mean_columns" in sec:
                cols = sec["mean_columns"]
                mean = t.select(cols)
                if isinstance(cols, str) or len(cols) == 1 and not sec.get("matrix", False):
                    mean = mean[:, 0]
            elif "design" in sec and "coef" in sec:
                x = t.select(sec["design"])
                coef = np.asarray(sec["coef"], dtype=float)
                if coef.ndim == 1 and len(coef) != x.shape[1]:
                    raise InputError(f"{self.path}: [dgp] coef has {len(coef)} entries for {x.shape[1]} columns")
                return _dgp_from(sec, DataGeneratingProcess.from_regression(x, coef, 1.0).mean, t)
            else:
                raise InputError(f"{self.path}: [dgp] needs mean_columns or design + coef")
            return _dgp_from(sec, mean, t)
        except InputError:
            raise
        except (ValueError, TypeError) as exc:
            raise InputError(f"{self.path}: [dgp] {exc}") from None

    def plan(self):
        sec = self.section("bootstrap", required=False)
        replicates = self.replicates if self.replicates is not None else sec.get("replicates", 1000)
        block = self.block_length if self.block_length is not None else sec.get("block_length")
        try:
            return ResamplePlan(
                scheme=sec.get("scheme", "circular_block"),
                replicates=_int(replicates, "replicates", lo=1),
                seed=self.seed,
                block_length=None if block is None else _int(block, "block_length", lo=1),
            )
        except ValueError as exc:
            raise InputError(f"{self.path}: [bootstrap] {exc}") from None

    def thresholds(self):
        t = self.section("bootstrap", required=False).get("thresholds", list(DEFAULT_THRESHOLDS))
        t = tuple(float(v) for v in t)
        if any(not 0.5 < v < 1 for v in t):
            raise InputError(f"{self.path}: thresholds must lie in (0.5, 1)")
        return t


def _dgp_from(sec, mean, table):
    if "noise_column" in sec:
        noise = np.diag(table.column(sec["noise_column"]))
    else:
        noise = sec.get("noise")
        if noise is None:
            raise InputError("[dgp] needs noise or noise_column")
    return DataGeneratingProcess(mean, noise)


def _int(value, name, lo=None):
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise InputError(f"{name} must be an integer, got {value!r}") from None
    if isinstance(value, float) and value != out:
        raise InputError(f"{name} must be an integer, got {value!r}")
    if lo is not None and out < lo:
        raise InputError(f"{name} must be at least {lo}, got {out}")
    return out
