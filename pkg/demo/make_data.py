"""Regenerate the demo datasets (deterministic)."""

from pathlib import Path

import numpy as np

from bfvar import DataGeneratingProcess
from bfvar.io import write_csv
from bfvar.oracle import chunk_rng, simulate_dgp

HERE = Path(__file__).parent


def overconfidence(n=100):
    # two orthogonal single regressors with the true mean halfway between them
    t = np.arange(n)
    x1, x2 = np.cos(2 * np.pi * t / n), np.sin(2 * np.pi * t / n)
    mu = x1 + x2
    y = simulate_dgp(DataGeneratingProcess(mu, 4.0), chunk_rng(99, 0))
    write_csv(HERE / "overconfidence.csv", ("t", "x1", "x2", "mu", "y"), zip(t, x1, x2, mu, y))


def multivariate(n=30):
    rng = np.random.default_rng(2024)
    x = rng.normal(size=(n, 3))
    mu = x[:, :2] @ np.array([[1.0, 0.5], [-0.5, 1.0]]) + 0.3 * x[:, 2:] @ np.array([[1.0, -1.0]])
    y = mu + rng.normal(size=(n, 2))
    cols = ("x1", "x2", "x3", "mu1", "mu2", "y1", "y2")
    write_csv(HERE / "multivariate.csv", cols, np.column_stack([x, mu, y]))


if __name__ == "__main__":
    overconfidence()
    multivariate()
