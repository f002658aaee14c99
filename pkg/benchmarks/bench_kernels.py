"""Compare the compiled and numpy backends of the bootstrap kernel.

Usage: python3 benchmarks/bench_kernels.py [--replicates B] [--repeat R]
"""

import argparse
import time

import numpy as np

from bfvar import ModelSet, RegressionModel, kernels
from bfvar.resample import ResamplePlan, _stack_problem, resample_indices

CASES = (
    # (n, design widths of the K models, q)
    (50, (1, 2, 3), 1),
    (100, (2, 4, 6, 8), 1),
    (200, (3, 5, 10), 1),
    (100, (2, 4), 3),
)


def build(n, widths, q, replicates, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, max(widths)))
    noise = 1.0 if q == 1 else np.eye(q)
    ms = ModelSet([RegressionModel(x[:, :w], noise, 4.0) for w in widths], [f"M{w}" for w in widths])
    y = rng.normal(size=n) if q == 1 else rng.normal(size=(n, q))
    plan = ResamplePlan("circular_block", replicates, seed=seed)
    idx = np.stack([resample_indices(n, plan, b) for b in range(replicates)])
    return _stack_problem(y, ms), idx


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--replicates", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND}); B = {args.replicates}")
    header = f"{'n':>5} {'widths':>12} {'q':>2} " + " ".join(f"{b + ' [s]':>12}" for b in backends)
    if "cython" in backends:
        header += f" {'speed-up':>9} {'max rel diff':>13}"
    print(header)
    for n, widths, q in CASES:
        (Z, cols, ptr, resp, kappa), idx = build(n, widths, q, args.replicates)
        out, times = {}, {}
        for b in backends:
            times[b] = best_time(
                lambda b=b: out.__setitem__(b, kernels.replicate_residuals(Z, idx, cols, ptr, resp, kappa, backend=b)),
                args.repeat,
            )
        line = f"{n:>5} {str(widths):>12} {q:>2} " + " ".join(f"{times[b]:>12.4f}" for b in backends)
        if "cython" in backends:
            ref, fast = out["python"][0], out["cython"][0]
            diff = np.max(np.abs(fast - ref) / np.maximum(np.abs(ref), 1e-300))
            line += f" {times['python'] / times['cython']:>8.1f}x {diff:>13.1e}"
        print(line)


if __name__ == "__main__":
    main()
