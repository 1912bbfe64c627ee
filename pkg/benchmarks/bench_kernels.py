#!/usr/bin/env python3
"""Throughput comparison of the two log-posterior kernels.

    python benchmarks/bench_kernels.py [--evals N]

The loop kernel is compiled with numba and is the default backend; the
vectorized numpy kernel is the fallback selected by MRROPE_NO_NUMBA=1.
Both are timed on identical position batches at two dataset scales. With
the flag set only the numpy path is reported, since the uncompiled loop
kernel is not a configuration anyone runs.
"""
import argparse
import time

import numpy as np

from mrrope import _kernels
from mrrope.model import PriorSpec, dim, kernel_args
from mrrope.simulate import ScenarioConfig, simulate_population, split_missing

SCALES = (
    ("analysis scale", 400, 15, 0.2),
    ("small", 30, 5, 0.0),
)


def make_data(n_total, n_instruments, missing_rate, seed=0):
    scenario = ScenarioConfig(
        missing_rate=missing_rate, alpha_all=0.3, beta_true=0.3,
        n_instruments=n_instruments, n_total=n_total,
        population_size=max(1000, 3 * n_total))
    rng = np.random.default_rng(seed)
    population = simulate_population(scenario, rng)
    return split_missing(population, n_total, missing_rate, rng)


def evals_per_second(kern, batch, args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for q in batch:
            kern(q, *args)
        best = min(best, time.perf_counter() - start)
    return len(batch) / best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--evals", type=int, default=2000,
                        help="gradient evaluations per timing pass")
    opts = parser.parse_args()

    kernels = [("numpy", _kernels.logpost_grad_numpy)]
    if _kernels.BACKEND == "numba":
        kernels.insert(0, ("numba", _kernels.logpost_grad))
    else:
        print("note: compiled kernel disabled (MRROPE_NO_NUMBA set)")

    print(f"backend: {_kernels.BACKEND}; {opts.evals} evals per pass, "
          f"best of 3\n")
    header = f"{'scale':<16}{'n':>5}{'J':>4}{'dim':>6}"
    header += "".join(f"{name + ' evals/s':>16}" for name, _ in kernels)
    if len(kernels) == 2:
        header += f"{'speedup':>9}"
    print(header)

    for label, n_total, n_instruments, missing_rate in SCALES:
        data = make_data(n_total, n_instruments, missing_rate)
        args = kernel_args(data, PriorSpec())
        rng = np.random.default_rng(1)
        batch = rng.uniform(-0.5, 0.5, (opts.evals, dim(data)))
        for _, kern in kernels:
            kern(batch[0], *args)  # JIT warm-up / cache touch
        rates = [evals_per_second(kern, batch, args) for _, kern in kernels]
        row = f"{label:<16}{n_total:>5}{n_instruments:>4}{dim(data):>6}"
        row += "".join(f"{rate:>16,.0f}" for rate in rates)
        if len(rates) == 2:
            row += f"{rates[0] / rates[1]:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
