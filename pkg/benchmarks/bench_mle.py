"""Benchmark the MLE grid-scan kernels: numba @njit vs the numpy fallback.

The per-replication log-likelihood scan over the parameter grid dominates
the covariance-study runtime, so both the raw scan and a full study are
timed on each path.  The numpy path amortizes a precomputed
log-probability table across replications; the numba path fuses the trig
model into the scan loop.

Run:  python benchmarks/bench_mle.py
"""

import os
import time

import numpy as np


def time_scans(scanner, counts_list, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for counts in counts_list:
            scanner.scan(counts)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_scans(use_numba):
    os.environ["IONSENSE_NO_NUMBA"] = "0" if use_numba else "1"
    from ionsense import kernels

    rng = np.random.default_rng(0)
    times = np.array([40.0])
    results = {}

    lam = kernels.LambdaScanner(times, np.linspace(1e-3, 0.028, 64),
                                np.linspace(0, np.pi / 2, 64))
    counts3 = [rng.multinomial(10_000, [0.45, 0.35, 0.2])[None, :].astype(float)
               for _ in range(200)]
    lam.scan(counts3[0])  # warm-up / JIT compile
    results["lambda scan x200 (64^2 grid)"] = time_scans(lam, counts3)

    pod = kernels.FourPodScanner(times, np.linspace(1e-3, 0.04, 64),
                                 np.linspace(0, np.pi / 2, 64),
                                 np.linspace(0, np.pi / 2, 64))
    counts5 = [rng.multinomial(10_000, [0.25, 0.3, 0.2, 0.15, 0.1])[None, :].astype(float)
               for _ in range(200)]
    pod.scan(counts5[0])
    results["fourpod scan x200 (64^3 grid)"] = time_scans(pod, counts5)
    return results


def bench_studies(use_numba):
    os.environ["IONSENSE_NO_NUMBA"] = "0" if use_numba else "1"
    from ionsense import estimation, params

    results = {}
    p = params.fig2_defaults(run={"shots": 10_000, "replications": 200, "seed": 1})
    t0 = time.perf_counter()
    estimation.covariance_study(p, pulse_area_fraction=0.45)
    results["lambda study (nu=1e4, R=200)"] = time.perf_counter() - t0

    p4 = params.fig4_defaults(run={"shots": 10_000, "replications": 200, "seed": 1})
    t0 = time.perf_counter()
    estimation.covariance_study(p4, pulse_area_fraction=0.45)
    results["fourpod study (nu=1e4, R=200)"] = time.perf_counter() - t0
    return results


def main():
    from ionsense import kernels

    if not kernels.HAVE_NUMBA:
        print("numba not importable; only the numpy path is available")
        return

    rows = {}
    for use_numba in (True, False):
        label = "numba" if use_numba else "numpy"
        for name, dt in {**bench_scans(use_numba), **bench_studies(use_numba)}.items():
            rows.setdefault(name, {})[label] = dt

    width = max(len(n) for n in rows)
    print(f"{'benchmark':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, cols in rows.items():
        ratio = cols["numpy"] / cols["numba"]
        print(f"{name:<{width}}  {cols['numba']:>9.3f}s  {cols['numpy']:>9.3f}s  "
              f"{ratio:>7.2f}x")


if __name__ == "__main__":
    main()
