#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Runs both implementations of each hot kernel on identical inputs, checks they
agree, and prints a small table with the speedup. Also verifies that setting
HDCLT_NUMBA=0 in a child process really selects the numpy backend.

Usage: python benchmarks/bench_backends.py [--repeats N] [--quick]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from hdclt._accel import HAVE_NUMBA, USING_NUMBA
from hdclt._kernels import (
    _count_in_boxes_numba,
    _empirical_max_stats_numba,
    count_in_boxes_numpy,
    empirical_max_stats_numpy,
)


def best_of(fn, args, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_count(rng, m, k, p, repeats):
    points = rng.standard_normal((m, p))
    lower = np.sort(rng.standard_normal((2, k, p)), axis=0)
    lo, hi = lower[0], lower[1]
    # a few half-infinite boxes exercise the endpoint branches
    lo[:: max(k // 8, 1)] = -np.inf
    ref = count_in_boxes_numpy(points, lo, hi)
    got = _count_in_boxes_numba(points, lo, hi)
    assert np.array_equal(ref, got), "backend counting mismatch"
    t_np = best_of(count_in_boxes_numpy, (points, lo, hi), repeats)
    t_nb = best_of(_count_in_boxes_numba, (points, lo, hi), repeats)
    return "count_in_boxes", "m=%d k=%d p=%d" % (m, k, p), t_np, t_nb


def bench_resample(rng, n, p, b_count, repeats):
    data = rng.standard_normal((n, p))
    col_mean = data.mean(axis=0)
    indices = rng.integers(0, n, size=(b_count, n))
    ref = empirical_max_stats_numpy(data, col_mean, indices)
    got = _empirical_max_stats_numba(data, col_mean, indices)
    # summation order differs between the backends, so allow float slack
    assert np.allclose(ref, got, rtol=1e-10, atol=1e-12), "backend stats mismatch"
    t_np = best_of(empirical_max_stats_numpy, (data, col_mean, indices), repeats)
    t_nb = best_of(_empirical_max_stats_numba, (data, col_mean, indices), repeats)
    return "empirical_max_stats", "n=%d p=%d B=%d" % (n, p, b_count), t_np, t_nb


def check_env_flag():
    code = "import hdclt._accel as a; print(int(a.USING_NUMBA))"
    env = dict(os.environ, HDCLT_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "0", "HDCLT_NUMBA=0 did not select the numpy backend"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats, best kept")
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args(argv)

    if not HAVE_NUMBA:
        print("numba is not importable; nothing to compare")
        return 1
    if not USING_NUMBA:
        print("HDCLT_NUMBA disabled the jit backend in this process; unset it to benchmark")
        return 1

    rng = np.random.default_rng(0)
    if args.quick:
        count_jobs = [(20_000, 32, 4)]
        resample_jobs = [(200, 20, 500)]
    else:
        count_jobs = [(200_000, 64, 8), (50_000, 256, 2)]
        resample_jobs = [(500, 50, 2_000), (2_000, 8, 4_000)]

    # first calls compile the jitted kernels; keep that out of the timings
    bench_count(rng, 1_000, 4, 2, 1)
    bench_resample(rng, 50, 3, 20, 1)

    rows = []
    for m, k, p in count_jobs:
        rows.append(bench_count(rng, m, k, p, args.repeats))
    for n, p, b_count in resample_jobs:
        rows.append(bench_resample(rng, n, p, b_count, args.repeats))

    check_env_flag()
    print("backend check: HDCLT_NUMBA=0 child process uses the numpy path")
    print()
    header = ("kernel", "workload", "numpy ms", "numba ms", "speedup")
    print("%-20s %-20s %10s %10s %9s" % header)
    for name, workload, t_np, t_nb in rows:
        print(
            "%-20s %-20s %10.2f %10.2f %8.1fx"
            % (name, workload, 1e3 * t_np, 1e3 * t_nb, t_np / t_nb)
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
