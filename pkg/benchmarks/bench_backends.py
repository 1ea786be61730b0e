"""Benchmark the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_backends.py [--quick]

Covers the two hot paths: the float64 finite-size moment DP and Monte Carlo
sampling (path generation + batch slice statistic).
"""

import argparse
import time

import numpy as np

from dyckmoments import backend


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_dp(kern, n_max, s_max):
    w = np.arange(float(n_max)) + 0.5

    def run():
        M, E = kern.dp_moments(w, n_max, s_max)
        kern.dp_moments(w, n_max, s_max, True, E)

    return timeit(run)


def bench_sampling(kern, size, count):
    w = np.arange(float(size)) + 0.5

    def run():
        steps = kern.sample_paths("excursion", size, count, 12345)
        kern.batch_statistic(np.ascontiguousarray(steps), w)

    return timeit(run)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller sizes")
    args = parser.parse_args()

    dp_sizes = [(512, 4), (2048, 6)] if args.quick else [(1024, 4), (4096, 6)]
    mc_sizes = [(100, 50_000)] if args.quick else [(100, 200_000), (2000, 20_000)]

    names = backend.available_backends()
    print(f"available backends: {', '.join(names)}")
    rows = []
    for n_max, s_max in dp_sizes:
        timings = {name: bench_dp(backend.get_backend(name), n_max, s_max)
                   for name in names}
        rows.append((f"moment DP N={n_max} s_max={s_max} (both ensembles)", timings))
    for size, count in mc_sizes:
        timings = {name: bench_sampling(backend.get_backend(name), size, count)
                   for name in names}
        rows.append((f"sample+statistic N={size} n={count}", timings))

    width = max(len(r[0]) for r in rows) + 2
    header = "benchmark".ljust(width) + "".join(n.rjust(12) for n in names)
    if len(names) == 2:
        header += "speedup".rjust(10)
    print(header)
    print("-" * len(header))
    for label, timings in rows:
        line = label.ljust(width) + "".join(f"{timings[n]:.3f}s".rjust(12) for n in names)
        if len(names) == 2:
            line += f"{timings['fallback'] / timings['compiled']:.1f}x".rjust(10)
        print(line)


if __name__ == "__main__":
    main()
