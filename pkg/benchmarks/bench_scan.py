#!/usr/bin/env python3
"""Benchmark the windowed-sum scan kernels: numba jit vs numpy cumsum.

Usage: python benchmarks/bench_scan.py [--repeats 5]

The jit path needs one warmup call for compilation; the table reports the
best of the timed repeats for each implementation and the speedup.
"""

import argparse
import time

import numpy as np

from blowscope._kernels import HAVE_NUMBA, window_sums


def best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    cases = [
        ("1d", rng.random(4096), 128),
        ("1d", rng.random(65536), 4096),
        ("2d", rng.random((512, 512)), 64),
        ("2d", rng.random((1024, 1024)), 128),
    ]

    impls = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    if not HAVE_NUMBA:
        print("numba unavailable or disabled; timing the numpy path only")
    else:
        window_sums(cases[0][1], cases[0][2], impl="numba")  # compile warmup
        window_sums(cases[2][1], cases[2][2], impl="numba")

    print(f"{'case':>18} {'window':>7} " + " ".join(f"{i:>12}" for i in impls) + "  speedup")
    for label, w, m in cases:
        times = {}
        for impl in impls:
            times[impl] = best_time(lambda: window_sums(w, m, impl=impl), args.repeats)
        shape = "x".join(str(s) for s in w.shape)
        row = f"{label + ' ' + shape:>18} {m:>7} "
        row += " ".join(f"{times[i] * 1e3:>10.3f}ms" for i in impls)
        if "numba" in times:
            row += f"  {times['numpy'] / times['numba']:>6.2f}x"
        print(row)

    if HAVE_NUMBA:
        a = window_sums(cases[1][1], cases[1][2], impl="numba")
        b = window_sums(cases[1][1], cases[1][2], impl="numpy")
        print(f"max |numba - numpy| on the 1d case: {np.max(np.abs(a - b)):.3e}")


if __name__ == "__main__":
    main()
