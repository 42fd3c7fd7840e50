#!/usr/bin/env python3
"""Benchmark the PV-Hilbert kernel: numba JIT vs pure-numpy fallback.

Runs the same weighted principal-value sum through both backends over a
range of grid sizes and reports wall time and throughput.  The two paths
must agree to rounding; the max deviation is printed as a sanity check.

Usage:
    python benchmarks/bench_hilbert.py [--sizes 2001 8001 ...] [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ptkk._kernels import _build_numba_kernel, _pv_weighted_sum_numpy


def _inputs(n: int, rng: np.random.Generator):
    f = rng.normal(size=n)
    f[0] *= 0.5
    f[-1] *= 0.5
    d = np.arange(-(n - 1), n, dtype=np.float64)
    d[n - 1] = 1.0
    inv = 1.0 / d
    inv[n - 1] = 0.0
    return f, inv


def bench(kernel, f, inv, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        kernel(f, inv)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[2001, 8001, 20001, 40001])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    try:
        numba_kernel = _build_numba_kernel()
    except ImportError:
        numba_kernel = None
        print("numba unavailable: timing the numpy fallback only")

    rng = np.random.default_rng(7)
    print(f"{'n':>8} {'numpy [s]':>12} {'numba [s]':>12} {'speedup':>9} {'max |diff|':>12}")
    for n in args.sizes:
        f, inv = _inputs(n, rng)
        t_np = bench(_pv_weighted_sum_numpy, f, inv, args.repeats)
        if numba_kernel is None:
            print(f"{n:>8} {t_np:>12.4f} {'-':>12} {'-':>9} {'-':>12}")
            continue
        numba_kernel(f, inv)  # compile outside the timed region
        t_nb = bench(numba_kernel, f, inv, args.repeats)
        diff = float(np.max(np.abs(numba_kernel(f, inv) - _pv_weighted_sum_numpy(f, inv))))
        print(f"{n:>8} {t_np:>12.4f} {t_nb:>12.4f} {t_np / t_nb:>9.2f} {diff:>12.3e}")


if __name__ == "__main__":
    main()
