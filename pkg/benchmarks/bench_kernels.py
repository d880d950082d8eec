#!/usr/bin/env python
"""Micro-benchmark of the numeric kernels: vectorized numpy vs compiled loops.

Both implementation sets ship in sinemodel._kernels; the package picks one at
import time (SINEMODEL_NUMBA=0 forces numpy).  This script times them side by
side on representative workloads so the choice stays an informed one.

    python benchmarks/bench_kernels.py [--repeats 20] [--scale 4096]
"""
import argparse
import time

import numpy as np

from sinemodel import _kernels


def best_of(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(scale: int, fs: float = 16000.0) -> dict:
    """One argument tuple per kernel, sized like real analysis calls."""
    rng = np.random.default_rng(0)
    n = 16 * scale                 # synthesis span: ~1 s of samples at scale 1k
    frame = rng.normal(0.0, 1.0, scale)
    return {
        "accumulate_cosine": (np.zeros(n), 0, rng.uniform(0.1, 1.0, n),
                              rng.uniform(-np.pi, np.pi, n)),
        "trapezoid_phase": (rng.uniform(50.0, 4000.0, n), fs, 0.0),
        "autocorr_norm": (frame, 32, scale // 2),
        "hankel_build": (rng.normal(0.0, 1.0, scale), scale // 2,
                         scale - scale // 2 + 1),
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20,
                        help="timed repetitions per kernel (best-of)")
    parser.add_argument("--scale", type=int, default=4096,
                        help="frame length driving all workload sizes")
    args = parser.parse_args()

    loads = workloads(args.scale)
    impl_sets = {"numpy": _kernels.NUMPY_IMPLS}
    if _kernels.HAVE_NUMBA:
        impl_sets["numba"] = _kernels.compile_numba_impls()
        for name, fn in impl_sets["numba"].items():
            fn(*loads[name])  # compile outside the timed region
    else:
        print("numba not installed: timing the numpy set only")

    print(f"scale {args.scale}, best of {args.repeats} runs, times in ms")
    header = f"{'kernel':<20}" + "".join(f"{k:>12}" for k in impl_sets)
    if len(impl_sets) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, call_args in loads.items():
        times = {k: best_of(impls[name], call_args, args.repeats)
                 for k, impls in impl_sets.items()}
        row = f"{name:<20}" + "".join(f"{1e3 * t:>12.4f}" for t in times.values())
        if len(times) == 2:
            row += f"{times['numpy'] / times['numba']:>9.2f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
