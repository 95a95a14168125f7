"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per (kernel, dimension) with the best wall time of each
backend and the speedup. Outputs of the two backends are checked to agree
before timing.
"""
import argparse
import time

import numpy as np

from lindpert import _backend
from lindpert.scenarios import random_instance


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--dims", default="4,8,12,16")
    ap.add_argument("--scan-dims", default="8,10,12,14")
    args = ap.parse_args()

    py = _backend.python_kernels
    fast = _backend.kernels
    if fast is py:
        print("compiled extension not available; only the Python backend is installed")
    print(f"{'kernel':<18}{'d':>4}{'python [s]':>14}{'compiled [s]':>14}{'speedup':>10}")

    for d in [int(x) for x in args.dims.split(",")]:
        sc = random_instance(d, 3, seed=d)
        h, j = sc.l0spec.hamiltonian, sc.l0spec.jump_array()
        assert np.allclose(py.lindblad_superop(h, j), fast.lindblad_superop(h, j), atol=1e-12)
        tp = best_time(lambda: py.lindblad_superop(h, j), args.repeat)
        tf = best_time(lambda: fast.lindblad_superop(h, j), args.repeat)
        print(f"{'lindblad_superop':<18}{d:>4}{tp:>14.5f}{tf:>14.5f}{tp / tf:>10.1f}")

    for d in [int(x) for x in args.scan_dims.split(",")]:
        # block-diagonal jumps with scalar blocks, so the scan has real hits
        rng = np.random.default_rng(d)
        jumps = np.zeros((2, d, d), dtype=np.complex128)
        half = d // 2
        for a in range(2):
            jumps[a, :half, :half] = rng.normal() * np.eye(half)
            jumps[a, half:, half:] = rng.normal(size=(d - half, d - half))
        assert np.array_equal(py.scan_projections(jumps, 1e-10), fast.scan_projections(jumps, 1e-10))
        tp = best_time(lambda: py.scan_projections(jumps, 1e-10), max(1, args.repeat // 2))
        tf = best_time(lambda: fast.scan_projections(jumps, 1e-10), args.repeat)
        print(f"{'scan_projections':<18}{d:>4}{tp:>14.5f}{tf:>14.5f}{tp / tf:>10.1f}")


if __name__ == "__main__":
    main()
