#!/usr/bin/env python3
"""Benchmark the compiled sampling kernels against the numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--repeats 3]

Each case runs on both backends (best wall time of the repeats) and the
outputs are compared, so the table doubles as an agreement check: the
backends share the integer stream and differ only by transcendental
rounding (at most 1 ulp per call).
"""

import argparse
import time

import numpy as np

from switchdiff._kernels import _fallback

try:
    from switchdiff._kernels import _core
except ImportError:
    _core = None

CASES = [
    ("uniforms: 4e6 draws, one stream",
     lambda b: b.uniforms(1, 0, 0, 4_000_000)),
    ("cycle_time_totals: 1e6 skeletons, n=5",
     lambda b: b.cycle_time_totals(1, 0, 1_000_000, 5, 1.0, 1.0, True)),
    ("cycle_terminal_state: 2e5 paths, n=20",
     lambda b: b.cycle_terminal_state(1, 0, 200_000, 20, 1.0, 1.0, False,
                                      1.0, -0.2, 0.0)),
    ("horizon_terminal_exact: 2e4 paths, t=100",
     lambda b: b.horizon_terminal_exact(1, 0, 20_000, 100.0, 1.0, 2.0, False,
                                        1.0, -1.0, 0.0)),
    ("horizon_terminal_em: 2e3 paths, t=10, dt=1e-3",
     lambda b: b.horizon_terminal_em(1, 0, 2_000, 10.0, 1e-3, 1.0, 2.0,
                                     False, 1.0, -1.0, 0.0)),
]


def _best_time(fn, backend, repeats):
    best, result = float("inf"), None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(backend)
        best = min(best, time.perf_counter() - t0)
    return best, result


def _max_rel_diff(a, b):
    if isinstance(a, tuple):
        return max(_max_rel_diff(x, y) for x, y in zip(a, b))
    scale = np.maximum(np.abs(a), 1.0)
    return float(np.max(np.abs(a - b) / scale))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _core is None:
        print("compiled backend not available; timing the fallback only\n")

    name_w = max(len(name) for name, _ in CASES)
    header = (f"{'case':<{name_w}}  {'python':>9}  {'cython':>9}  "
              f"{'speedup':>8}  {'max rel diff':>12}")
    print(header)
    print("-" * len(header))
    for name, fn in CASES:
        t_py, r_py = _best_time(fn, _fallback, args.repeats)
        if _core is None:
            print(f"{name:<{name_w}}  {t_py:>8.3f}s  {'-':>9}  {'-':>8}  "
                  f"{'-':>12}")
            continue
        t_cy, r_cy = _best_time(fn, _core, args.repeats)
        diff = _max_rel_diff(r_py, r_cy)
        print(f"{name:<{name_w}}  {t_py:>8.3f}s  {t_cy:>8.3f}s  "
              f"{t_py / t_cy:>7.1f}x  {diff:>12.2e}")


if __name__ == "__main__":
    main()
