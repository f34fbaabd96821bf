"""Benchmark the compiled RK4 precession kernel against the pure-Python twin.

Runs the same static-field integration through both backends and reports
steps/second plus the speedup.  Usage:

    python benchmarks/bench_llg.py [--steps N] [--repeats R]
"""

import argparse
import math
import time

import numpy as np

from gyrokit._kernels import _llg_py

try:
    from gyrokit._kernels import _llg_cy
except ImportError:
    _llg_cy = None


def time_backend(mod, m0, h, gamma, alpha, dt, steps, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        traj, bad = mod.rk4_static(m0, h, gamma, alpha, dt, steps)
        best = min(best, time.perf_counter() - t0)
    assert bad == -1, "benchmark trajectory went unstable"
    return best, traj


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    gamma = 2 * math.pi * 2.8e6  # rad/s/Oe
    h0 = 1000.0                  # Oe
    period = 2 * math.pi / (gamma * h0)
    dt = period / 200.0
    m0 = 1800.0 * np.array([math.sin(0.5), 0.0, math.cos(0.5)])
    h = np.array([0.0, 0.0, h0])

    t_py, traj_py = time_backend(_llg_py, m0, h, gamma, 0.01, dt, args.steps, args.repeats)
    print(f"python backend : {args.steps / t_py:12.0f} steps/s  ({t_py * 1e3:8.2f} ms)")

    if _llg_cy is None:
        print("cython backend : not built (pip install -e . --no-build-isolation)")
        return

    t_cy, traj_cy = time_backend(_llg_cy, m0, h, gamma, 0.01, dt, args.steps, args.repeats)
    print(f"cython backend : {args.steps / t_cy:12.0f} steps/s  ({t_cy * 1e3:8.2f} ms)")
    print(f"speedup        : {t_py / t_cy:12.1f} x")
    diff = float(np.max(np.abs(traj_py - traj_cy)))
    print(f"max |delta m|  : {diff:12.3e} G (backend agreement)")


if __name__ == "__main__":
    main()
