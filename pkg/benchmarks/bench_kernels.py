"""Benchmark the numba kernel path against the pure-numpy fallback.

The kernel path is fixed at import time by GRIDTOAST_NUMBA, so the
driver re-runs itself in a subprocess per path and prints a comparison
table.  Run as: python benchmarks/bench_kernels.py [--size 512 --reps 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def bench(size, reps):
    from gridtoast import kernels

    rng = np.random.default_rng(0)
    mask = rng.random((size, size)) < 0.55
    n = size * size
    succ = np.roll(np.arange(n, dtype=np.int64), -1)

    out = {"path": "numba" if kernels.USE_NUMBA else "numpy"}

    kernels.label_components(mask)  # warm up (jit compilation)
    t0 = time.perf_counter()
    for _ in range(reps):
        labels, count = kernels.label_components(mask)
    out["label_components"] = (time.perf_counter() - t0) / reps
    out["components"] = int(count)

    kernels.follow_cycle(succ, 0)
    t0 = time.perf_counter()
    for _ in range(reps):
        length = kernels.follow_cycle(succ, 0)
    out["follow_cycle"] = (time.perf_counter() - t0) / reps
    assert length == n

    t0 = time.perf_counter()
    for _ in range(reps):
        kernels.dilate_linf(mask, 4)
    out["dilate_linf"] = (time.perf_counter() - t0) / reps
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.child:
        print(json.dumps(bench(args.size, args.reps)))
        return

    rows = []
    for flag in ("1", "0"):
        env = dict(os.environ, GRIDTOAST_NUMBA=flag)
        res = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--child",
             "--size", str(args.size), "--reps", str(args.reps)],
            env=env, capture_output=True, text=True, check=True)
        rows.append(json.loads(res.stdout.splitlines()[-1]))

    if rows[0]["components"] != rows[1]["components"]:
        raise SystemExit("paths disagree on component count")

    names = ["label_components", "follow_cycle", "dilate_linf"]
    print(f"{'kernel':<18} {'numba [s]':>12} {'numpy [s]':>12} "
          f"{'speedup':>9}")
    for name in names:
        a, b = rows[0][name], rows[1][name]
        print(f"{name:<18} {a:>12.5f} {b:>12.5f} {b / a:>8.1f}x")


if __name__ == "__main__":
    main()
