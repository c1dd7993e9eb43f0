#!/usr/bin/env python3
"""Timing comparison of the compiled and pure-numpy conv/pool kernels.

Shapes mirror the training hot path: a batch of (slot, vehicle) slices of the
32-antenna input, i.e. x [B, 4, 8, 2] with 4 conv filters.

Usage: python3 benchmarks/bench_kernels.py [--batch 3840] [--repeats 20]
"""
import argparse
import importlib
import time

import numpy as np


def bench(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(mod, x, cw, cb, repeats):
    z = mod.conv2d3x3_same_fwd(x, cw, cb)
    g = np.random.default_rng(0).normal(size=z.shape)
    r = z * (z > 0)
    p, idx = mod.maxpool2x2_fwd(r)
    gp = np.random.default_rng(1).normal(size=p.shape)
    return {
        "conv_fwd": bench(lambda: mod.conv2d3x3_same_fwd(x, cw, cb), repeats),
        "conv_bwd": bench(lambda: mod.conv2d3x3_same_bwd(x, cw, g), repeats),
        "pool_fwd": bench(lambda: mod.maxpool2x2_fwd(r), repeats),
        "pool_bwd": bench(lambda: mod.maxpool2x2_bwd(idx, gp, r.shape),
                          repeats),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--batch", type=int, default=3840,
                    help="number of conv slices (256 examples x 5 slots x 3 "
                         "vehicles)")
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()

    rng = np.random.default_rng(42)
    x = rng.normal(size=(args.batch, 4, 8, 2))
    cw = rng.normal(size=(4, 3, 3, 2))
    cb = rng.normal(size=4)

    mods = {}
    mods["python"] = importlib.import_module("isacbf.nn.kernels._pykernels")
    try:
        mods["cython"] = importlib.import_module(
            "isacbf.nn.kernels._ckernels")
    except ImportError:
        print("compiled backend not built; benchmarking numpy fallback only")

    results = {name: run(mod, x, cw, cb, args.repeats)
               for name, mod in mods.items()}
    ops = ["conv_fwd", "conv_bwd", "pool_fwd", "pool_bwd"]
    header = f"{'op':<10}" + "".join(f"{n + ' (ms)':>14}" for n in results)
    if len(results) == 2:
        header += f"{'speedup':>10}"
    print(f"batch={args.batch}, best of {args.repeats} runs")
    print(header)
    for op in ops:
        row = f"{op:<10}"
        for n in results:
            row += f"{1e3 * results[n][op]:>14.3f}"
        if len(results) == 2:
            row += f"{results['python'][op] / results['cython'][op]:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()
