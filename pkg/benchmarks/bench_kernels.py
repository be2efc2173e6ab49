#!/usr/bin/env python3
"""Throughput comparison of the compiled and pure-numpy kernel backends.

Runs every hot kernel on frame-sized inputs with both implementations and
prints a per-kernel table (best-of-R wall time, speedup). The two backends
are bit-identical by contract -- each pair of outputs is compared before
timing so a drifting build fails loudly here too.

Usage:
    python3 benchmarks/bench_kernels.py [--size 128] [--iters 20] [--csv out.csv]
"""

import argparse
import csv
import sys
import time

import numpy as np

from signet.kernels import _pure
from signet.rng import Xoshiro256StarStar

try:
    from signet.kernels import _compiled
except ImportError:
    _compiled = None


def _best_of(fn, iters):
    best = float("inf")
    for _ in range(iters):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(size):
    """(name, callable-factory) pairs; factory(impl) -> zero-arg workload."""
    r = Xoshiro256StarStar(99)
    rgb = (r.fill_unit(size * size * 3).reshape(size, size, 3) * 256).clip(0, 255).astype(np.uint8)
    prev = (r.fill_unit(size * size).reshape(size, size) * 256).clip(0, 255).astype(np.uint8)
    cur = (r.fill_unit(size * size).reshape(size, size) * 256).clip(0, 255).astype(np.uint8)
    mask = (r.fill_unit(size * size).reshape(size, size) < 0.4).astype(np.uint8)
    state_template = np.array([1, 2, 3, 4], dtype=np.uint64)

    def fill_factory(impl):
        def run():
            state = state_template.copy()
            return impl.xoshiro_fill_unit(state, size * size)
        return run

    return [
        ("to_luma", lambda impl: (lambda: impl.to_luma_u8(rgb))),
        ("abs_diff_mask", lambda impl: (lambda: impl.abs_diff_mask_u8(prev, cur, 50))),
        ("median_filter_k5", lambda impl: (lambda: impl.median_filter_u8(mask, 5))),
        ("apply_mask", lambda impl: (lambda: impl.apply_mask_u8(rgb, mask))),
        ("resize_bilinear", lambda impl: (lambda: impl.resize_bilinear_u8(rgb, 224, 224))),
        ("prng_fill_unit", fill_factory),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=128, help="square frame size (default 128)")
    ap.add_argument("--iters", type=int, default=20, help="repeats per kernel, best kept")
    ap.add_argument("--csv", default=None, help="also write results as CSV")
    args = ap.parse_args(argv)

    if _compiled is None:
        print("compiled backend not built; timing the pure backend only", file=sys.stderr)

    rows = []
    for name, factory in _cases(args.size):
        pure_fn = factory(_pure)
        if _compiled is not None:
            comp_fn = factory(_compiled)
            a, b = pure_fn(), comp_fn()
            if not np.array_equal(a, b):
                print(f"FATAL: backends disagree on {name}", file=sys.stderr)
                return 1
            t_pure = _best_of(pure_fn, args.iters)
            t_comp = _best_of(comp_fn, args.iters)
            rows.append((name, t_pure, t_comp, t_pure / t_comp))
        else:
            rows.append((name, _best_of(pure_fn, args.iters), None, None))

    print(f"\nkernels at {args.size}x{args.size}, best of {args.iters}\n")
    print(f"{'kernel':<18} {'pure (ms)':>10} {'compiled (ms)':>14} {'speedup':>8}")
    for name, tp, tc, speed in rows:
        if tc is None:
            print(f"{name:<18} {tp * 1e3:>10.3f} {'-':>14} {'-':>8}")
        else:
            print(f"{name:<18} {tp * 1e3:>10.3f} {tc * 1e3:>14.3f} {speed:>7.1f}x")

    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kernel", "pure_seconds", "compiled_seconds", "speedup"])
            for name, tp, tc, speed in rows:
                w.writerow([name, repr(tp),
                            "" if tc is None else repr(tc),
                            "" if speed is None else f"{speed:.2f}"])
        print(f"\nwrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
