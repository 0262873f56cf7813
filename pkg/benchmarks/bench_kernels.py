#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-Python fallback.

The kernels are the per-sample hot loops the simulator runs over every
user's heart-rate trace (EMA smoothing, arousal normalization, banding,
debounced change scan). Run after `pip install -e . --no-build-isolation`:

    python benchmarks/bench_kernels.py [--n 2000000] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from animo._kernels import available_backends


def time_call(fn, *args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2_000_000, help="samples per kernel call")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = available_backends()
    rng = np.random.Generator(np.random.PCG64(1))
    bpm = rng.uniform(40.0, 180.0, args.n)
    ts = np.arange(args.n, dtype=np.float64) * 10.0

    rows: dict[str, dict[str, float]] = {}
    for name, mod in backends.items():
        sm = mod.ema_filter(bpm, 0.3)
        vals = mod.arousal_values(sm, 60.0, 100.0)
        bands = mod.band_codes(vals, 1 / 3, 2 / 3)
        rows[name] = {
            "ema_filter": time_call(mod.ema_filter, bpm, 0.3, repeat=args.repeat),
            "arousal_values": time_call(mod.arousal_values, sm, 60.0, 100.0, repeat=args.repeat),
            "band_codes": time_call(mod.band_codes, vals, 1 / 3, 2 / 3, repeat=args.repeat),
            "notify_points": time_call(mod.notify_points, bands, ts, 600.0, repeat=args.repeat),
        }

    kernels = list(next(iter(rows.values())))
    print(f"n = {args.n:,} samples, best of {args.repeat}\n")
    header = f"{'kernel':<16}" + "".join(f"{name:>14}" for name in rows)
    if len(rows) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for kernel in kernels:
        line = f"{kernel:<16}"
        for name in rows:
            line += f"{rows[name][kernel] * 1e3:>12.1f}ms"
        if len(rows) == 2:
            py, c = rows["python"][kernel], rows["c"][kernel]
            line += f"{py / c:>9.1f}x"
        print(line)

    if len(rows) < 2:
        print("\ncompiled core not importable; only the fallback was measured")


if __name__ == "__main__":
    main()
