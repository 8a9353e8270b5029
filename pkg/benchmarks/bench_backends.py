#!/usr/bin/env python3
"""Benchmark the compiled walk kernel against the pure-Python fallback.

Runs identical searches on both backends, checks the reports agree, and
prints the timings.  Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import gx1cycles as gx
from gx1cycles._backend import available_backends


def workloads(quick):
    scale = 5 if quick else 1
    return [
        ("four-branch map, search [-6000, 6000]",
         lambda be: gx.search_range(gx.matthews_4branch(), -6000 // scale,
                                    6000 // scale, max_steps=10**5, backend=be)),
        ("collatz, search [1, 5000] (mostly divergent)",
         lambda be: gx.search_range(gx.collatz(), 1, 5000 // scale,
                                    max_steps=10**4, backend=be)),
        ("3x+1, search [-20000, 20000]",
         lambda be: gx.search_range(gx.three_x_plus_one(), -20000 // scale,
                                    20000 // scale, max_steps=10**5, backend=be)),
    ]


def run(fn, backend, repeats):
    best = None
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(backend)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller ranges")
    parser.add_argument("--repeats", type=int, default=1)
    args = parser.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled kernel not built; benchmarking the pure backend only")

    width = max(len(name) for name, _ in workloads(args.quick))
    header = f"{'workload':<{width}}" + "".join(f"{be:>12}" for be in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, fn in workloads(args.quick):
        times = {}
        reports = {}
        for be in backends:
            times[be], reports[be] = run(fn, be, args.repeats)
        line = f"{name:<{width}}" + "".join(f"{times[be]:>11.3f}s" for be in backends)
        if len(backends) == 2:
            assert reports["compiled"] == reports["pure"], "backends disagree!"
            line += f"{times['pure'] / times['compiled']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
