#!/usr/bin/env python3
"""Throughput comparison of the three simulation engines.

Runs one shipped scenario under the compiled kernel, the pure-Python
mirror, and the object path, and reports integration steps per second.
The compiled and pure kernels are also compared record for record: they
are required to agree bitwise, so the benchmark doubles as a parity
smoke test on whatever machine it runs on.

Usage:
    python3 benchmarks/bench_engines.py [--duration S] [--repeats N]
                                        [--scenario PATH]
"""

import argparse
import dataclasses
import pathlib
import sys
import time

import numpy as np

import safeblend as sb
from safeblend._engine import COMPILED_AVAILABLE
from safeblend.config import load_scenario

DEFAULT = (pathlib.Path(__file__).resolve().parent.parent
           / "scenarios" / "tracking_violation.json")

COLUMNS = ("t", "q", "v", "x", "c", "h", "phi", "u", "u_nom", "mu",
           "S", "hdot", "in_C", "in_C_eps", "infeasible")


def best_time(scn, engine, repeats):
    times = []
    traj = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        traj = sb.simulate(scn, engine=engine)
        times.append(time.perf_counter() - t0)
    return min(times), traj


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default=str(DEFAULT))
    ap.add_argument("--duration", type=float, default=10.0,
                    help="simulated seconds for the kernel engines")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)

    base = load_scenario(args.scenario).scenario
    scn = dataclasses.replace(base, duration=args.duration)
    # the object path re-derives everything through numpy per step; give
    # it a tenth of the horizon so the benchmark stays interactive
    scn_obj = dataclasses.replace(base, duration=max(args.duration / 10,
                                                     10 * base.dt))

    rows = []
    engines = (["compiled"] if COMPILED_AVAILABLE else []) + ["pure"]
    trajs = {}
    for engine in engines:
        t, traj = best_time(scn, engine, args.repeats)
        trajs[engine] = traj
        rows.append((engine, scn.n_steps, t))
    t, _ = best_time(scn_obj, "object", args.repeats)
    rows.append(("object", scn_obj.n_steps, t))

    print(f"scenario: {scn.name}  (mode {scn.mode}, dt {scn.dt:g} s, "
          f"model {type(scn.model).__name__})")
    print(f"{'engine':<10}{'steps':>10}{'time [s]':>12}{'steps/s':>14}"
          f"{'speedup':>10}")
    base_rate = None
    for engine, steps, t in rows:
        rate = steps / t
        if engine == "pure":
            base_rate = rate
    for engine, steps, t in rows:
        rate = steps / t
        rel = f"{rate / base_rate:.1f}x" if base_rate else "-"
        print(f"{engine:<10}{steps:>10}{t:>12.4f}{rate:>14.0f}{rel:>10}")

    if "compiled" in trajs:
        a, b = trajs["compiled"], trajs["pure"]
        same = all(np.array_equal(getattr(a, c), getattr(b, c))
                   for c in COLUMNS)
        print(f"compiled vs pure: {'bitwise identical' if same else 'MISMATCH'}"
              f" over {len(a)} records x {len(COLUMNS)} columns")
        if not same:
            return 1
    else:
        print("compiled engine not available in this install")
    return 0


if __name__ == "__main__":
    sys.exit(main())
