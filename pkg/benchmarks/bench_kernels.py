#!/usr/bin/env python3
"""Time the numba and numpy kernel lanes on the same sampling workload.

Runs uniform k-hop sampling over a synthetic random graph under both
schedulers, once per lane, and prints per-run seconds plus the lane
speedup. Output digests are cross-checked so a lane that drifts from
bit-exact agreement fails loudly instead of reporting a bogus win.
"""
import argparse
import time

import numpy as np

from khop import kernels
from khop.algorithms import khop_spec
from khop.engine import Strategy, run_sampling
from khop.graph import from_edges


def build_graph(n, avg_degree, seed):
    rng = np.random.default_rng(seed)
    m = max(1, n * avg_degree // 2)
    pairs = rng.integers(0, n, size=(m, 2))
    arcs = np.concatenate([pairs, pairs[:, ::-1]])
    return from_edges(n, arcs)


def best_of(g, spec, roots, seed, strategy, repeat):
    best, ss = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        ss, _ = run_sampling(g, spec, roots, seed, strategy)
        best = min(best, time.perf_counter() - t0)
    return best, ss


def main():
    ap = argparse.ArgumentParser(
        description="compare kernel lanes on k-hop sampling")
    ap.add_argument("--vertices", type=int, default=20000)
    ap.add_argument("--avg-degree", type=int, default=12)
    ap.add_argument("--roots", type=int, default=1024)
    ap.add_argument("--fanouts", default="10,10")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    fanouts = [int(p) for p in args.fanouts.split(",") if p]
    g = build_graph(args.vertices, args.avg_degree, args.seed)
    roots = np.random.default_rng(args.seed).integers(
        0, g.num_vertices, size=args.roots)
    spec = khop_spec(fanouts)

    lanes = ["numpy"]
    if kernels.numba_available():
        lanes.insert(0, "numba")
    else:
        print("numba lane unavailable, timing numpy only")

    print("graph: %d vertices, %d arcs; %d roots, fanouts %s, best of %d"
          % (g.num_vertices, g.num_arcs, len(roots), fanouts, args.repeat))
    print("%-8s %-10s %12s %14s" % ("lane", "strategy", "seconds", "slots/s"))
    results = {}
    reference = None
    for lane in lanes:
        with kernels.use_lane(lane):
            kernels.warmup()
            for strategy in (Strategy.SAMPLE_PARALLEL,
                             Strategy.TRANSIT_PARALLEL):
                secs, ss = best_of(g, spec, roots, args.seed, strategy,
                                   args.repeat)
                if reference is None:
                    reference = ss.digest()
                elif ss.digest() != reference:
                    raise SystemExit("lane outputs diverge, aborting")
                slots = sum(o.size for o in ss.outputs)
                results[(lane, strategy.value)] = secs
                print("%-8s %-10s %12.6f %14.0f"
                      % (lane, strategy.value, secs, slots / secs))
    if len(lanes) == 2:
        for strat in ("sample", "transit"):
            ratio = results[("numpy", strat)] / results[("numba", strat)]
            print("speedup %-8s numba over numpy: %.2fx" % (strat, ratio))


if __name__ == "__main__":
    main()
