#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot paths (position fill and pairwise contact sweep) on the
desk-scale and full-scale profiles, verifies both backends produce identical
results, and prints a comparison table.

Usage:
    python benchmarks/bench_backends.py [--paper]
"""

import argparse
import time

import numpy as np

from hbds.backend import get_kernels
from hbds.config import desk_profile, paper_profile
from hbds.mobility import build_leg_schedule, n_ticks


def time_call(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_profile(name, cfg, block_ticks=4096):
    legs = build_leg_schedule(cfg)
    total = n_ticks(cfg)
    span = min(block_ticks, total)
    r2 = cfg.tx_range * cfg.tx_range

    results = {}
    outputs = {}
    for backend in ("numpy", "numba"):
        kernels = get_kernels(backend)
        out = np.empty((span, legs.n_nodes, 2), dtype=np.float64)
        # warm-up (first numba call compiles)
        kernels.fill_positions(legs.start, legs.x, legs.y, legs.ux, legs.uy,
                               legs.speed, legs.node_ptr, 0, span, out)
        fill_t = time_call(kernels.fill_positions, legs.start, legs.x, legs.y,
                           legs.ux, legs.uy, legs.speed, legs.node_ptr, 0, span, out)

        adj = np.zeros((legs.n_nodes, legs.n_nodes), dtype=np.bool_)
        kernels.contact_transitions(out[:64], adj.copy(), r2, 0)
        adj = np.zeros((legs.n_nodes, legs.n_nodes), dtype=np.bool_)
        sweep_t = time_call(kernels.contact_transitions, out, adj, r2, 0, repeats=1)

        adj_check = np.zeros((legs.n_nodes, legs.n_nodes), dtype=np.bool_)
        events = kernels.contact_transitions(out, adj_check, r2, 0)
        results[backend] = (fill_t, sweep_t)
        outputs[backend] = (out.copy(), tuple(np.asarray(e) for e in events))

    pos_equal = np.array_equal(outputs["numpy"][0], outputs["numba"][0])
    ev_equal = all(np.array_equal(a, b) for a, b
                   in zip(outputs["numpy"][1], outputs["numba"][1]))

    print(f"\n{name}: {legs.n_nodes} nodes, {span} ticks per block")
    print(f"  {'kernel':<22}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for label, idx in (("fill_positions", 0), ("contact_transitions", 1)):
        np_t = results["numpy"][idx]
        nb_t = results["numba"][idx]
        print(f"  {label:<22}{np_t * 1e3:>10.2f}ms{nb_t * 1e3:>10.2f}ms"
              f"{np_t / nb_t:>9.1f}x")
    print(f"  outputs identical: positions={pos_equal} events={ev_equal}")
    if not (pos_equal and ev_equal):
        raise SystemExit("backend outputs diverged")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paper", action="store_true",
                        help="also benchmark the full-scale profile")
    args = parser.parse_args()

    bench_profile("desk profile", desk_profile(rng_seed=1))
    if args.paper:
        bench_profile("paper profile", paper_profile(rng_seed=1))


if __name__ == "__main__":
    main()
