"""Synthetic vehicular mobility: random-waypoint walks sampled on a 1-second tick.

Terminal nodes walk between uniform waypoints at speeds drawn from
[0.5*avg, 1.5*avg]; relay nodes are stationary infrastructure points. A node's
whole trajectory is a compact list of legs, so position blocks can be filled
by either kernel backend without re-running any RNG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import get_kernels
from .config import KMH_TO_MS, ScenarioConfig
from .rng import RandomStream, substream_seed


@dataclass
class LegSchedule:
    """CSR-packed waypoint legs for every node in the scenario."""

    start: np.ndarray   # f8[L] leg start times
    x: np.ndarray       # f8[L] leg origin
    y: np.ndarray
    ux: np.ndarray      # f8[L] unit direction
    uy: np.ndarray
    speed: np.ndarray   # f8[L] metres/second
    node_ptr: np.ndarray  # i8[N+1]
    n_nodes: int


def build_leg_schedule(config: ScenarioConfig) -> LegSchedule:
    if config.area_width <= 0 or config.area_height <= 0:
        raise ValueError("mobility needs a rectangle with positive area")

    width, height = config.area_width, config.area_height
    duration = config.sim_duration
    v_avg = config.avg_speed * KMH_TO_MS
    lo, hi = 0.5 * v_avg, 1.5 * v_avg

    starts, xs, ys, uxs, uys, speeds = [], [], [], [], [], []
    node_ptr = [0]

    for node in range(config.n_nodes):
        stream = RandomStream(substream_seed(config.rng_seed, "mobility", node))
        x = stream.uniform_in(0.0, width)
        y = stream.uniform_in(0.0, height)
        t = 0.0
        stationary = node in config.relay_ids()

        if stationary:
            starts.append(t); xs.append(x); ys.append(y)
            uxs.append(0.0); uys.append(0.0); speeds.append(0.0)
        else:
            emitted = False
            while t < duration:
                tx = stream.uniform_in(0.0, width)
                ty = stream.uniform_in(0.0, height)
                spd = stream.uniform_in(lo, hi)
                if spd <= 0.0:
                    starts.append(t); xs.append(x); ys.append(y)
                    uxs.append(0.0); uys.append(0.0); speeds.append(0.0)
                    emitted = True
                    break
                dx, dy = tx - x, ty - y
                dist = math.hypot(dx, dy)
                if dist == 0.0:
                    continue
                starts.append(t); xs.append(x); ys.append(y)
                uxs.append(dx / dist); uys.append(dy / dist); speeds.append(spd)
                emitted = True
                t += dist / spd
                x, y = tx, ty
            if not emitted:
                starts.append(0.0); xs.append(x); ys.append(y)
                uxs.append(0.0); uys.append(0.0); speeds.append(0.0)
        node_ptr.append(len(starts))

    return LegSchedule(
        start=np.asarray(starts, dtype=np.float64),
        x=np.asarray(xs, dtype=np.float64),
        y=np.asarray(ys, dtype=np.float64),
        ux=np.asarray(uxs, dtype=np.float64),
        uy=np.asarray(uys, dtype=np.float64),
        speed=np.asarray(speeds, dtype=np.float64),
        node_ptr=np.asarray(node_ptr, dtype=np.int64),
        n_nodes=config.n_nodes,
    )


def n_ticks(config: ScenarioConfig) -> int:
    return int(config.sim_duration) + 1


def generate_mobility(config: ScenarioConfig, backend: str | None = None,
                      block_ticks: int = 2048):
    """Yield (t0, positions) blocks covering ticks 0..sim_duration.

    positions has shape (ticks_in_block, n_nodes, 2) and every node stays
    inside the scenario rectangle. Fully reproducible from config.rng_seed.
    """
    kernels = get_kernels(backend)
    legs = build_leg_schedule(config)
    total = n_ticks(config)
    t0 = 0
    while t0 < total:
        span = min(block_ticks, total - t0)
        out = np.empty((span, legs.n_nodes, 2), dtype=np.float64)
        kernels.fill_positions(legs.start, legs.x, legs.y, legs.ux, legs.uy,
                               legs.speed, legs.node_ptr, t0, span, out)
        yield t0, out
        t0 += span


def positions_full(config: ScenarioConfig, backend: str | None = None) -> np.ndarray:
    """Materialize the whole position array; intended for tests and small runs."""
    blocks = [block for _, block in generate_mobility(config, backend=backend)]
    return np.concatenate(blocks, axis=0)
