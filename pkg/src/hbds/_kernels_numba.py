"""numba kernels for the two hot loops: position fill and contact sweep.

The arithmetic here must stay expression-for-expression identical to
_kernels_numpy so the two backends produce bit-equal traces.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def fill_positions(leg_start, leg_x, leg_y, leg_ux, leg_uy, leg_speed,
                   node_ptr, t0, n_ticks, out):
    """Fill out[tick, node, 2] with positions for ticks t0 .. t0+n_ticks-1.

    Legs are stored CSR-style: node n owns rows node_ptr[n]:node_ptr[n+1],
    sorted by start time, and the position on a leg is
    start_point + direction * speed * (t - leg_start).
    """
    n_nodes = node_ptr.shape[0] - 1
    for n in range(n_nodes):
        lo = node_ptr[n]
        hi = node_ptr[n + 1]
        k = lo
        for s in range(n_ticks):
            t = float(t0 + s)
            while k + 1 < hi and leg_start[k + 1] <= t:
                k += 1
            dt = t - leg_start[k]
            out[s, n, 0] = leg_x[k] + leg_ux[k] * leg_speed[k] * dt
            out[s, n, 1] = leg_y[k] + leg_uy[k] * leg_speed[k] * dt


@njit(cache=True)
def contact_transitions(pos, adj, r2, t0):
    """Detect range crossings in a position block.

    pos: (n_ticks, n_nodes, 2); adj: (n_nodes, n_nodes) bool, upper triangle
    holds the in-range state carried across blocks. Returns parallel arrays
    (tick, i, j, up) ordered by (tick, i, j).
    """
    n_ticks = pos.shape[0]
    n_nodes = pos.shape[1]

    count = 0
    snapshot = adj.copy()
    for s in range(n_ticks):
        for i in range(n_nodes):
            for j in range(i + 1, n_nodes):
                dx = pos[s, i, 0] - pos[s, j, 0]
                dy = pos[s, i, 1] - pos[s, j, 1]
                inr = dx * dx + dy * dy <= r2
                if inr != snapshot[i, j]:
                    count += 1
                    snapshot[i, j] = inr

    ev_t = np.empty(count, dtype=np.int64)
    ev_i = np.empty(count, dtype=np.int64)
    ev_j = np.empty(count, dtype=np.int64)
    ev_up = np.empty(count, dtype=np.bool_)
    idx = 0
    for s in range(n_ticks):
        for i in range(n_nodes):
            for j in range(i + 1, n_nodes):
                dx = pos[s, i, 0] - pos[s, j, 0]
                dy = pos[s, i, 1] - pos[s, j, 1]
                inr = dx * dx + dy * dy <= r2
                if inr != adj[i, j]:
                    ev_t[idx] = t0 + s
                    ev_i[idx] = i
                    ev_j[idx] = j
                    ev_up[idx] = inr
                    idx += 1
                    adj[i, j] = inr
    return ev_t, ev_i, ev_j, ev_up
