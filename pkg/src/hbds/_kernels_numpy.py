"""Pure-numpy fallback kernels, floating-point identical to the numba versions."""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def fill_positions(leg_start, leg_x, leg_y, leg_ux, leg_uy, leg_speed,
                   node_ptr, t0, n_ticks, out):
    n_nodes = node_ptr.shape[0] - 1
    times = np.arange(t0, t0 + n_ticks, dtype=np.float64)
    for n in range(n_nodes):
        lo = node_ptr[n]
        hi = node_ptr[n + 1]
        starts = leg_start[lo:hi]
        idx = np.searchsorted(starts, times, side="right") - 1
        np.clip(idx, 0, hi - lo - 1, out=idx)
        k = lo + idx
        dt = times - leg_start[k]
        out[:, n, 0] = leg_x[k] + leg_ux[k] * leg_speed[k] * dt
        out[:, n, 1] = leg_y[k] + leg_uy[k] * leg_speed[k] * dt


def contact_transitions(pos, adj, r2, t0):
    n_ticks, n_nodes = pos.shape[0], pos.shape[1]
    triu = np.triu(np.ones((n_nodes, n_nodes), dtype=bool), k=1)

    ts, iis, jjs, ups = [], [], [], []
    for s in range(n_ticks):
        p = pos[s]
        dx = p[:, 0][:, None] - p[:, 0][None, :]
        dy = p[:, 1][:, None] - p[:, 1][None, :]
        inr = (dx * dx + dy * dy) <= r2
        changed = (inr != adj) & triu
        if changed.any():
            ii, jj = np.nonzero(changed)
            ts.append(np.full(ii.shape[0], t0 + s, dtype=np.int64))
            iis.append(ii.astype(np.int64))
            jjs.append(jj.astype(np.int64))
            ups.append(inr[ii, jj])
            adj[ii, jj] = inr[ii, jj]

    if not ts:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy(), np.empty(0, dtype=bool)
    return (np.concatenate(ts), np.concatenate(iis),
            np.concatenate(jjs), np.concatenate(ups))
