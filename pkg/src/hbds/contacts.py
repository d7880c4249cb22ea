"""Contact detection: range crossings on the sampled position stream."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import get_kernels
from .config import ScenarioConfig
from .mobility import generate_mobility, n_ticks


@dataclass(frozen=True)
class ContactEvent:
    t: float
    up: bool
    a: int
    b: int


@dataclass(frozen=True)
class ContactInterval:
    a: int
    b: int
    t_up: float
    t_down: float

    @property
    def length(self) -> float:
        return self.t_down - self.t_up


def detect_contacts(positions: np.ndarray, tx_range: float, t0: int = 0,
                    backend: str | None = None):
    """Scan a (ticks, nodes, 2) position array for range crossings.

    Returns (events, open_since): crossing events in (t, a, b) order plus the
    start times of contacts still open after the last tick.
    """
    kernels = get_kernels(backend)
    n_nodes = positions.shape[1]
    adj = np.zeros((n_nodes, n_nodes), dtype=np.bool_)
    r2 = float(tx_range) * float(tx_range)

    ev_t, ev_i, ev_j, ev_up = kernels.contact_transitions(positions, adj, r2, t0)
    events = [ContactEvent(float(t), bool(up), int(i), int(j))
              for t, i, j, up in zip(ev_t, ev_i, ev_j, ev_up)]

    open_since: dict[tuple[int, int], float] = {}
    for ev in events:
        key = (ev.a, ev.b)
        if ev.up:
            open_since[key] = ev.t
        else:
            open_since.pop(key, None)
    return events, open_since


def sweep_contacts(config: ScenarioConfig, backend: str | None = None,
                   block_ticks: int = 2048):
    """Run mobility + detection over the whole scenario.

    Returns (events, intervals). Contacts still open at the end of the run are
    closed at sim_duration; zero-length closes are discarded (no conversation
    can fit in them).
    """
    kernels = get_kernels(backend)
    adj = np.zeros((config.n_nodes, config.n_nodes), dtype=np.bool_)
    r2 = float(config.tx_range) * float(config.tx_range)

    events: list[ContactEvent] = []
    open_since: dict[tuple[int, int], float] = {}
    intervals: list[ContactInterval] = []

    for t0, block in generate_mobility(config, backend=backend, block_ticks=block_ticks):
        ev_t, ev_i, ev_j, ev_up = kernels.contact_transitions(block, adj, r2, t0)
        for t, i, j, up in zip(ev_t, ev_i, ev_j, ev_up):
            t_f, a, b = float(t), int(i), int(j)
            if up:
                open_since[(a, b)] = t_f
                events.append(ContactEvent(t_f, True, a, b))
            else:
                start = open_since.pop((a, b))
                intervals.append(ContactInterval(a, b, start, t_f))
                events.append(ContactEvent(t_f, False, a, b))

    t_end = float(n_ticks(config) - 1)
    for (a, b) in sorted(open_since):
        start = open_since[(a, b)]
        if t_end > start:
            intervals.append(ContactInterval(a, b, start, t_end))
            events.append(ContactEvent(t_end, False, a, b))

    return events, intervals
