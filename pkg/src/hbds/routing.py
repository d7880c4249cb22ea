"""Store-carry-forward relay policies for the four switchable protocols.

HBDS senders skip receivers whose broadcast reputation has gone negative
(known defectors), and selfish receivers soften their refusals as their own
reputation climbs toward the community target. The two social baselines are
deliberately simplified: the SimBet-like policy hands single custody up a
betweenness+similarity gradient, the SSAR-like policy replicates only to
nodes with an established tie to the destination, and neither converts
selfish behavior.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .model import BehaviorKind, BehaviorProfile

ACCEPTED = "Accepted"
SELFISH_REFUSAL = "SelfishRefusal"
BUFFER_FULL = "BufferFull"
TTL_EXPIRED = "TtlExpired"
INELIGIBLE = "IneligibleRelay"


@dataclass(frozen=True)
class ForwardDecision:
    packet: int
    src: int
    dst: int
    accepted: bool
    reason: str
    sent: bool = False


# --- HBDS acceptance -------------------------------------------------------

# Expected relay gain must beat this for a selfish node to accept outright;
# the default keeps the decision with the reputation scaling below.
DEFAULT_SELFISH_THRESHOLD = None

REP_TARGET_FACTOR = 10.0


def rep_target(median_rep: float, f_pay: float) -> float:
    return median_rep + REP_TARGET_FACTOR * f_pay


def effective_drop_probability(profile: BehaviorProfile, reputation: float,
                               target: float) -> float:
    """Profile drop probability scaled down linearly as reputation approaches target."""
    if profile.kind is BehaviorKind.COOPERATIVE:
        return 0.0
    if target > 0.0 and reputation >= target:
        return 0.0
    if reputation <= 0.0 or target <= 0.0:
        return profile.drop_probability
    return profile.drop_probability * (1.0 - reputation / target)


def hbds_acceptance(profile: BehaviorProfile, reputation: float, median_rep: float,
                    f_pay: float, roll: float | None,
                    selfish_threshold: float | None = DEFAULT_SELFISH_THRESHOLD,
                    expelled: bool = False) -> bool:
    """Receiver-side relay decision under the incentive scheme.

    Cooperative nodes always accept. A selfish node accepts outright when the
    relay payment clears its threshold or when it has fallen below the
    community median (catching up is the only way to earn); otherwise it rolls
    against its reputation-scaled drop probability.
    """
    if expelled:
        return False
    if profile.kind is BehaviorKind.COOPERATIVE:
        return True
    if selfish_threshold is not None and f_pay > selfish_threshold:
        return True
    if reputation < median_rep:
        return True
    p = effective_drop_probability(profile, reputation, rep_target(median_rep, f_pay))
    if p <= 0.0:
        return True
    if roll is None:
        raise ValueError("selfish acceptance needs a random roll")
    return roll >= p


def baseline_acceptance(profile: BehaviorProfile, roll: float | None) -> bool:
    """Acceptance without any incentive conversion: the profile speaks unmodified."""
    if profile.kind is BehaviorKind.COOPERATIVE:
        return True
    if roll is None:
        raise ValueError("selfish acceptance needs a random roll")
    return roll >= profile.drop_probability


# --- social state for the baselines ---------------------------------------

class SocialGraph:
    """Contact graph with the social measures the baselines need.

    Ties age out of a sliding window (pass window=None for a cumulative
    graph): stale acquaintances should not keep attracting custody.
    """

    BETWEENNESS_REFRESH = 300.0  # sim-seconds between exact recomputes

    def __init__(self, window: float | None = None):
        self.window = window
        self.adj: dict[int, set[int]] = {}
        self.counts: dict[tuple[int, int], int] = {}
        self.node_totals: dict[int, int] = {}
        self.events: deque[tuple[float, int, int]] = deque()
        self.version = 0
        self._betweenness: dict[int, float] = {}
        self._betweenness_version = -1
        self._betweenness_time: float | None = None

    def add_contact(self, a: int, b: int, t: float = 0.0) -> None:
        key = (min(a, b), max(a, b))
        if self.window is not None:
            self.events.append((t, key[0], key[1]))
        if key not in self.counts:
            self.adj.setdefault(a, set()).add(b)
            self.adj.setdefault(b, set()).add(a)
            self.version += 1
        self.counts[key] = self.counts.get(key, 0) + 1
        self.node_totals[a] = self.node_totals.get(a, 0) + 1
        self.node_totals[b] = self.node_totals.get(b, 0) + 1

    def prune(self, now: float) -> None:
        """Expire contacts older than the window."""
        if self.window is None:
            return
        horizon = now - self.window
        while self.events and self.events[0][0] < horizon:
            _, a, b = self.events.popleft()
            key = (a, b)
            self.counts[key] -= 1
            self.node_totals[a] -= 1
            self.node_totals[b] -= 1
            if self.counts[key] == 0:
                del self.counts[key]
                self.adj[a].discard(b)
                self.adj[b].discard(a)
                self.version += 1

    def neighbors(self, node: int) -> set[int]:
        return self.adj.get(node, set())

    def similarity(self, a: int, b: int) -> int:
        return len(self.neighbors(a) & self.neighbors(b))

    def tie_strength(self, node: int, other: int) -> float:
        """Share of node's contact events spent with other."""
        total = self.node_totals.get(node, 0)
        if total == 0:
            return 0.0
        return self.counts.get((min(node, other), max(node, other)), 0) / total

    def refresh_betweenness(self, now: float) -> None:
        """Recompute centrality if the graph changed and the cache is stale.

        The staleness window keeps Brandes off the per-offer hot path; the
        decision depends only on deterministic event times.
        """
        if self._betweenness_version == self.version:
            return
        if self._betweenness_time is None or now - self._betweenness_time >= self.BETWEENNESS_REFRESH:
            self._recompute_betweenness()
            self._betweenness_time = now

    def betweenness(self) -> dict[int, float]:
        """Centrality map, computed on first use and then served from cache
        until refresh_betweenness decides the graph drifted enough."""
        if self._betweenness_version < 0:
            self._recompute_betweenness()
        return self._betweenness

    def _recompute_betweenness(self) -> None:
        nodes = sorted(self.adj)
        centrality = {v: 0.0 for v in nodes}
        for source in nodes:
            stack: list[int] = []
            preds: dict[int, list[int]] = {v: [] for v in nodes}
            sigma = {v: 0 for v in nodes}
            dist = {v: -1 for v in nodes}
            sigma[source] = 1
            dist[source] = 0
            queue = [source]
            head = 0
            while head < len(queue):
                v = queue[head]
                head += 1
                stack.append(v)
                for w in sorted(self.adj[v]):
                    if dist[w] < 0:
                        dist[w] = dist[v] + 1
                        queue.append(w)
                    if dist[w] == dist[v] + 1:
                        sigma[w] += sigma[v]
                        preds[w].append(v)
            delta = {v: 0.0 for v in nodes}
            while stack:
                w = stack.pop()
                for v in preds[w]:
                    delta[v] += (sigma[v] / sigma[w]) * (1.0 + delta[w])
                if w != source:
                    centrality[w] += delta[w]
        for v in nodes:
            centrality[v] /= 2.0
        self._betweenness = centrality
        self._betweenness_version = self.version


def simbet_utilities(graph: SocialGraph, carrier: int, candidate: int,
                     dst: int) -> tuple[float, float]:
    """Pairwise-normalized betweenness+similarity utilities of carrier and candidate."""
    betw = graph.betweenness()
    sim_c = graph.similarity(carrier, dst)
    sim_n = graph.similarity(candidate, dst)
    bet_c = betw.get(carrier, 0.0)
    bet_n = betw.get(candidate, 0.0)

    sim_sum = sim_c + sim_n
    bet_sum = bet_c + bet_n
    sim_util_c = sim_c / sim_sum if sim_sum > 0 else 0.5
    bet_util_c = bet_c / bet_sum if bet_sum > 0 else 0.5
    util_c = 0.5 * sim_util_c + 0.5 * bet_util_c
    util_n = 0.5 * (1.0 - sim_util_c) + 0.5 * (1.0 - bet_util_c)
    return util_c, util_n


def simbet_like_acceptance(graph: SocialGraph, carrier: int, candidate: int,
                           dst: int) -> bool:
    """Hand custody over only when the candidate's social utility beats the carrier's."""
    util_c, util_n = simbet_utilities(graph, carrier, candidate, dst)
    return util_n > util_c


def ssar_like_acceptance(graph: SocialGraph, candidate: int, dst: int,
                         threshold: float = 0.0) -> bool:
    """Replicate only toward nodes with an established social tie to the destination."""
    return graph.tie_strength(candidate, dst) > threshold
