"""Deterministic discrete-event simulation loop.

One run wires everything together: precomputed mobility contacts and traffic
feed a time-ordered event queue; contacts trigger store-carry-forward
transfers under the configured protocol; elections close honesty windows and
settle payments; watchdog panels adjudicate relay custody and feed the strike
ladder. Custody state updates apply when a contact opens, while per-transfer
completion times (contact start plus serialized link time) timestamp
deliveries and watchdog timers.

Everything observable lands in an append-only trace of `t=.. kind=.. k=v`
lines; metrics and the reputation audit are recomputed from that trace alone.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .config import LINK_RATE_BPS, IncentiveConstants, ScenarioConfig
from .contacts import ContactInterval, sweep_contacts
from .honesty import HonestyWindows
from .ledger import CommunityLedger, apply_settlement, escalate_penalty, readmit
from .election import matrix_lookup, run_election
from .metrics import MetricsReport, compute_metrics
from .model import BehaviorKind, BehaviorProfile, ContactRecord, NodeState, Packet, Role
from .rng import RandomStream, substream_seed
from .routing import (
    ACCEPTED,
    BUFFER_FULL,
    INELIGIBLE,
    SELFISH_REFUSAL,
    TTL_EXPIRED,
    ForwardDecision,
    SocialGraph,
    baseline_acceptance,
    hbds_acceptance,
    simbet_like_acceptance,
    ssar_like_acceptance,
)
from .watchdog import (
    RoundRobin,
    TrustState,
    cia_aggregate,
    importance_aspect,
    observe_relay,
    select_watchdogs,
    settle_forwarding,
    settle_watchdogs,
    update_trust,
)

WATCHDOG_TIMEOUT = 30.0

# Social ties feeding the baseline protocols never expire at desk scale; the
# graph machinery supports a sliding window for other scenario designs.
SOCIAL_WINDOW: float | None = None

# processing order for simultaneous events
_RANK_CONTACT_DOWN = 0
_RANK_TTL = 1
_RANK_WD_TIMEOUT = 2
_RANK_READMIT = 3
_RANK_ELECTION = 4
_RANK_CONTACT_UP = 5
_RANK_PKT_CREATE = 6


@dataclass
class SimEnvironment:
    """Protocol-independent precomputed inputs, reusable across runs with the
    same geometry/traffic parameters and seed."""

    intervals: list[ContactInterval]
    pair_intervals: dict[tuple[int, int], list[tuple[float, float]]]
    packets: list[Packet]


def environment_key(config: ScenarioConfig) -> tuple:
    return (config.area_width, config.area_height, config.n_terminal_nodes,
            config.n_relay_nodes, config.tx_range, config.avg_speed,
            config.sim_duration, config.packet_interval, config.packet_size,
            config.packet_ttl, config.rng_seed)


def prepare_environment(config: ScenarioConfig, backend: str | None = None) -> SimEnvironment:
    _, intervals = sweep_contacts(config, backend=backend)
    pair_map: dict[tuple[int, int], list[tuple[float, float]]] = {}
    for iv in intervals:
        pair_map.setdefault((iv.a, iv.b), []).append((iv.t_up, iv.t_down))

    traffic = RandomStream(substream_seed(config.rng_seed, "traffic"))
    packets: list[Packet] = []
    lo, hi = config.packet_interval
    smin, smax = config.packet_size
    t = 0.0
    pkt_id = 0
    n_term = config.n_terminal_nodes
    while True:
        t += traffic.uniform_in(lo, hi)
        if t > config.sim_duration:
            break
        src = traffic.randrange(n_term)
        dst = traffic.randrange(n_term - 1)
        if dst >= src:
            dst += 1
        size = smin + traffic.randrange(smax - smin + 1)
        packets.append(Packet(pkt_id, src, dst, size, t, config.packet_ttl))
        pkt_id += 1
    return SimEnvironment(intervals=intervals, pair_intervals=pair_map, packets=packets)


@dataclass
class ContactSession:
    start: float
    end: float
    offers: int = 0
    successes: int = 0


@dataclass
class RunResult:
    config: ScenarioConfig
    trace: list[str]
    metrics: MetricsReport
    ledger: CommunityLedger
    nodes: dict[int, NodeState]
    delivered: set[int] = field(default_factory=set)

    def trace_text(self) -> str:
        return "\n".join(self.trace) + "\n"


class Simulation:
    def __init__(self, config: ScenarioConfig, env: SimEnvironment):
        self.cfg = config
        self.env = env
        self.constants: IncentiveConstants = config.incentive_constants
        self.protocol = config.protocol
        self.trace: list[str] = []

        self.nodes: dict[int, NodeState] = {}
        selfish = set(RandomStream(substream_seed(config.rng_seed, "behavior"))
                      .sample_ids(list(config.terminal_ids()), config.selfish_count))
        for nid in config.terminal_ids():
            profile = (BehaviorProfile(BehaviorKind.SELFISH, config.selfish_drop_probability)
                       if nid in selfish else BehaviorProfile(BehaviorKind.COOPERATIVE))
            self.nodes[nid] = NodeState(nid, Role.MEMBER, 0.0, profile, community_id=0)
        for nid in config.relay_ids():
            self.nodes[nid] = NodeState(nid, Role.GW, 0.0, BehaviorProfile(BehaviorKind.COOPERATIVE))

        self.roll = RandomStream(substream_seed(config.rng_seed, "routing"))

        self.buffers: dict[int, dict[int, Packet]] = {n: {} for n in self.nodes}
        self.buffer_used: dict[int, int] = {n: 0 for n in self.nodes}
        self.holders: dict[int, set[int]] = {}
        self.packets: dict[int, Packet] = {}
        self.delivered: set[int] = set()
        self.dead: set[int] = set()
        self.custody_ok: set[tuple[int, int]] = set()
        self.retransmit: dict[tuple[int, int], float] = {}

        self.active: dict[tuple[int, int], ContactSession] = {}
        self.adjacency: dict[int, set[int]] = {n: set() for n in self.nodes}

        self.ledger = CommunityLedger(community=0)
        for nid in config.terminal_ids():
            self.ledger.register(nid)
        self.views: dict[int, dict[int, float]] = {n: {} for n in config.terminal_ids()}
        self.windows = HonestyWindows()
        self.social = SocialGraph(window=SOCIAL_WINDOW)

        self.heads: tuple[int, int, int] | None = None
        self.prev_ach: int | None = None
        self.round_no = 0
        self.rr = RoundRobin()
        self.trust: dict[tuple[int, int], TrustState] = {}
        self.any_strike = False
        self._last_ack: dict[int, float] = {}

        self._queue: list = []
        self._seq = 0

    # --- infrastructure ----------------------------------------------------

    def log(self, t: float, kind: str, **fields) -> None:
        body = " ".join(f"{k}={v}" for k, v in fields.items())
        self.trace.append(f"t={t!r} kind={kind}" + (f" {body}" if body else ""))

    def push(self, t: float, rank: int, key: tuple, payload) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (t, rank, key, self._seq, payload))

    def node_buffer_capacity(self, node: int) -> int:
        return (self.cfg.relay_buffer if node in self.cfg.relay_ids()
                else self.cfg.terminal_buffer)

    def trust_state(self, observer: int, subject: int) -> TrustState:
        key = (observer, subject)
        state = self.trust.get(key)
        if state is None:
            state = TrustState(observer, subject)
            self.trust[key] = state
        return state

    def is_expelled(self, node: int) -> bool:
        return self.nodes[node].role is Role.EXPELLED

    def community_members(self) -> list[int]:
        return [n for n in self.cfg.terminal_ids() if not self.is_expelled(n)]

    # --- run loop ------------------------------------------------------------

    def run(self) -> RunResult:
        cfg = self.cfg
        for iv in self.env.intervals:
            self.push(iv.t_up, _RANK_CONTACT_UP, (iv.a, iv.b), ("up", iv))
            self.push(iv.t_down, _RANK_CONTACT_DOWN, (iv.a, iv.b), ("down", iv))
        for pkt in self.env.packets:
            self.push(pkt.created_at, _RANK_PKT_CREATE, (pkt.id,), ("create", pkt))
            self.push(pkt.created_at + pkt.ttl, _RANK_TTL, (pkt.id,), ("ttl", pkt))
        if self.protocol == "HBDS":
            t = cfg.election_period
            while t < cfg.sim_duration:
                self.push(t, _RANK_ELECTION, (0,), ("election", None))
                t += cfg.election_period

        while self._queue:
            t, rank, key, _, payload = heapq.heappop(self._queue)
            kind = payload[0]
            if kind == "up":
                self._on_contact_up(t, payload[1])
            elif kind == "down":
                self._on_contact_down(t, payload[1])
            elif kind == "create":
                self._on_packet_create(t, payload[1])
            elif kind == "ttl":
                self._on_ttl_expiry(t, payload[1])
            elif kind == "election":
                self._on_election(t)
            elif kind == "wd":
                self._on_watchdog_timeout(t, payload[1])
            elif kind == "readmit":
                self._on_readmit(t, payload[1])

        self._close_ledger()
        metrics = compute_metrics(self.trace)
        return RunResult(config=cfg, trace=self.trace, metrics=metrics,
                         ledger=self.ledger, nodes=self.nodes, delivered=set(self.delivered))

    def _close_ledger(self) -> None:
        t_end = self.cfg.sim_duration
        for nid in sorted(self.nodes):
            state = self.nodes[nid]
            self.log(t_end, "ledger", node=nid, rep=repr(self.ledger.reputation(nid)),
                     strikes=state.strike_count, role=state.role.value)

    # --- packets -------------------------------------------------------------

    def _on_packet_create(self, t: float, pkt: Packet) -> None:
        if self.is_expelled(pkt.src):
            self.log(t, "pkt_suppressed", pkt=pkt.id, src=pkt.src)
            return
        self.packets[pkt.id] = pkt
        self.holders[pkt.id] = set()
        self.log(t, "pkt_create", pkt=pkt.id, src=pkt.src, dst=pkt.dst,
                 size=pkt.size, ttl=repr(pkt.ttl))
        self._store(pkt.src, pkt, t)

    def _store(self, node: int, pkt: Packet, now: float) -> bool:
        cap = self.node_buffer_capacity(node)
        if pkt.size > cap:
            return False
        buf = self.buffers[node]
        while self.buffer_used[node] + pkt.size > cap and buf:
            # buffer pressure is not selfishness: the eviction never counts
            # against the node's custody record
            victim = min(buf.values(), key=lambda p: (p.created_at, p.id))
            self._remove_copy(node, victim, now, evicted=True, no_fault=True)
        buf[pkt.id] = pkt
        self.buffer_used[node] += pkt.size
        self.holders[pkt.id].add(node)
        return True

    def _remove_copy(self, node: int, pkt: Packet, now: float,
                     evicted: bool = False, no_fault: bool = False) -> None:
        buf = self.buffers[node]
        if pkt.id not in buf:
            return
        del buf[pkt.id]
        self.buffer_used[node] -= pkt.size
        held = self.holders.get(pkt.id)
        if held is not None:
            held.discard(node)
        if no_fault:
            self.custody_ok.add((node, pkt.id))
        if evicted:
            self.log(now, "buf_evict", node=node, pkt=pkt.id)
            self._check_packet_death(pkt, now)

    def _check_packet_death(self, pkt: Packet, now: float) -> None:
        if pkt.id in self.delivered or pkt.id in self.dead:
            return
        if not self.holders.get(pkt.id):
            self.dead.add(pkt.id)
            self.log(now, "pkt_drop", pkt=pkt.id, cause="copies_lost")

    def _on_ttl_expiry(self, t: float, pkt: Packet) -> None:
        if pkt.id in self.delivered or pkt.id in self.dead or pkt.id not in self.packets:
            return
        self.log(t, "ttl_expiry", pkt=pkt.id)
        for node in sorted(self.holders.get(pkt.id, set())):
            self._remove_copy(node, pkt, t, no_fault=True)
        self.dead.add(pkt.id)
        self.log(t, "pkt_drop", pkt=pkt.id, cause="ttl")

    def _deliver(self, pkt: Packet, done: float) -> None:
        self.delivered.add(pkt.id)
        self.log(done, "deliver", pkt=pkt.id, node=pkt.dst,
                 delay=repr(done - pkt.created_at))
        for node in sorted(self.holders.get(pkt.id, set())):
            self._remove_copy(node, pkt, done, no_fault=True)

    # --- contacts and transfers ----------------------------------------------

    def _on_contact_up(self, t: float, iv: ContactInterval) -> None:
        a, b = iv.a, iv.b
        if self.is_expelled(a) or self.is_expelled(b):
            return
        self.active[(a, b)] = ContactSession(start=t, end=iv.t_down)
        self.adjacency[a].add(b)
        self.adjacency[b].add(a)
        if self.protocol in ("SimBetLike", "SSARLike"):
            self.social.prune(t)
        self.social.add_contact(a, b, t)
        self.log(t, "contact_up", a=a, b=b)
        self._plan_transfers(t, iv)

    def _on_contact_down(self, t: float, iv: ContactInterval) -> None:
        a, b = iv.a, iv.b
        session = self.active.pop((a, b), None)
        self.adjacency[a].discard(b)
        self.adjacency[b].discard(a)
        if session is None:
            return
        length = t - session.start
        useful = session.successes > 0
        self.log(t, "contact_down", a=a, b=b, length=repr(length), useful=int(useful))
        if length > 0:
            rec = ContactRecord(a, b, session.start, length, useful)
            self.windows.record_contact(rec, is_conversation=session.offers > 0)

    def _plan_transfers(self, t: float, iv: ContactInterval) -> None:
        a, b = iv.a, iv.b
        session = self.active[(a, b)]
        capacity = LINK_RATE_BPS * (iv.t_down - iv.t_up)
        used = 0.0

        offers: list[tuple[float, int, int, int, int, Packet]] = []
        for direction, (s, r) in enumerate(((a, b), (b, a))):
            for pkt in self.buffers[s].values():
                priority = 0 if pkt.dst == r else 1
                offers.append((pkt.created_at, pkt.id, priority, direction, s, pkt))
        offers.sort(key=lambda o: (o[2], o[0], o[1], o[3]))

        for _, _, _, direction, sender, pkt in offers:
            receiver = b if sender == a else a
            if pkt.id not in self.buffers[sender]:
                continue
            if pkt.id in self.delivered or pkt.id in self.dead:
                continue
            if pkt.id in self.buffers[receiver] or receiver == pkt.src:
                continue
            now = t + used / LINK_RATE_BPS
            if pkt.expired(now):
                self._decide(now, ForwardDecision(pkt.id, sender, receiver, False, TTL_EXPIRED))
                continue
            if receiver != pkt.dst:
                ok, reason = self._should_offer(now, sender, receiver, pkt)
                if not ok:
                    self._decide(now, ForwardDecision(pkt.id, sender, receiver, False, reason))
                    continue
                if pkt.size > self.node_buffer_capacity(receiver):
                    self._decide(now, ForwardDecision(pkt.id, sender, receiver, False, BUFFER_FULL))
                    continue
            if used + pkt.size > capacity:
                break  # link saturated; a truncated transfer is discarded

            used += pkt.size
            done = t + used / LINK_RATE_BPS
            session.offers += 1
            self.retransmit[(sender, pkt.id)] = done

            if receiver == pkt.dst:
                self._decide(done, ForwardDecision(pkt.id, sender, receiver, True, ACCEPTED, sent=True))
                session.successes += 1
                self._deliver(pkt, done)
                continue

            accepted = self._accepts(receiver, pkt)
            if self._custody_transfer(sender, pkt):
                self._remove_copy(sender, pkt, done, no_fault=True)
            if accepted:
                self._decide(done, ForwardDecision(pkt.id, sender, receiver, True, ACCEPTED, sent=True))
                session.successes += 1
                self._store(receiver, pkt, done)
                self._after_custody(receiver, pkt, done)
            else:
                self._decide(done, ForwardDecision(pkt.id, sender, receiver, False,
                                                   SELFISH_REFUSAL, sent=True))
                self._after_custody(receiver, pkt, done)
                self._check_packet_death(pkt, done)

    def _decide(self, t: float, decision: ForwardDecision) -> None:
        self.log(t, "fwd", pkt=decision.packet, src=decision.src, to=decision.dst,
                 accepted=int(decision.accepted), reason=decision.reason,
                 sent=int(decision.sent))

    def _custody_transfer(self, sender: int, pkt: Packet) -> bool:
        """Utility forwarding hands the copy over; only the source keeps one."""
        return self.protocol == "SimBetLike" and sender != pkt.src

    def _should_offer(self, now: float, sender: int, receiver: int,
                      pkt: Packet) -> tuple[bool, str]:
        if self.is_expelled(receiver):
            return False, INELIGIBLE
        if self.protocol == "HBDS":
            # known defectors are skipped as relays until they redeem: negative
            # reputation, or a strike record not yet worked back above median
            rep = self.ledger.reputation(receiver)
            if rep < 0.0:
                return False, INELIGIBLE
            if (self.nodes[receiver].strike_count > 0
                    and rep < self.ledger.median_reputation(self.community_members())):
                return False, INELIGIBLE
            return True, ""
        if self.protocol == "SimBetLike":
            self.social.refresh_betweenness(now)
            if not simbet_like_acceptance(self.social, sender, receiver, pkt.dst):
                return False, INELIGIBLE
            return True, ""
        if self.protocol == "SSARLike":
            if not ssar_like_acceptance(self.social, receiver, pkt.dst):
                return False, INELIGIBLE
            return True, ""
        return True, ""

    def _accepts(self, receiver: int, pkt: Packet) -> bool:
        state = self.nodes[receiver]
        if state.role is Role.GW:
            return True
        profile = state.behavior
        selfish = profile.kind is BehaviorKind.SELFISH
        if self.protocol == "HBDS":
            members = self.community_members()
            median = self.ledger.median_reputation(members)
            return hbds_acceptance(
                profile,
                self.ledger.reputation(receiver),
                median,
                self.constants.f_pay,
                self.roll.uniform() if selfish else None,
                expelled=self.is_expelled(receiver),
            )
        return baseline_acceptance(profile, self.roll.uniform() if selfish else None)

    # --- watchdog ------------------------------------------------------------

    def _after_custody(self, relay: int, pkt: Packet, done: float) -> None:
        """Arrange payment supervision for a relay handoff (incentive protocol only)."""
        if self.protocol != "HBDS":
            return
        role = self.nodes[relay].role
        if role in (Role.CH, Role.GW):
            self.log(done, "relay_unpaid", node=relay, pkt=pkt.id, reason="ineligible")
            return
        if self.heads is None:
            self.log(done, "relay_unpaid", node=relay, pkt=pkt.id, reason="no_heads")
            return
        roster = self.community_members()
        panel = select_watchdogs(roster, relay, self.heads[1], self.prev_ach, self.rr)
        if panel is None:
            self.log(done, "relay_unmonitored", node=relay, pkt=pkt.id)
            self._rep_delta(done, relay, self.constants.f_pay, "fwd_pay_unmonitored")
            return
        self.log(done, "wd_assign", pkt=pkt.id, relay=relay, wn1=panel.wn1,
                 wn2=panel.wn2, wn3=panel.wn3, timeout=repr(done + WATCHDOG_TIMEOUT))
        deadline = done + WATCHDOG_TIMEOUT
        if deadline <= self.cfg.sim_duration:
            self.push(deadline, _RANK_WD_TIMEOUT, (relay, pkt.id), ("wd", (relay, pkt, done, panel)))

    def _on_watchdog_timeout(self, t: float, payload) -> None:
        relay, pkt, handoff, panel = payload
        if self.is_expelled(relay):
            self.log(t, "wd_cancelled", pkt=pkt.id, relay=relay, reason="relay_expelled")
            return

        retrans_time = self.retransmit.get((relay, pkt.id))
        retransmitted = retrans_time is not None and handoff < retrans_time <= t
        holds = pkt.id in self.buffers[relay] or (relay, pkt.id) in self.custody_ok

        # Custody verification is logical (hash receipts collected by the CH),
        # not radio overhearing: at this node density physical overhearing
        # would observe almost nothing. A watchdog expelled before the timeout
        # still falls back to its prior-trust default.
        in_range = {}
        prior = {}
        for wn in panel.members:
            in_range[wn] = not self.is_expelled(wn)
            prior[wn] = self.trust_state(wn, relay).combined

        reports = observe_relay(
            panel, pkt.id, relay,
            retransmitted=retransmitted,
            retransmit_tag_ok=pkt.tag_ok(),
            holds_packet=holds,
            holds_tag_ok=pkt.tag_ok(),
            in_range=in_range,
            prior_combined=prior,
            round_no=self.round_no,
        )
        ias = importance_aspect(*(self.ledger.reputation(wn) for wn in panel.members))
        verdict = cia_aggregate(reports, ias)

        for rep, ia in zip(reports, ias):
            self.log(t, "wd_report", pkt=pkt.id, relay=relay, wn=rep.watchdog,
                     verdict=rep.verdict, basis=rep.basis, ia=repr(ia))
        self.log(t, "wd_verdict", pkt=pkt.id, relay=relay, verdict=verdict)

        outcome = settle_forwarding(self.nodes[relay].role, verdict, self.constants)
        if outcome is None:
            self.log(t, "relay_unpaid", node=relay, pkt=pkt.id, reason="ineligible")
        else:
            delta, strike = outcome
            self._rep_delta(t, relay, delta, "fwd_pay" if delta > 0 else "fwd_penalty")
            if strike:
                state = self.nodes[relay]
                state.strike_count += 1
                self.any_strike = True
                self.log(t, "strike", node=relay, count=state.strike_count)
                action, extra = escalate_penalty(state, self.ledger, self.constants,
                                                 t, self.cfg.election_period)
                if extra:
                    self._rep_delta(t, relay, extra, "strike_penalty")
                if action == "expelled":
                    self._expel(t, relay)

        for wn, delta in sorted(settle_watchdogs(reports, verdict, self.constants).items()):
            self._rep_delta(t, wn, delta, "wn_pay")

        observed_fwd = retransmitted or holds
        for rep in reports:
            wn = rep.watchdog
            neighbor_opinions = [
                self.trust[(peer, relay)].combined
                for peer in sorted(self.adjacency[wn])
                if (peer, relay) in self.trust and peer != relay
            ]
            state = self.trust_state(wn, relay)
            observation = observed_fwd if rep.basis == "observed" else None
            self.trust[(wn, relay)] = update_trust(state, observation, neighbor_opinions)

    def _expel(self, t: float, node: int) -> None:
        record = self.ledger.expelled[node]
        self.log(t, "expel", node=node, until=repr(record.expiry), debt=repr(record.debt))
        for pkt_id in sorted(self.buffers[node]):
            pkt = self.packets[pkt_id]
            buf_pkt = self.buffers[node][pkt_id]
            del self.buffers[node][pkt_id]
            self.buffer_used[node] -= buf_pkt.size
            self.holders[pkt_id].discard(node)
            self._check_packet_death(pkt, t)
        for (x, y) in sorted(k for k in self.active if node in k):
            session = self.active.pop((x, y))
            self.adjacency[x].discard(y)
            self.adjacency[y].discard(x)
            length = t - session.start
            self.log(t, "contact_down", a=x, b=y, length=repr(length),
                     useful=int(session.successes > 0))
            if length > 0:
                rec = ContactRecord(x, y, session.start, length, session.successes > 0)
                self.windows.record_contact(rec, is_conversation=session.offers > 0)
        if self.heads is not None and node in self.heads:
            self._succeed_head(t, node)
        self.push(record.expiry, _RANK_READMIT, (node,), ("readmit", node))

    def _succeed_head(self, t: float, gone: int) -> None:
        """Auxiliary head takes over when the community head leaves mid-round."""
        ch, ach, ih = self.heads
        if gone == ch:
            if not self.is_expelled(ach):
                self.nodes[ach].role = Role.CH
            if not self.is_expelled(ih):
                self.nodes[ih].role = Role.ACH
            self.heads = (ach, ih, ih)
            self.log(t, "succession", ch=ach, ach=ih)
        elif gone == ach:
            if not self.is_expelled(ih):
                self.nodes[ih].role = Role.ACH
            self.heads = (ch, ih, ih)
            self.log(t, "succession", ch=ch, ach=ih)
        else:
            self.heads = (ch, ach, ach)

    def _on_readmit(self, t: float, node: int) -> None:
        record = self.ledger.expelled.get(node)
        if record is None:
            return
        rep_before = self.ledger.reputation(node)
        state = self.nodes[node]
        if readmit(self.ledger, state, payment=record.debt, now=t):
            self._note_delta_only(t, node, 0.0 - rep_before, "readmit_settlement")
            # re-entrants sync to the last broadcast table like everyone else
            self.views[node] = dict(self._last_ack)
            self.log(t, "readmit", node=node, debt=repr(record.debt))

    # --- elections -------------------------------------------------------------

    def _on_election(self, t: float) -> None:
        members = self.community_members()
        communities = {n: {0} for n in members}
        matrix = self.windows.close_window(members, communities)
        if len(members) < 3:
            self.log(t, "election_skipped", round=self.round_no + 1, reason="too_few_members")
            return
        self.round_no += 1
        record = run_election(self.round_no, 0, members, matrix_lookup(matrix), self.constants)
        if record is None:
            self.log(t, "election_skipped", round=self.round_no, reason="too_few_candidates")
            return

        old_heads = self.heads
        if old_heads is not None:
            for node in old_heads:
                if not self.is_expelled(node) and self.nodes[node].role is not Role.GW:
                    self.nodes[node].role = Role.MEMBER
        ch, ach, ih = record.heads
        self.nodes[ch].role = Role.CH
        self.nodes[ach].role = Role.ACH
        self.nodes[ih].role = Role.IH
        self.prev_ach = old_heads[1] if old_heads is not None else None
        self.heads = record.heads

        for node in sorted(record.payments):
            reason = "election_pay" if node in record.votes else "vote_pay"
            self._note_delta_only(t, node, record.payments[node], reason)
        for node in sorted(record.costs):
            cost = record.costs[node]
            if cost:
                self._note_delta_only(t, node, -cost, "election_cost")
        apply_settlement(self.ledger, record.deltas, self.round_no)

        self.log(t, "election", **_election_fields(record))
        self._last_ack = self.ledger.snapshot()
        for member in members:
            self.views[member] = dict(self._last_ack)
        self.log(t, "ch_ack", round=self.round_no, members=len(members))

    # --- reputation plumbing ----------------------------------------------------

    def _rep_delta(self, t: float, node: int, amount: float, reason: str) -> None:
        apply_settlement(self.ledger, {node: amount})
        self.log(t, "rep_delta", node=node, amount=repr(amount), reason=reason)

    def _note_delta_only(self, t: float, node: int, amount: float, reason: str) -> None:
        """Trace a delta that the caller applies (or has applied) itself."""
        self.log(t, "rep_delta", node=node, amount=repr(amount), reason=reason)


def _election_fields(record) -> dict:
    return {
        "round": record.round,
        "community": record.community,
        "ch": record.heads[0],
        "ach": record.heads[1],
        "ih": record.heads[2],
        "candidates": ";".join(f"{n}:{s!r}:{record.votes[n]}" for n, s in record.candidates),
        "payments": ";".join(f"{n}:{record.payments[n]!r}" for n in sorted(record.payments)),
        "costs": ";".join(f"{n}:{record.costs[n]!r}" for n in sorted(record.costs)),
    }


def run(config: ScenarioConfig, backend: str | None = None,
        env: SimEnvironment | None = None) -> RunResult:
    """Execute one full simulation run; deterministic in (config, seed, backend-independent)."""
    if env is None:
        env = prepare_environment(config, backend=backend)
    return Simulation(config, env).run()
