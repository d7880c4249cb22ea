"""Authoritative reputation bookkeeping.

The community head's ledger is the single source of truth; members hold copies
refreshed by the post-election broadcast. Selfish episodes escalate from a
withheld reward to an extra deduction to temporary expulsion, and expelled
nodes re-enter only after their expiry by burning any negative balance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import IncentiveConstants
from .model import NodeState, Role, RTableEntry


@dataclass
class ExpulsionRecord:
    node: int
    expiry: float
    debt: float


@dataclass
class CommunityLedger:
    community: int = 0
    entries: dict[int, RTableEntry] = field(default_factory=dict)
    expelled: dict[int, ExpulsionRecord] = field(default_factory=dict)
    round: int = 0

    def reputation(self, node: int) -> float:
        entry = self.entries.get(node)
        return entry.reputation if entry is not None else 0.0

    def register(self, node: int) -> RTableEntry:
        entry = self.entries.get(node)
        if entry is None:
            entry = RTableEntry(node=node, reputation=0.0, last_updated=self.round)
            self.entries[node] = entry
        return entry

    def snapshot(self) -> dict[int, float]:
        return {n: e.reputation for n, e in sorted(self.entries.items())}

    def median_reputation(self, nodes) -> float:
        values = sorted(self.reputation(n) for n in nodes)
        if not values:
            return 0.0
        mid = len(values) // 2
        if len(values) % 2:
            return values[mid]
        return 0.5 * (values[mid - 1] + values[mid])


def apply_settlement(ledger: CommunityLedger, deltas: dict[int, float],
                     round_no: int | None = None) -> None:
    """Apply reputation deltas atomically; unknown nodes auto-register at zero."""
    if round_no is not None:
        ledger.round = round_no
    for node in sorted(deltas):
        entry = ledger.register(node)
        entry.reputation += deltas[node]
        entry.last_updated = ledger.round


def carry_forward(directory: dict[int, CommunityLedger], node: int,
                  from_community: int | None, to_community: int) -> float:
    """Seed a joining node's entry from any community that already knows it.

    Reputation knowledge is network-wide: the departure community is consulted
    first, then every other ledger (the destination's own record wins if it
    already exists); a node nobody knows starts fresh at zero.
    """
    dest = directory[to_community]
    known = dest.entries.get(node)
    if known is not None:
        return known.reputation
    order = [from_community] if from_community is not None else []
    order += [cid for cid in sorted(directory) if cid != to_community and cid != from_community]
    for cid in order:
        other = directory.get(cid)
        if other is None:
            continue
        entry = other.entries.get(node)
        if entry is not None:
            seeded = dest.register(node)
            seeded.reputation = entry.reputation
            return seeded.reputation
    dest.register(node)
    return 0.0


def escalate_penalty(state: NodeState, ledger: CommunityLedger,
                     constants: IncentiveConstants, now: float,
                     expel_duration: float) -> tuple[str, float]:
    """Apply the strike ladder after a selfish verdict has been recorded.

    Returns (action, extra_delta): first strike costs nothing beyond the
    withheld/forfeited forwarding pay, the second strike deducts one more
    f_pay, and the third expels the node with its negative balance as debt.
    """
    strikes = state.strike_count
    if strikes <= 1:
        return "withheld", 0.0
    if strikes == 2:
        return "penalized", -constants.f_pay
    debt = abs(min(0.0, ledger.reputation(state.id)))
    state.role = Role.EXPELLED
    ledger.expelled[state.id] = ExpulsionRecord(state.id, now + expel_duration, debt)
    return "expelled", 0.0


def readmit(ledger: CommunityLedger, state: NodeState, payment: float,
            now: float) -> bool:
    """Restore an expelled node once its expiry passed and its debt is covered.

    The payment is reputation escrow burned on re-entry: the node always
    restarts as a Member at reputation zero with a clean strike record.
    """
    record = ledger.expelled.get(state.id)
    if record is None:
        return False
    if now < record.expiry or payment < record.debt:
        return False
    entry = ledger.register(state.id)
    entry.reputation = 0.0
    state.role = Role.MEMBER
    state.strike_count = 0
    del ledger.expelled[state.id]
    return True


@dataclass
class AuditReport:
    ok: bool
    max_node_diff: float
    node_diffs: dict[int, float]
    category_totals: dict[str, float]
    ledger_total: float
    delta_total: float

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (f"audit {status}: max node diff {self.max_node_diff:.3e}, "
                f"ledger total {self.ledger_total!r}, replayed total {self.delta_total!r}")


def audit_trace(lines, tolerance: float = 1e-6) -> AuditReport:
    """Replay every reputation delta in a trace and reconcile with the final snapshot.

    The trace is the append-only run log: each mutation appears as a rep_delta
    line and the closing ledger state as ledger lines. The audit passes when
    every node's replayed total matches its snapshot within tolerance.
    """
    replayed: dict[int, float] = {}
    categories: dict[str, float] = {}
    snapshot: dict[int, float] = {}

    for line in lines:
        parts = line.split()
        if len(parts) < 2:
            continue
        kind = None
        fields = {}
        for part in parts:
            if "=" not in part:
                continue
            key, value = part.split("=", 1)
            fields[key] = value
            if key == "kind":
                kind = value
        if kind == "rep_delta":
            node = int(fields["node"])
            amount = float(fields["amount"])
            reason = fields.get("reason", "unknown")
            replayed[node] = replayed.get(node, 0.0) + amount
            categories[reason] = categories.get(reason, 0.0) + amount
        elif kind == "ledger":
            snapshot[int(fields["node"])] = float(fields["rep"])

    diffs = {}
    for node in set(replayed) | set(snapshot):
        diffs[node] = abs(replayed.get(node, 0.0) - snapshot.get(node, 0.0))
    max_diff = max(diffs.values(), default=0.0)
    return AuditReport(
        ok=max_diff <= tolerance,
        max_node_diff=max_diff,
        node_diffs=diffs,
        category_totals=categories,
        ledger_total=sum(snapshot.values()),
        delta_total=sum(replayed.values()),
    )
