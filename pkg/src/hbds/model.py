"""Shared domain types: nodes, behavior profiles, contacts, packets, reputation entries."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum


class Role(str, Enum):
    MEMBER = "Member"
    CH = "CH"
    ACH = "ACH"
    IH = "IH"
    GW = "GW"
    EXPELLED = "Expelled"


class BehaviorKind(str, Enum):
    COOPERATIVE = "Cooperative"
    SELFISH = "Selfish"


@dataclass(frozen=True)
class BehaviorProfile:
    # Validity is checked by validate_node_state, not at construction, so the
    # predicate can actually be exercised on bad inputs.
    kind: BehaviorKind
    drop_probability: float = 0.0


COOPERATIVE = BehaviorProfile(BehaviorKind.COOPERATIVE, 0.0)


@dataclass
class NodeState:
    id: int
    role: Role = Role.MEMBER
    reputation: float = 0.0
    behavior: BehaviorProfile = COOPERATIVE
    community_id: int | None = None
    strike_count: int = 0


@dataclass(frozen=True)
class ContactRecord:
    """One closed pairwise communication episode."""

    a: int
    b: int
    start: float
    length: float
    useful: bool

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("contact endpoints must differ")
        if self.length <= 0:
            raise ValueError("contact length must be positive")


def packet_tag(pkt_id: int, src: int, dst: int, size: int, created_at: float, ttl: float) -> str:
    """Deterministic non-cryptographic digest over a packet's immutable fields."""
    blob = f"{pkt_id}|{src}|{dst}|{size}|{created_at!r}|{ttl!r}".encode()
    return hashlib.blake2s(blob, digest_size=8).hexdigest()


@dataclass(frozen=True)
class Packet:
    id: int
    src: int
    dst: int
    size: int
    created_at: float
    ttl: float
    integrity_tag: str = ""

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError("packet src and dst must differ")
        if not self.integrity_tag:
            object.__setattr__(self, "integrity_tag", self.expected_tag())

    def expected_tag(self) -> str:
        return packet_tag(self.id, self.src, self.dst, self.size, self.created_at, self.ttl)

    def tag_ok(self) -> bool:
        return self.integrity_tag == self.expected_tag()

    def expired(self, now: float) -> bool:
        return (now - self.created_at) > self.ttl


@dataclass
class RTableEntry:
    node: int
    reputation: float
    last_updated: int = 0


HEAD_ROLES = (Role.CH, Role.ACH, Role.IH)


def validate_node_state(
    state: NodeState,
    heads: tuple[int | None, int | None, int | None] | None = None,
    expelled: set[int] | None = None,
) -> bool:
    """True iff the node state satisfies every structural invariant.

    ``heads`` (current CH/ACH/IH ids) and ``expelled`` let callers check the
    role-exclusivity rules that a lone state object cannot express.
    """
    prof = state.behavior
    if prof.kind is BehaviorKind.COOPERATIVE and prof.drop_probability != 0.0:
        return False
    if prof.kind is BehaviorKind.SELFISH and not (0.0 < prof.drop_probability <= 1.0):
        return False
    if state.strike_count < 0:
        return False
    if expelled is not None and state.id in expelled:
        if state.role in HEAD_ROLES:
            return False
        if heads is not None and state.id in [h for h in heads if h is not None]:
            return False
    if state.role is Role.EXPELLED and heads is not None:
        if state.id in [h for h in heads if h is not None]:
            return False
    return True
