"""Pairwise honesty scoring.

A trustor x scores a trustee y from three observable components:

* contact score: entropy-weighted share of conversation time. Each contact
  contributes (cl/tcl) * E(cl) with E the Shannon surprise -p*log2(p) of the
  contact's share p = cl/tcl; the sum is normalized by log2(j) so j equal
  contacts score 1/j and every value stays in [0, 1]. A single contact falls
  back to its usefulness flag.
* centrality: fraction of the trustee's friends shared with the trustor.
* community overlap: fraction of the trustee's communities shared.

The final degree is a convex combination of the three, multiplied by an
exponential penalty discount that tracks how many of the trustee's past
conversations were ineffective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .model import ContactRecord

E_CONST = math.e


@dataclass(frozen=True)
class HonestyWeights:
    alpha1: float = 1.0 / 3.0
    alpha2: float = 1.0 / 3.0
    alpha3: float = 1.0 / 3.0

    def __post_init__(self):
        for a in (self.alpha1, self.alpha2, self.alpha3):
            if not (0.0 <= a <= 1.0):
                raise ValueError("honesty weights must lie in [0, 1]")
        if abs(self.alpha1 + self.alpha2 + self.alpha3 - 1.0) > 1e-9:
            raise ValueError("honesty weights must sum to 1")


def random_weights(stream) -> HonestyWeights:
    """Seeded random weights summing to 1 (opt-in alternative to the fixed default)."""
    cuts = sorted((stream.uniform(), stream.uniform()))
    return HonestyWeights(cuts[0], cuts[1] - cuts[0], 1.0 - cuts[1])


@dataclass
class HonestyStats:
    """Window snapshot consumed by the component scores."""

    contacts: dict[tuple[int, int], list[ContactRecord]] = field(default_factory=dict)
    friends: dict[int, set[int]] = field(default_factory=dict)
    communities: dict[int, set[int]] = field(default_factory=dict)

    def pair_contacts(self, x: int, y: int) -> list[ContactRecord]:
        return self.contacts.get((min(x, y), max(x, y)), [])

    def friends_of(self, node: int) -> set[int]:
        return self.friends.get(node, set())

    def communities_of(self, node: int) -> set[int]:
        return self.communities.get(node, set())


def honesty_tc(contacts: Sequence[ContactRecord]) -> float:
    j = len(contacts)
    if j == 0:
        return 0.0
    for rec in contacts:
        if rec.length <= 0:
            raise ValueError("contact lengths must be positive")
    if j == 1:
        return 1.0 if contacts[0].useful else 0.0
    tcl = sum(rec.length for rec in contacts)
    total = 0.0
    for rec in contacts:
        p = rec.length / tcl
        total += p * (-p * math.log2(p)) if p > 0.0 else 0.0
    return total / math.log2(j)


def honesty_cen(x: int, y: int, stats: HonestyStats) -> float:
    trustee_friends = stats.friends_of(y)
    if not trustee_friends:
        return 0.0
    common = stats.friends_of(x) & trustee_friends
    return len(common) / len(trustee_friends)


def honesty_coi(x: int, y: int, stats: HonestyStats) -> float:
    trustee_communities = stats.communities_of(y)
    if not trustee_communities:
        return 0.0
    common = stats.communities_of(x) & trustee_communities
    return len(common) / len(trustee_communities)


def final_honesty(tc: float, cen: float, coi: float, w: HonestyWeights) -> float:
    for value in (tc, cen, coi):
        if not (0.0 <= value <= 1.0):
            raise ValueError("honesty components must lie in [0, 1]")
    return w.alpha1 * tc + w.alpha2 * cen + w.alpha3 * coi


def penalty_coefficient(total_conversations: int, ineffective: int) -> float:
    """r * e^r for r = effective conversation share; e for a spotless record, 0 when all failed."""
    if total_conversations <= 0:
        raise ValueError("penalty needs at least one conversation")
    if not (0 <= ineffective <= total_conversations):
        raise ValueError("ineffective count must lie in [0, total]")
    r = (total_conversations - ineffective) / total_conversations
    return r * math.exp(r)


def penalty_discount(total_conversations: int, ineffective: int) -> float:
    """Penalty scaled into [0, 1]; nodes with no history are not discounted."""
    if total_conversations <= 0:
        return 1.0
    return penalty_coefficient(total_conversations, ineffective) / E_CONST


def pairwise_final_honesty(
    x: int,
    y: int,
    stats: HonestyStats,
    weights: HonestyWeights,
    trustee_conversations: tuple[int, int] = (0, 0),
) -> float:
    """Full honesty of trustee y in trustor x's eyes for one closed window."""
    tc = honesty_tc(stats.pair_contacts(x, y))
    cen = honesty_cen(x, y, stats)
    coi = honesty_coi(x, y, stats)
    raw = final_honesty(tc, cen, coi, weights)
    value = raw * penalty_discount(*trustee_conversations)
    return min(1.0, max(0.0, value))


class HonestyWindows:
    """Accumulates contacts per election window and blends windows 50/50.

    Friendship means at least one useful contact inside the window; the
    per-node conversation tallies feeding the penalty discount are cumulative
    across the whole run.
    """

    CARRY = 0.5

    def __init__(self, weights: HonestyWeights | None = None):
        self.weights = weights if weights is not None else HonestyWeights()
        self._contacts: dict[tuple[int, int], list[ContactRecord]] = {}
        self._friends: dict[int, set[int]] = {}
        self.conversations: dict[int, int] = {}
        self.ineffective: dict[int, int] = {}
        self._blended: dict[tuple[int, int], float] | None = None

    def record_contact(self, rec: ContactRecord, is_conversation: bool) -> None:
        key = (min(rec.a, rec.b), max(rec.a, rec.b))
        self._contacts.setdefault(key, []).append(rec)
        if rec.useful:
            self._friends.setdefault(rec.a, set()).add(rec.b)
            self._friends.setdefault(rec.b, set()).add(rec.a)
        if is_conversation:
            for node in (rec.a, rec.b):
                self.conversations[node] = self.conversations.get(node, 0) + 1
                if not rec.useful:
                    self.ineffective[node] = self.ineffective.get(node, 0) + 1

    def conversation_counts(self, node: int) -> tuple[int, int]:
        return self.conversations.get(node, 0), self.ineffective.get(node, 0)

    def close_window(self, members: Iterable[int],
                     communities: Mapping[int, set[int]]) -> dict[tuple[int, int], float]:
        stats = HonestyStats(
            contacts=self._contacts,
            friends=self._friends,
            communities=dict(communities),
        )
        current: dict[tuple[int, int], float] = {}
        ids = sorted(members)
        for x in ids:
            for y in ids:
                if x == y:
                    continue
                current[(x, y)] = pairwise_final_honesty(
                    x, y, stats, self.weights, self.conversation_counts(y))

        if self._blended is None:
            blended = current
        else:
            blended = {}
            for pair in set(self._blended) | set(current):
                prev = self._blended.get(pair, 0.0)
                cur = current.get(pair, 0.0)
                blended[pair] = self.CARRY * prev + (1.0 - self.CARRY) * cur

        self._blended = blended
        self._contacts = {}
        self._friends = {}
        return dict(blended)
