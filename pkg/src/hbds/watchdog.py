"""Relay monitoring: watchdog panels, direct/indirect trust, importance-weighted
verdict fusion, and the forwarding/watchdog payments that follow a verdict.

Three watchdogs observe every paid relay handoff: the sitting auxiliary head,
its predecessor, and one member picked round-robin. Each reports Coop when it
overhears the packet re-transmitted (or still held) with an intact integrity
tag inside the timeout, Self otherwise. Reports are fused by cumulative
importance weight: each watchdog's voice counts in proportion to its share of
the panel's reputation, so one heavyweight can overrule two lightweights.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .config import IncentiveConstants
from .model import Role

COOP = "Coop"
SELF = "Self"

TRUST_LAMBDA = 0.2
WEIGHT_DIRECT = 0.7
WEIGHT_INDIRECT = 0.3
INITIAL_TRUST = 0.5


def _clamp(v: float) -> float:
    return min(1.0, max(0.0, v))


@dataclass(frozen=True)
class TrustState:
    observer: int
    subject: int
    direct: float = INITIAL_TRUST
    indirect: float = INITIAL_TRUST
    combined: float = INITIAL_TRUST


def update_trust(state: TrustState, observed_forward: bool | None,
                 neighbor_combined: Sequence[float] = ()) -> TrustState:
    """Fold one observation into the trust state.

    Direct trust moves by an exponential average toward 1 on a forward and 0
    on a drop; None means nothing was observed. Indirect trust is the mean of
    the neighbours' current combined trust toward the subject, unchanged when
    nobody can be asked.
    """
    direct = state.direct
    if observed_forward is not None:
        direct = (1.0 - TRUST_LAMBDA) * direct + TRUST_LAMBDA * (1.0 if observed_forward else 0.0)
    indirect = state.indirect
    if neighbor_combined:
        indirect = sum(neighbor_combined) / len(neighbor_combined)
    direct = _clamp(direct)
    indirect = _clamp(indirect)
    combined = _clamp(WEIGHT_DIRECT * direct + WEIGHT_INDIRECT * indirect)
    return replace(state, direct=direct, indirect=indirect, combined=combined)


def trust_verdict(combined: float) -> str:
    """Above 0.5 reads cooperative; 0.5 itself stays selfish."""
    return COOP if combined > 0.5 else SELF


@dataclass(frozen=True)
class TrustReport:
    watchdog: int
    relay: int
    packet: int
    verdict: str
    round: int = 0
    basis: str = "observed"


@dataclass(frozen=True)
class WatchdogPanel:
    wn1: int
    wn2: int
    wn3: int

    @property
    def members(self) -> tuple[int, int, int]:
        return (self.wn1, self.wn2, self.wn3)


class RoundRobin:
    """Cursor over the community roster; advances one eligible member per pick."""

    def __init__(self):
        self.cursor = 0

    def pick(self, roster: Sequence[int], exclude: set[int]) -> int | None:
        n = len(roster)
        for step in range(n):
            idx = (self.cursor + step) % n
            node = roster[idx]
            if node not in exclude:
                self.cursor = (idx + 1) % n
                return node
        return None


def select_watchdogs(roster: Sequence[int], relay: int, ach: int | None,
                     prev_ach: int | None, rr: RoundRobin) -> WatchdogPanel | None:
    """Compose the three-watchdog panel for one relay handoff.

    roster must already exclude expelled nodes. Returns None when fewer than
    three candidates besides the relay exist (the relay event then goes
    unmonitored).
    """
    eligible = set(roster)
    pool = [n for n in roster if n != relay]
    if len(pool) < 3:
        return None

    exclude = {relay}
    wn1 = ach if ach is not None and ach in eligible and ach != relay else None
    if wn1 is None:
        wn1 = rr.pick(roster, exclude)
    if wn1 is None:
        return None
    exclude.add(wn1)

    wn2 = (prev_ach if prev_ach is not None and prev_ach in eligible
           and prev_ach not in exclude else None)
    if wn2 is None:
        wn2 = rr.pick(roster, exclude)
    if wn2 is None:
        return None
    exclude.add(wn2)

    wn3 = rr.pick(roster, exclude)
    if wn3 is None:
        return None
    return WatchdogPanel(wn1, wn2, wn3)


def observe_relay(
    panel: WatchdogPanel,
    packet_id: int,
    relay: int,
    *,
    retransmitted: bool,
    retransmit_tag_ok: bool = True,
    holds_packet: bool = False,
    holds_tag_ok: bool = True,
    in_range: Mapping[int, bool] | None = None,
    prior_combined: Mapping[int, float] | None = None,
    round_no: int = 0,
) -> list[TrustReport]:
    """Produce the three independent reports for one watched handoff.

    A watchdog that stayed in range reports Coop only on evidence of honest
    custody: a re-transmission with a matching tag, or the packet still held
    intact. A corrupted tag forces Self. A watchdog that lost contact before
    the timeout falls back to rounding its prior combined trust.
    """
    reports = []
    for wn in panel.members:
        present = True if in_range is None else in_range.get(wn, True)
        if not present:
            prior = INITIAL_TRUST if prior_combined is None else prior_combined.get(wn, INITIAL_TRUST)
            verdict = COOP if prior >= 0.5 else SELF
            basis = "default"
        else:
            if retransmitted and not retransmit_tag_ok:
                verdict = SELF
            elif retransmitted and retransmit_tag_ok:
                verdict = COOP
            elif holds_packet and holds_tag_ok:
                verdict = COOP
            else:
                verdict = SELF
            basis = "observed"
        reports.append(TrustReport(wn, relay, packet_id, verdict, round_no, basis))
    return reports


def importance_aspect(r1: float, r2: float, r3: float) -> tuple[float, float, float]:
    """Reputation shares of the three watchdogs; uniform when nothing positive exists."""
    floored = (max(0.0, r1), max(0.0, r2), max(0.0, r3))
    total = sum(floored)
    if total == 0.0:
        return (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    return tuple(v / total for v in floored)


def cia_aggregate(reports: Sequence[TrustReport], ias: Sequence[float]) -> str:
    """Importance-weighted majority over the three verdicts; exact ties read Self."""
    if len(reports) != 3 or len(ias) != 3:
        raise ValueError("cumulative importance fusion needs exactly 3 reports and weights")
    coop_mass = sum(ia for rep, ia in zip(reports, ias) if rep.verdict == COOP)
    self_mass = sum(ia for rep, ia in zip(reports, ias) if rep.verdict == SELF)
    return COOP if coop_mass > self_mass else SELF


def settle_forwarding(relay_role: Role, verdict: str,
                      constants: IncentiveConstants) -> tuple[float, bool] | None:
    """Reputation delta and strike flag for the relay; None when it earns no payment.

    Community heads and infrastructure gateways store and forward but are not
    paid relays, so their custody settles to nothing.
    """
    if relay_role in (Role.CH, Role.GW):
        return None
    if verdict == COOP:
        return constants.f_pay, False
    return -constants.f_pay, True


def settle_watchdogs(reports: Sequence[TrustReport], final_verdict: str,
                     constants: IncentiveConstants) -> dict[int, float]:
    """Each watchdog gains wn_pay when its report matches the verdict, loses it otherwise."""
    return {
        rep.watchdog: constants.wn_pay if rep.verdict == final_verdict else -constants.wn_pay
        for rep in reports
    }
