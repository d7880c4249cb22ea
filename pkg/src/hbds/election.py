"""Periodic democratic process: nomination by honesty, voting, head election,
and the VCG-style payment/cost settlement broadcast to the community.

Votes come from each voter's own pairwise honesty view, so a candidate cannot
manufacture them. The per-candidate honesty scalar that feeds the payment
formulas is the community aggregate (mean of everyone's view); the payment for
candidate x is its vote count times the fixed budget times beta_x, where
beta_x folds in the welfare externality of removing x from the race and
re-casting the ballots. That construction is what makes self-inflating the
broadcast honesty worthless: the candidate's own scalar cancels out of its
payment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .config import IncentiveConstants

FhLookup = Callable[[int, int], float]


@dataclass(frozen=True)
class Ballot:
    voter: int
    candidate: int
    round: int = 0


@dataclass
class ElectionRecord:
    round: int
    community: int
    candidates: list[tuple[int, float]]          # (node, aggregate honesty), rank order
    ballots: list[Ballot]
    heads: tuple[int, int, int]                  # (ch, ach, ih)
    votes: dict[int, int]
    betas: dict[int, float]
    payments: dict[int, float]                   # candidates and voters
    costs: dict[int, float]
    deltas: dict[int, float] = field(default_factory=dict)


def matrix_lookup(matrix: Mapping[tuple[int, int], float]) -> FhLookup:
    return lambda x, y: matrix.get((x, y), 0.0)


def aggregate_scores(eligible: Sequence[int], fh: FhLookup) -> dict[int, float]:
    """Each node's candidate score: mean honesty over all other evaluators."""
    ids = sorted(eligible)
    if len(ids) < 2:
        return {n: 0.0 for n in ids}
    return {
        y: sum(fh(x, y) for x in ids if x != y) / (len(ids) - 1)
        for y in ids
    }


def nominate(eligible: Sequence[int], fh: FhLookup) -> list[tuple[int, float]] | None:
    """Top ceil(sqrt(n)) scorers (at least 3) stand; None if the community is too small."""
    ids = sorted(set(eligible))
    if len(ids) < 3:
        return None
    scores = aggregate_scores(ids, fh)
    k = max(3, math.ceil(math.sqrt(len(ids))))
    ranked = sorted(ids, key=lambda n: (-scores[n], n))
    return [(n, scores[n]) for n in ranked[:k]]


def cast_votes(candidates: Sequence[int], voters: Sequence[int], fh: FhLookup,
               round_no: int = 0) -> list[Ballot]:
    """Every voter backs the candidate it rates highest; ties go to the lower id."""
    if not candidates:
        raise ValueError("cannot vote with no candidates")
    cands = sorted(candidates)
    ballots = []
    for voter in sorted(voters):
        best = min(cands, key=lambda c: (-fh(voter, c), c))
        ballots.append(Ballot(voter, best, round_no))
    return ballots


def tally(ballots: Sequence[Ballot], candidates: Sequence[int]) -> dict[int, int]:
    votes = {c: 0 for c in candidates}
    for ballot in ballots:
        votes[ballot.candidate] += 1
    return votes


def elect_heads(ballots: Sequence[Ballot],
                candidates: Sequence[tuple[int, float]]) -> tuple[int, int, int] | None:
    """Top three by votes; ties broken by higher aggregate honesty, then lower id."""
    if len(candidates) < 3:
        return None
    score = dict(candidates)
    votes = tally(ballots, [n for n, _ in candidates])
    ranked = sorted(votes, key=lambda n: (-votes[n], -score[n], n))
    return ranked[0], ranked[1], ranked[2]


def compute_beta(x: int, candidate_fh: Mapping[int, float], ballots: Sequence[Ballot],
                 voters: Sequence[int], fh: FhLookup) -> float:
    """Per-vote-normalized externality payment rate for candidate x.

    beta_x = FH_x + (W_without_x - W_with_everyone) / V_x, where W terms are
    honesty-weighted vote welfare and the ballots are re-cast with x struck
    from the candidate list. A candidate nobody voted for keeps beta = FH_x.
    """
    candidates = sorted(candidate_fh)
    votes = tally(ballots, candidates)
    v_x = votes[x]
    if v_x == 0:
        return candidate_fh[x]

    w_full = sum(candidate_fh[y] * votes[y] for y in candidates)

    remaining = [c for c in candidates if c != x]
    recast = cast_votes(remaining, voters, fh)
    votes_minus = tally(recast, remaining)
    w_minus = sum(candidate_fh[y] * votes_minus[y] for y in remaining)

    return candidate_fh[x] + (w_minus - w_full) / v_x


def compute_pay(votes_x: int, constants: IncentiveConstants, beta_x: float) -> float:
    return votes_x * constants.fb * beta_x


def compute_cost(fh_top: float, fh_second: float, votes_x: int,
                 constants: IncentiveConstants, beta_x: float) -> float:
    """Cost charged to the winning head, proportional to the top-two honesty gap.

    The raw gap term is negative for the winner; the magnitude is what gets
    deducted so a wider lead never turns into extra reward.
    """
    if fh_top <= 0.0:
        raise ValueError("elected head honesty must be positive")
    return abs((1.0 / fh_top) * (fh_second - fh_top) * votes_x * constants.fb * beta_x)


def run_election(
    round_no: int,
    community: int,
    eligible: Sequence[int],
    fh: FhLookup,
    constants: IncentiveConstants,
) -> ElectionRecord | None:
    """Execute one full democratic round; None when the community is too small."""
    ranked = nominate(eligible, fh)
    if ranked is None:
        return None

    all_scores = aggregate_scores(sorted(set(eligible)), fh)
    candidate_ids = [n for n, _ in ranked]
    voters = sorted(set(eligible) - set(candidate_ids))
    ballots = cast_votes(candidate_ids, voters, fh, round_no)
    heads = elect_heads(ballots, ranked)
    if heads is None:
        return None

    votes = tally(ballots, candidate_ids)
    candidate_fh = {n: s for n, s in ranked}
    betas = {n: compute_beta(n, candidate_fh, ballots, voters, fh) for n in candidate_ids}
    payments = {n: compute_pay(votes[n], constants, betas[n]) for n in candidate_ids}

    by_score = sorted(candidate_fh.values(), reverse=True)
    fh_top, fh_second = by_score[0], by_score[1]
    ch = heads[0]
    costs = {ch: 0.0}
    if fh_top > 0.0:
        costs[ch] = compute_cost(fh_top, fh_second, votes[ch], constants, betas[ch])

    # participation reward for pure voters, proportional to their own honesty
    for voter in voters:
        payments[voter] = constants.fb * all_scores[voter]

    deltas = {}
    for node, pay in payments.items():
        deltas[node] = deltas.get(node, 0.0) + pay
    deltas[ch] = deltas.get(ch, 0.0) - costs[ch]

    return ElectionRecord(
        round=round_no,
        community=community,
        candidates=ranked,
        ballots=ballots,
        heads=heads,
        votes=votes,
        betas=betas,
        payments=payments,
        costs=costs,
        deltas=deltas,
    )
