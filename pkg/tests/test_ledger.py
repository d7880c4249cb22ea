import pytest

from hbds.config import IncentiveConstants
from hbds.ledger import (CommunityLedger, apply_settlement, audit_trace,
                         carry_forward, escalate_penalty, readmit)
from hbds.model import BehaviorKind, BehaviorProfile, NodeState, Role

C = IncentiveConstants(fb=10.0, f_pay=1.0, wn_pay=0.1)


def selfish_state(node, strikes=0):
    return NodeState(node, Role.MEMBER, 0.0,
                     BehaviorProfile(BehaviorKind.SELFISH, 0.9), 0, strikes)


class TestApplySettlement:
    def test_empty_deltas_noop(self):
        ledger = CommunityLedger()
        ledger.register(1)
        before = ledger.snapshot()
        apply_settlement(ledger, {})
        assert ledger.snapshot() == before

    def test_known_node_delta(self):
        ledger = CommunityLedger()
        ledger.register(1)
        apply_settlement(ledger, {1: 1.0})
        assert ledger.reputation(1) == 1.0

    def test_unknown_node_autoregisters_at_zero(self):
        ledger = CommunityLedger()
        apply_settlement(ledger, {9: 2.5})
        assert ledger.reputation(9) == 2.5
        assert 9 in ledger.entries


class TestCarryForward:
    def test_moving_node_keeps_reputation(self):
        a, b = CommunityLedger(community=0), CommunityLedger(community=1)
        a.register(5).reputation = 7.0
        directory = {0: a, 1: b}
        assert carry_forward(directory, 5, 0, 1) == 7.0
        assert b.reputation(5) == 7.0

    def test_unknown_node_starts_at_zero(self):
        directory = {0: CommunityLedger(0), 1: CommunityLedger(1)}
        assert carry_forward(directory, 42, 0, 1) == 0.0

    def test_three_community_gossip(self):
        # node known only in community c; still seeds when joining b from a
        a, b, c = CommunityLedger(0), CommunityLedger(1), CommunityLedger(2)
        c.register(5).reputation = 3.5
        directory = {0: a, 1: b, 2: c}
        assert carry_forward(directory, 5, 0, 1) == 3.5
        assert b.reputation(5) == 3.5


class TestEscalation:
    def test_first_strike_costs_nothing_extra(self):
        ledger = CommunityLedger()
        state = selfish_state(3, strikes=1)
        action, extra = escalate_penalty(state, ledger, C, now=100.0, expel_duration=600.0)
        assert (action, extra) == ("withheld", 0.0)

    def test_second_strike_additional_penalty(self):
        ledger = CommunityLedger()
        state = selfish_state(3, strikes=2)
        action, extra = escalate_penalty(state, ledger, C, now=100.0, expel_duration=600.0)
        assert (action, extra) == ("penalized", -1.0)

    def test_third_strike_expels_with_debt(self):
        ledger = CommunityLedger()
        ledger.register(3).reputation = -2.0
        state = selfish_state(3, strikes=3)
        action, extra = escalate_penalty(state, ledger, C, now=100.0, expel_duration=600.0)
        assert action == "expelled" and extra == 0.0
        assert state.role is Role.EXPELLED
        record = ledger.expelled[3]
        assert record.expiry == 700.0
        assert record.debt == 2.0

    def test_three_strike_sequence_hand_trace(self):
        # strikes arrive one by one; reputation already carries the -f_pay per
        # selfish verdict applied by the forwarding settlement
        ledger = CommunityLedger()
        state = selfish_state(7)
        rep = 0.0
        for strike in (1, 2, 3):
            rep -= C.f_pay              # forwarding settlement
            state.strike_count = strike
            apply_settlement(ledger, {7: -C.f_pay})
            action, extra = escalate_penalty(state, ledger, C, 50.0 * strike, 600.0)
            if extra:
                apply_settlement(ledger, {7: extra})
                rep += extra
        assert action == "expelled"
        assert ledger.reputation(7) == pytest.approx(-4.0)
        assert ledger.expelled[7].debt == pytest.approx(4.0)


class TestReadmission:
    def make_expelled(self, rep, debt, expiry=700.0):
        ledger = CommunityLedger()
        ledger.register(3).reputation = rep
        state = selfish_state(3, strikes=3)
        escalate_penalty(state, ledger, C, now=expiry - 600.0, expel_duration=600.0)
        assert ledger.expelled[3].debt == debt
        return ledger, state

    def test_full_payment_after_expiry(self):
        ledger, state = self.make_expelled(-2.0, 2.0)
        assert readmit(ledger, state, payment=2.0, now=700.0)
        assert ledger.reputation(3) == 0.0
        assert state.role is Role.MEMBER and state.strike_count == 0
        assert 3 not in ledger.expelled

    def test_insufficient_payment_stays_expelled(self):
        ledger, state = self.make_expelled(-2.0, 2.0)
        assert not readmit(ledger, state, payment=1.0, now=700.0)
        assert state.role is Role.EXPELLED

    def test_before_expiry_stays_expelled(self):
        ledger, state = self.make_expelled(-2.0, 2.0)
        assert not readmit(ledger, state, payment=2.0, now=699.0)

    def test_zero_debt_readmits_on_expiry_alone(self):
        ledger, state = self.make_expelled(1.5, 0.0)
        assert readmit(ledger, state, payment=0.0, now=700.0)
        assert ledger.reputation(3) == 0.0


class TestAudit:
    def test_matching_trace_passes(self):
        lines = [
            "t=10.0 kind=rep_delta node=1 amount=2.5 reason=election_pay",
            "t=20.0 kind=rep_delta node=1 amount=-0.5 reason=election_cost",
            "t=30.0 kind=rep_delta node=2 amount=1.0 reason=fwd_pay",
            "t=99.0 kind=ledger node=1 rep=2.0 strikes=0 role=Member",
            "t=99.0 kind=ledger node=2 rep=1.0 strikes=0 role=Member",
        ]
        report = audit_trace(lines)
        assert report.ok
        assert report.category_totals == {"election_pay": 2.5, "election_cost": -0.5,
                                          "fwd_pay": 1.0}

    def test_mismatch_detected(self):
        lines = [
            "t=10.0 kind=rep_delta node=1 amount=2.5 reason=election_pay",
            "t=99.0 kind=ledger node=1 rep=2.0 strikes=0 role=Member",
        ]
        report = audit_trace(lines)
        assert not report.ok
        assert report.max_node_diff == pytest.approx(0.5)

    def test_tolerance_respected(self):
        lines = [
            "t=10.0 kind=rep_delta node=1 amount=1.0000000001 reason=fwd_pay",
            "t=99.0 kind=ledger node=1 rep=1.0 strikes=0 role=Member",
        ]
        assert audit_trace(lines, tolerance=1e-6).ok
