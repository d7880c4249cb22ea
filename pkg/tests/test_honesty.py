import math

import pytest
from hypothesis import given, strategies as st

from hbds.honesty import (HonestyStats, HonestyWeights, HonestyWindows,
                          final_honesty, honesty_cen, honesty_coi, honesty_tc,
                          pairwise_final_honesty, penalty_coefficient,
                          penalty_discount, random_weights)
from hbds.model import ContactRecord
from hbds.rng import RandomStream


def contact(length, useful=True, a=1, b=2, start=0.0):
    return ContactRecord(a, b, start, length, useful)


def tc_oracle(lengths):
    # independent evaluation of the entropy-share formula
    tcl = sum(lengths)
    total = sum((l / tcl) * (-(l / tcl) * math.log2(l / tcl)) for l in lengths)
    return total / math.log2(len(lengths))


class TestContactScore:
    def test_empty_is_zero(self):
        assert honesty_tc([]) == 0.0

    def test_single_contact_uses_usefulness(self):
        assert honesty_tc([contact(10.0, useful=True)]) == 1.0
        assert honesty_tc([contact(10.0, useful=False)]) == 0.0

    def test_two_equal_useful_contacts(self):
        assert honesty_tc([contact(10.0), contact(10.0)]) == pytest.approx(0.5, abs=1e-12)

    def test_four_equal_contacts(self):
        assert honesty_tc([contact(5.0)] * 4) == pytest.approx(0.25, abs=1e-12)

    def test_unequal_lengths_match_oracle(self):
        assert honesty_tc([contact(3.0), contact(7.0)]) == pytest.approx(
            0.40846775816154013, abs=1e-12)

    def test_scale_invariance(self):
        a = honesty_tc([contact(3.0), contact(7.0)])
        b = honesty_tc([contact(30.0), contact(70.0)])
        assert a == pytest.approx(b, abs=1e-12)

    def test_rejects_nonpositive_length(self):
        bad = ContactRecord.__new__(ContactRecord)
        object.__setattr__(bad, "a", 1)
        object.__setattr__(bad, "b", 2)
        object.__setattr__(bad, "start", 0.0)
        object.__setattr__(bad, "length", 0.0)
        object.__setattr__(bad, "useful", True)
        with pytest.raises(ValueError):
            honesty_tc([bad, contact(5.0)])

    @given(st.lists(st.floats(0.1, 1e4), min_size=2, max_size=12))
    def test_stays_in_unit_interval(self, lengths):
        value = honesty_tc([contact(l) for l in lengths])
        assert 0.0 <= value <= 1.0

    @given(st.integers(2, 40), st.floats(0.5, 500.0))
    def test_equal_contacts_depend_only_on_count(self, j, length):
        value = honesty_tc([contact(length)] * j)
        assert value == pytest.approx(tc_oracle([length] * j), abs=1e-12)


class TestCentrality:
    def test_disjoint_friends(self):
        stats = HonestyStats(friends={1: {3, 4}, 2: {5, 6}})
        assert honesty_cen(1, 2, stats) == 0.0

    def test_trustee_subset_of_trustor(self):
        stats = HonestyStats(friends={1: {3, 4, 5}, 2: {3, 4}})
        assert honesty_cen(1, 2, stats) == 1.0

    def test_half_overlap(self):
        stats = HonestyStats(friends={1: {3, 4, 9}, 2: {3, 4, 5, 6}})
        assert honesty_cen(1, 2, stats) == pytest.approx(0.5)

    def test_empty_trustee_friends(self):
        stats = HonestyStats(friends={1: {3}})
        assert honesty_cen(1, 2, stats) == 0.0

    def test_relabeling_duplicates_keeps_ratio(self):
        stats = HonestyStats(friends={1: {3, 4}, 2: {3, 4, 5, 6}})
        doubled = HonestyStats(friends={
            1: {3, 4, 103, 104},
            2: {3, 4, 5, 6, 103, 104, 105, 106},
        })
        assert honesty_cen(1, 2, stats) == honesty_cen(1, 2, doubled)


class TestCommunityOverlap:
    def test_trustee_in_no_community(self):
        stats = HonestyStats(communities={1: {0}})
        assert honesty_coi(1, 2, stats) == 0.0

    def test_same_single_community(self):
        stats = HonestyStats(communities={1: {0}, 2: {0}})
        assert honesty_coi(1, 2, stats) == 1.0

    def test_one_of_three(self):
        stats = HonestyStats(communities={1: {0}, 2: {0, 1, 2}})
        assert honesty_coi(1, 2, stats) == pytest.approx(1.0 / 3.0)

    def test_relabeled_duplicates_keep_ratio(self):
        stats = HonestyStats(communities={1: {0}, 2: {0, 1, 2}})
        doubled = HonestyStats(communities={1: {0, 10}, 2: {0, 1, 2, 10, 11, 12}})
        assert honesty_coi(1, 2, stats) == honesty_coi(1, 2, doubled)


class TestFinalHonesty:
    def test_all_ones(self):
        assert final_honesty(1.0, 1.0, 1.0, HonestyWeights()) == pytest.approx(1.0)
        assert final_honesty(1.0, 1.0, 1.0, HonestyWeights(0.2, 0.5, 0.3)) == pytest.approx(1.0)

    def test_all_zeros(self):
        assert final_honesty(0.0, 0.0, 0.0, HonestyWeights()) == 0.0

    def test_equal_weights_example(self):
        value = final_honesty(0.6, 0.3, 0.9, HonestyWeights())
        assert value == pytest.approx(0.6, abs=1e-12)

    def test_weight_sum_enforced(self):
        with pytest.raises(ValueError):
            HonestyWeights(0.5, 0.5, 0.5)

    def test_component_range_enforced(self):
        with pytest.raises(ValueError):
            final_honesty(1.2, 0.0, 0.0, HonestyWeights())

    def test_monotone_in_each_component(self):
        w = HonestyWeights(0.5, 0.3, 0.2)
        grid = [i / 10 for i in range(11)]
        for fixed in (0.0, 0.4, 1.0):
            series = [final_honesty(v, fixed, fixed, w) for v in grid]
            assert all(a <= b + 1e-12 for a, b in zip(series, series[1:]))
            series = [final_honesty(fixed, v, fixed, w) for v in grid]
            assert all(a <= b + 1e-12 for a, b in zip(series, series[1:]))
            series = [final_honesty(fixed, fixed, v, w) for v in grid]
            assert all(a <= b + 1e-12 for a, b in zip(series, series[1:]))

    def test_random_weights_sum_to_one(self):
        stream = RandomStream(99)
        for _ in range(50):
            w = random_weights(stream)
            assert abs(w.alpha1 + w.alpha2 + w.alpha3 - 1.0) <= 1e-9


class TestPenalty:
    def test_spotless_record_gives_e(self):
        for c in (1, 4, 100):
            assert penalty_coefficient(c, 0) == pytest.approx(math.e, abs=1e-12)

    def test_all_ineffective_gives_zero(self):
        for c in (1, 4, 100):
            assert penalty_coefficient(c, c) == 0.0

    def test_half_ineffective(self):
        assert penalty_coefficient(4, 2) == pytest.approx(0.8243606353500641, abs=1e-12)

    def test_rejects_zero_conversations(self):
        with pytest.raises(ValueError):
            penalty_coefficient(0, 0)

    def test_rejects_excess_ineffective(self):
        with pytest.raises(ValueError):
            penalty_coefficient(3, 4)

    def test_strictly_increasing_in_effective_share(self):
        values = [penalty_coefficient(100, 100 - k) for k in range(101)]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_discount_bounds(self):
        assert penalty_discount(0, 0) == 1.0
        assert penalty_discount(5, 0) == pytest.approx(1.0)
        assert penalty_discount(5, 5) == 0.0


class TestPairwise:
    def test_brand_new_pair_scores_zero(self):
        stats = HonestyStats()
        assert pairwise_final_honesty(1, 2, stats, HonestyWeights()) == 0.0

    def test_no_history_means_no_discount(self):
        stats = HonestyStats(
            contacts={(1, 2): [contact(10.0), contact(10.0)]},
            friends={1: {3, 4}, 2: {3, 4}},
            communities={1: {0}, 2: {0}},
        )
        w = HonestyWeights()
        expected = final_honesty(0.5, 1.0, 1.0, w)
        assert pairwise_final_honesty(1, 2, stats, w) == pytest.approx(expected)

    def test_fully_ineffective_history_zeroes_score(self):
        stats = HonestyStats(
            contacts={(1, 2): [contact(10.0), contact(10.0)]},
            friends={1: {3}, 2: {3}},
            communities={1: {0}, 2: {0}},
        )
        value = pairwise_final_honesty(1, 2, stats, HonestyWeights(),
                                       trustee_conversations=(6, 6))
        assert value == 0.0

    @given(st.integers(1, 20), st.integers(0, 20))
    def test_output_in_unit_interval(self, c, u):
        if u > c:
            return
        stats = HonestyStats(
            contacts={(1, 2): [contact(4.0), contact(9.0), contact(2.0)]},
            friends={1: {3, 4, 5}, 2: {4, 5}},
            communities={1: {0, 1}, 2: {0}},
        )
        value = pairwise_final_honesty(1, 2, stats, HonestyWeights(), (c, u))
        assert 0.0 <= value <= 1.0


class TestWindows:
    def test_first_window_uses_current_values(self):
        win = HonestyWindows()
        win.record_contact(contact(10.0, a=1, b=2), is_conversation=True)
        win.record_contact(contact(10.0, a=1, b=2), is_conversation=True)
        matrix = win.close_window([1, 2], {1: {0}, 2: {0}})
        # the pair are each other's only friends, so the common-friends term is 0
        expected = final_honesty(0.5, 0.0, 1.0, HonestyWindows().weights)
        assert matrix[(1, 2)] == pytest.approx(expected)

    def test_blend_halves_previous_on_idle_window(self):
        win = HonestyWindows()
        win.record_contact(contact(10.0, a=1, b=2), is_conversation=True)
        win.record_contact(contact(10.0, a=1, b=2), is_conversation=True)
        first = win.close_window([1, 2], {1: {0}, 2: {0}})[(1, 2)]
        # next window has no contacts: only the community term remains
        second = win.close_window([1, 2], {1: {0}, 2: {0}})[(1, 2)]
        idle_current = final_honesty(0.0, 0.0, 1.0, win.weights)
        assert second == pytest.approx(0.5 * first + 0.5 * idle_current)

    def test_conversation_counts_accumulate_across_windows(self):
        win = HonestyWindows()
        win.record_contact(contact(5.0, useful=False, a=1, b=2), is_conversation=True)
        win.close_window([1, 2], {})
        win.record_contact(contact(5.0, useful=True, a=1, b=2), is_conversation=True)
        win.close_window([1, 2], {})
        assert win.conversation_counts(1) == (2, 1)
        assert win.conversation_counts(2) == (2, 1)

    def test_idle_contacts_are_not_conversations(self):
        win = HonestyWindows()
        win.record_contact(contact(5.0, useful=False, a=1, b=2), is_conversation=False)
        assert win.conversation_counts(1) == (0, 0)
