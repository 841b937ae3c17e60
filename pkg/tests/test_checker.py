"""Tests for the explicit-state checker."""

import dataclasses

import pytest

from agora.checker import (
    INV_AD_ABSOLUTE,
    INV_AD_RELATIVE,
    INV_BUFFERED_MARGIN,
    INV_PRICE_CAP,
    CheckerConfig,
    CheckReport,
    check_invariants,
    explore,
    guardian_transition,
    replay_trace,
    summary_lines,
)
from agora.guardian import ConstraintSet, min_safe_price, repair_action
from agora.simulator import Action, MarketState

CS = ConstraintSet()
SMALL = CheckerConfig(horizon=3)


class TestCheckInvariants:
    def test_safe_state_passes(self):
        assert check_invariants(100.0, 1000.0, 500.0, CS) == []

    def test_margin_floor(self):
        floor = min_safe_price(CS)
        assert check_invariants(floor - 0.01, 0.0, 0.0, CS) == [INV_BUFFERED_MARGIN]
        assert check_invariants(floor, 0.0, 0.0, CS) == []

    def test_price_cap(self):
        assert check_invariants(150.01, 0.0, 0.0, CS) == [INV_PRICE_CAP]
        assert check_invariants(150.0, 0.0, 0.0, CS) == []

    def test_ad_absolute(self):
        assert check_invariants(100.0, 5000.01, 5000.0, CS) == [INV_AD_ABSOLUTE]
        assert check_invariants(100.0, 5000.0, 5000.0, CS) == []

    def test_ad_relative(self):
        assert check_invariants(100.0, 1500.01, 500.0, CS) == [INV_AD_RELATIVE]
        assert check_invariants(100.0, 1500.0, 500.0, CS) == []

    def test_multiple_violations_reported(self):
        got = check_invariants(40.0, 6000.0, 0.0, CS)
        assert INV_BUFFERED_MARGIN in got
        assert INV_AD_ABSOLUTE in got
        assert INV_AD_RELATIVE in got


class TestGuardianTransition:
    def test_matches_repair_then_apply(self):
        action = Action(price_change_pct=60.0, ad_spend=5000.0)
        price, ad = guardian_transition(action, 100.0, 0.0, CS)
        safe = repair_action(
            action, MarketState(price=100.0, prev_ad_spend=0.0), CS
        ).safe_action
        assert price == pytest.approx(100.0 * (1 + safe.price_change_pct / 100))
        assert ad == safe.ad_spend

    def test_repaired_successors_always_safe(self):
        cfg = CheckerConfig()
        for pc in cfg.price_choices:
            for ad_choice in cfg.ad_choices:
                price, ad = guardian_transition(
                    Action(price_change_pct=pc, ad_spend=ad_choice), 100.0, 0.0, CS
                )
                assert check_invariants(price, ad, 0.0, CS) == []


class TestExplore:
    def test_horizon_one_counts(self):
        # [DERIVED] brute-force hand count: 4 price choices x 6 ad choices.
        report = explore(CheckerConfig(horizon=1))
        assert report.states_found == 24
        assert report.violations == []
        assert report.diameter == 1
        assert report.complete

    def test_horizon_one_distinct(self):
        # [DERIVED] from 100: repaired price moves land on {60, 100, 120, 150};
        # repaired ad from prev 0 lands on {0, 500, 1000}; 4 x 3 = 12.
        report = explore(CheckerConfig(horizon=1))
        assert report.distinct_states == 12

    def test_distinct_bounded_by_found(self):
        report = explore(SMALL)
        assert report.distinct_states <= report.states_found
        assert report.diameter <= SMALL.horizon
        assert report.violations == []

    def test_week_agnostic_mode_counts_each_pair_once(self):
        per_week = explore(SMALL)
        agnostic = explore(dataclasses.replace(SMALL, dedup_by_week=False))
        assert agnostic.distinct_states < per_week.distinct_states
        assert agnostic.states_found == per_week.states_found

    def test_deterministic(self):
        a = explore(SMALL).to_dict()
        b = explore(SMALL).to_dict()
        a.pop("wall_time")
        b.pop("wall_time")
        assert a == b

    def test_quantization_merges_nearby_prices(self):
        fine = explore(dataclasses.replace(SMALL, price_quantum=0.0001))
        coarse = explore(dataclasses.replace(SMALL, price_quantum=1.0))
        assert coarse.distinct_states <= fine.distinct_states

    def test_to_dict_shape(self):
        d = explore(CheckerConfig(horizon=1)).to_dict()
        assert set(d) == {
            "states_found",
            "distinct_states",
            "diameter",
            "violations",
            "wall_time",
            "complete",
        }

    def test_summary_lines(self):
        lines = summary_lines(explore(CheckerConfig(horizon=1)))
        joined = "\n".join(lines)
        assert "Diameter" in joined
        assert "Distinct States" in joined


def _no_floor_transition(action, price, prev_ad, cs):
    """Mutated repair pipeline with the price-floor step disabled."""
    pct = max(-cs.max_discount_pct, min(action.price_change_pct, cs.max_increase_pct))
    new_price = min(price * (1.0 + pct / 100.0), cs.max_price)
    ad = max(0.0, min(action.ad_spend, cs.ad_cap))
    ad = min(ad, prev_ad + cs.ad_increase_cap)
    return new_price, ad


class TestMutation:
    def test_disabled_floor_repair_is_caught(self):
        report = explore(SMALL, transition=_no_floor_transition)
        assert len(report.violations) >= 1
        assert any(v.invariant_id == INV_BUFFERED_MARGIN for v in report.violations)

    def test_witness_trace_replays_to_violation(self):
        report = explore(SMALL, transition=_no_floor_transition)
        witness = next(
            v for v in report.violations if v.invariant_id == INV_BUFFERED_MARGIN
        )
        assert len(witness.trace) == witness.depth
        price, ad, prev_ad = replay_trace(
            SMALL, witness.trace, transition=_no_floor_transition
        )
        assert price == pytest.approx(witness.price, abs=SMALL.price_quantum)
        assert INV_BUFFERED_MARGIN in check_invariants(price, ad, prev_ad, CS)

    def test_witnesses_sorted_shallowest_first(self):
        report = explore(SMALL, transition=_no_floor_transition)
        depths = [v.depth for v in report.violations]
        assert depths == sorted(depths)
