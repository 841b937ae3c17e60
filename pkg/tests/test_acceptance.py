"""Acceptance gate: one test per primary criterion, at stated tolerances.

Each test prints a single PASS line on success; a failure reads as the
criterion name in the pytest report. The whole suite runs offline with
scripted strategists and no model endpoint configured.
"""

import filecmp
import math
import time

import numpy as np
import pytest

import agora.causal as cz
import agora.guardian as gd
import agora.simulator as sm
from agora.agents import FULL_STACK, LLM_GUARDIAN, LLM_ONLY, MARGIN, VOLUME
from agora.bench import (
    TABLE2_COLUMNS,
    BenchConfig,
    compute_metrics,
    fit_bench_engine,
    run_cell,
    run_matrix,
    run_trust_sweep,
)
from agora.checker import (
    INV_BUFFERED_MARGIN,
    CheckerConfig,
    check_invariants,
    explore,
    replay_trace,
)
from test_bench import make_log
from test_causal import TRUE_PRICE_EFFECT, synthetic_dataset
from test_checker import _no_floor_transition

CS = gd.ConstraintSet()


def _report(line: str) -> None:
    print(f"[PASS] {line}")


@pytest.fixture(scope="module")
def bench_engine():
    return fit_bench_engine(BenchConfig())


class TestGuardianVerification:
    def test_full_lattice_horizon_52_is_safe(self):
        start = time.monotonic()
        report = explore(CheckerConfig())
        elapsed = time.monotonic() - start
        assert report.complete
        assert report.violations == [], report.violations
        assert elapsed <= 15 * 60, f"verification took {elapsed:.0f}s"
        _report(
            "guardian verification: 0 violations over "
            f"{report.states_found:,} transitions in {elapsed:.0f}s (budget 900s)"
        )

    def test_floor_mutation_is_caught_with_replayable_trace(self):
        cfg = CheckerConfig(horizon=3)
        report = explore(cfg, transition=_no_floor_transition)
        assert len(report.violations) >= 1
        witness = next(
            v for v in report.violations if v.invariant_id == INV_BUFFERED_MARGIN
        )
        price, ad, prev_ad = replay_trace(cfg, witness.trace, transition=_no_floor_transition)
        assert INV_BUFFERED_MARGIN in check_invariants(price, ad, prev_ad, CS)
        _report("floor-repair mutation caught with a replayable witness trace")


class TestRepairSoundness:
    def test_100k_randomized_pairs(self):
        # Soundness holds wherever a feasible action exists: the price
        # corridor where the clipped change window can still reach the
        # floor and stay under the cap.
        lo = gd.min_safe_price(CS) / (1.0 + CS.max_increase_pct / 100.0)
        hi = CS.max_price / (1.0 - CS.max_discount_pct / 100.0)
        rng = np.random.default_rng(2024)
        failures = 0
        for _ in range(100_000):
            state = sm.MarketState(
                week=int(rng.integers(0, 52)),
                price=float(rng.uniform(lo, hi)),
                trust=float(rng.uniform(0.4, 1.0)),
                prev_ad_spend=float(rng.uniform(0.0, CS.ad_cap)),
            )
            action = sm.Action(
                price_change_pct=float(rng.uniform(-80.0, 80.0)),
                ad_spend=float(rng.uniform(-2000.0, 8000.0)),
            )
            repair = gd.repair_action(action, state, CS)
            safe = repair.safe_action
            if not gd.validate_action(safe, state, CS).is_valid:
                failures += 1
                continue
            if gd.repair_action(safe, state, CS).safe_action != safe:
                failures += 1
        assert failures == 0
        _report("repair soundness + idempotence: 0 failures over 100,000 pairs")


class TestMarginFloor:
    def test_min_safe_price_blocks_below_59(self):
        floor = gd.min_safe_price(CS)
        assert floor == pytest.approx(59.0, abs=0.5)
        verdict = gd.validate_action(
            sm.Action(price_change_pct=-2.0), sm.MarketState(price=floor + 0.5), CS
        )
        assert not verdict.is_valid
        _report(f"margin floor: min safe price {floor:.2f} = 59 +/- 0.5")


class TestSimulatorProperties:
    def test_trust_containment_10k_steps(self):
        cfg = sm.SimConfig()
        rng = np.random.default_rng(5)
        state = sm.MarketState(price=100.0)
        for _ in range(10_000):
            action = sm.Action(
                price_change_pct=float(rng.uniform(-40.0, 50.0)),
                ad_spend=float(rng.uniform(0.0, 5000.0)),
            )
            trust = sm.trust_update(state, action, cfg)
            assert 0.4 <= trust <= 1.0
            state = sm.MarketState(
                price=min(150.0, max(60.0, state.price * (1 + action.price_change_pct / 100))),
                trust=trust,
                prev_ad_spend=action.ad_spend,
            )
        _report("trust containment in [0.4, 1.0] over 10,000 random steps")

    def test_demand_monotonicity_grid(self):
        cfg = sm.SimConfig()
        prices = np.linspace(60.0, 150.0, 12)
        trusts = np.linspace(0.4, 1.0, 8)
        ads = np.linspace(0.0, 5000.0, 8)
        for t in trusts:
            for a in ads:
                d = [sm.demand(p, t, a, 0, cfg) for p in prices]
                assert all(x > y for x, y in zip(d, d[1:]))  # falls with price
        for p in prices:
            for a in ads:
                d = [sm.demand(p, t, a, 0, cfg) for t in trusts]
                assert all(x < y for x, y in zip(d, d[1:]))  # rises with trust
        for p in prices:
            for t in trusts:
                d = [sm.demand(p, t, a, 0, cfg) for a in ads]
                assert all(x < y for x, y in zip(d, d[1:]))  # rises with ad spend
        _report("demand monotonicity: grid checks in price, trust, and ad spend")

    def test_season_period_and_amplitude(self):
        cfg = sm.SimConfig()
        for week in range(0, 208):
            assert sm.season_factor(week, cfg) == pytest.approx(
                sm.season_factor(week + 52, cfg), abs=1e-9
            )
        factors = [sm.season_factor(w, cfg) for w in range(52)]
        assert max(factors) == pytest.approx(1.2, abs=1e-9)
        assert min(factors) == pytest.approx(0.8, abs=1e-9)
        _report("seasonality: period 52, amplitude 0.2 +/- 1e-9")

    def test_profit_identity(self):
        cfg = sm.SimConfig()
        rng = np.random.default_rng(17)
        for _ in range(2_000):
            price = float(rng.uniform(60.0, 150.0))
            qty = float(rng.uniform(0.0, 5000.0))
            ad = float(rng.uniform(0.0, 5000.0))
            oracle = (price - 50.0) * qty - 3000.0 - ad
            assert sm.profit(price, qty, ad, cfg) == pytest.approx(oracle, rel=1e-9)
        _report("profit identity vs closed-form oracle at 1e-9 relative tolerance")


class TestMetricsOracle:
    def test_sharpe_and_failure_rate(self):
        sharpe = compute_metrics(
            make_log([36_308.0 - 5_875.0, 36_308.0 + 5_875.0])
        ).sharpe
        assert round(sharpe, 2) == 6.18
        failure = compute_metrics(make_log([-1.0] * 5 + [1.0] * 47)).failure_rate_pct
        assert failure == 5 / 52 * 100.0
        assert failure == pytest.approx(9.6, abs=0.02)
        _report("metrics oracle: sharpe 6.18 from 36,308/5,875; failure rate 9.6% from 5/52")


class TestCausalRecovery:
    def test_dml_beats_naive_within_budget(self):
        start = time.monotonic()
        data = synthetic_dataset()
        engine = cz.fit(
            data, cz.EngineConfig(n_trees=50, min_leaf=20, min_observations=100, seed=7)
        )
        centroid = np.array([o.features() for o in data]).mean(axis=0)
        dml, _, _, _ = engine.effect(centroid, (1.0, 0.0))
        elapsed = time.monotonic() - start
        assert dml == pytest.approx(TRUE_PRICE_EFFECT, abs=0.3)

        pct = np.array([o.price_change_pct for o in data])
        profit = np.array([o.profit_outcome for o in data])
        naive = np.polyfit(pct, profit, 1)[0]
        assert abs(naive - TRUE_PRICE_EFFECT) >= 2.0 * abs(dml - TRUE_PRICE_EFFECT)
        assert elapsed <= 120.0, f"recovery took {elapsed:.0f}s"
        _report(
            f"causal recovery: DML {dml:.3f} vs true 3 (+/-0.3); naive {naive:.3f} "
            f"at least 2x more biased; {elapsed:.0f}s (budget 120s)"
        )


class TestCounterfactualFidelity:
    def test_plus_10_pct_delta_over_100_states(self, bench_engine):
        cfg = sm.SimConfig()  # noise_sigma = 0
        rng = np.random.default_rng(7)
        states = []
        while len(states) < 100:
            sim = sm.Simulator(cfg, seed=int(rng.integers(1_000_000)))
            for _ in range(int(rng.integers(3, 30))):
                raw = sm.Action(float(rng.uniform(-40, 50)), float(rng.uniform(0, 5000)))
                sim.step(gd.repair_action(raw, sim.state, CS).safe_action)
            states.append(sim.state)
        preds, trues = [], []
        for st in states:
            _, plus = sm.step(st, sm.Action(10.0, st.prev_ad_spend), cfg)
            _, ref = sm.step(st, sm.Action(0.0, st.prev_ad_spend), cfg)
            trues.append(plus.profit - ref.profit)
            preds.append(
                cz.estimate_profit_impact(10.0, st.prev_ad_spend, st, bench_engine).profit_change
            )
        mean_pred, mean_true = float(np.mean(preds)), float(np.mean(trues))
        rel_err = abs(mean_pred - mean_true) / abs(mean_true)
        assert rel_err <= 0.20, f"relative error {rel_err:.3f}"
        _report(
            f"counterfactual fidelity: +10% move, predicted {mean_pred:.0f} vs "
            f"true {mean_true:.0f} over 100 states ({rel_err:.1%} error, tol 20%)"
        )


@pytest.fixture(scope="module")
def cells(bench_engine):
    cfg = BenchConfig()
    out = {}
    for bias in (VOLUME, MARGIN):
        for arch in (LLM_ONLY, LLM_GUARDIAN, FULL_STACK):
            out[(arch, bias)] = run_cell(arch, bias, cfg, engine=bench_engine)
    return out


class TestArchitectureOrdering:
    def test_profit_ordering_both_biases(self, cells):
        for bias in (VOLUME, MARGIN):
            totals = {
                arch: cells[(arch, bias)][1].total_profit
                for arch in (LLM_ONLY, LLM_GUARDIAN, FULL_STACK)
            }
            assert totals[FULL_STACK] >= totals[LLM_GUARDIAN] >= totals[LLM_ONLY]
        _report("architecture ordering: full stack >= guardian >= raw under both biases")

    def test_negative_weeks(self, cells):
        raw_neg = sum(1 for w in cells[(LLM_ONLY, VOLUME)][0].weeks if w.profit < 0)
        full_neg = sum(1 for w in cells[(FULL_STACK, VOLUME)][0].weeks if w.profit < 0)
        assert raw_neg >= 1
        assert full_neg == 0
        _report(f"negative weeks under volume bias: raw {raw_neg}, full stack 0")

    def test_guardian_equipped_zero_violations(self, cells):
        for arch in (LLM_GUARDIAN, FULL_STACK):
            for bias in (VOLUME, MARGIN):
                assert cells[(arch, bias)][1].violation_rate_pct == 0.0
        _report("guardian-equipped architectures log exactly 0 violations")

    def test_full_stack_margin_trust(self, cells):
        final = cells[(FULL_STACK, MARGIN)][1].final_trust
        assert final >= 0.7
        _report(f"full stack under margin bias keeps trust at {final:.3f} >= 0.7")


class TestTrustSweep:
    def test_five_multiplier_sweep(self, tmp_path):
        cfg = BenchConfig(
            engine=cz.EngineConfig(n_trees=30, min_leaf=30),
            train_episodes=30,
            train_weeks=20,
        )
        results = run_trust_sweep(cfg, out_dir=str(tmp_path))
        assert len(results) == 5
        import csv

        with open(tmp_path / "table2.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0].keys()) == TABLE2_COLUMNS
        assert len(rows) == 5
        by_mult = {m: s for m, _, s in results}
        assert by_mult[300_000.0].final_trust >= by_mult[50_000.0].final_trust
        _report(
            "trust sweep: 5 multipliers, table shape ok, conservative trust "
            f"{by_mult[300_000.0].final_trust:.3f} >= aggressive {by_mult[50_000.0].final_trust:.3f}"
        )


class TestDeterminism:
    def test_matrix_byte_identical(self, tmp_path):
        cfg = BenchConfig(
            engine=cz.EngineConfig(n_trees=20, min_leaf=30),
            train_episodes=20,
            train_weeks=20,
        )
        dirs = []
        for name in ("a", "b"):
            out = tmp_path / name
            run_matrix(
                [LLM_ONLY, LLM_GUARDIAN, FULL_STACK],
                [VOLUME, MARGIN, "NEUTRAL"],
                cfg,
                out_dir=str(out),
            )
            dirs.append(out)
        mismatches = []
        for path_a in sorted(dirs[0].rglob("*")):
            if not path_a.is_file():
                continue
            path_b = dirs[1] / path_a.relative_to(dirs[0])
            if not filecmp.cmp(path_a, path_b, shallow=False):
                mismatches.append(str(path_a.relative_to(dirs[0])))
        assert mismatches == []
        _report("determinism: two full matrix runs are byte-identical")
