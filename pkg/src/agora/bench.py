"""Benchmark harness: experiment matrix, metrics, sweep, and plot data.

Every cell of the matrix runs from identical initial conditions with
scripted strategists, so the whole run is a pure function of configs and
seeds. Output per cell: episode.csv and summary.json; consolidated
table1.csv / table2.csv plus tidy plot-data CSVs.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from . import agents as ag
from . import causal as cz
from . import guardian as gd
from . import simulator as sm
from .logs import EpisodeLog, episode_to_json, write_episode_csv

TRUST_SWEEP_MULTIPLIERS = (50_000.0, 100_000.0, 150_000.0, 200_000.0, 300_000.0)

TABLE1_COLUMNS = [
    "architecture", "scenario", "total_profit", "final_trust",
    "trust_delta_pct", "sharpe", "violation_rate_pct",
]
TABLE2_COLUMNS = [
    "multiplier", "total_profit", "mean_weekly", "std_weekly", "sharpe", "final_trust",
]


@dataclass(frozen=True)
class MetricsSummary:
    total_profit: float
    mean_weekly: float
    std_weekly: float
    sharpe: float
    final_trust: float
    trust_delta_pct: float
    failure_rate_pct: float
    violation_rate_pct: float


def compute_metrics(log: EpisodeLog) -> MetricsSummary:
    if not log.weeks:
        raise ValueError("cannot compute metrics on an empty episode log")
    profits = [r.profit for r in log.weeks]
    n = len(profits)
    total = sum(profits)
    mean = total / n
    var = sum((p - mean) ** 2 for p in profits) / n
    std = math.sqrt(var)
    sharpe = mean / std if std > 0 else float("inf")
    initial_trust = log.initial_state.trust
    final_trust = log.weeks[-1].trust_after
    return MetricsSummary(
        total_profit=total,
        mean_weekly=mean,
        std_weekly=std,
        sharpe=sharpe,
        final_trust=final_trust,
        trust_delta_pct=(final_trust - initial_trust) / initial_trust * 100.0,
        failure_rate_pct=sum(1 for p in profits if p < 0) / n * 100.0,
        violation_rate_pct=sum(1 for r in log.weeks if r.violations) / n * 100.0,
    )


@dataclass
class BenchConfig:
    sim: sm.SimConfig = sm.SimConfig()
    constraints: gd.ConstraintSet = gd.ConstraintSet()
    engine: cz.EngineConfig = cz.EngineConfig(n_trees=60, min_leaf=30)
    weeks: int = 52
    seed: int = 42
    # Training corpus for the pre-fitted engine; modest sizes keep the
    # matrix fast while staying deterministic.
    train_episodes: int = 60
    train_weeks: int = 30


def fit_bench_engine(cfg: BenchConfig, trust_multiplier: float = 150_000.0) -> cz.FittedEngine:
    engine_cfg = cz.EngineConfig(
        n_trees=cfg.engine.n_trees,
        min_leaf=cfg.engine.min_leaf,
        n_folds=cfg.engine.n_folds,
        retrain_interval=cfg.engine.retrain_interval,
        trust_multiplier=trust_multiplier,
        min_observations=cfg.engine.min_observations,
        outcome_horizon=1,
        discount=cfg.engine.discount,
        seed=cfg.engine.seed,
    )
    obs = cz.generate_observations(
        cfg.sim,
        n_episodes=cfg.train_episodes,
        weeks_per_episode=cfg.train_weeks,
        seed=cfg.seed,
        cs=cfg.constraints,
        horizon=1,
    )
    return cz.fit(obs, engine_cfg)


def run_cell(
    architecture: str,
    scenario: str,
    cfg: BenchConfig,
    engine: Optional[cz.FittedEngine] = None,
    trust_multiplier: float = 150_000.0,
) -> tuple[EpisodeLog, MetricsSummary]:
    context = ag.scenario_context(scenario, trust_multiplier)
    strategist = ag.scripted_strategist(scenario, seed=cfg.seed)
    sim = sm.Simulator(cfg.sim, seed=cfg.seed)
    log = ag.run_architecture(
        architecture,
        strategist,
        sim,
        cfg.constraints,
        engine=engine if architecture == ag.FULL_STACK else None,
        weeks=cfg.weeks,
        context=context,
        engine_cfg=cfg.engine if architecture == ag.FULL_STACK else None,
    )
    ag.annotate_violations(log, cfg.constraints)
    return log, compute_metrics(log)


def run_matrix(
    architectures: Sequence[str],
    scenarios: Sequence[str],
    cfg: BenchConfig,
    out_dir: Optional[str] = None,
) -> list[tuple[EpisodeLog, MetricsSummary]]:
    if not architectures or not scenarios:
        raise ValueError("need at least one architecture and one scenario")
    engine = (
        fit_bench_engine(cfg) if ag.FULL_STACK in architectures else None
    )
    results = []
    rows = []
    for arch in architectures:
        for scenario in scenarios:
            log, summary = run_cell(arch, scenario, cfg, engine=engine)
            results.append((log, summary))
            rows.append({
                "architecture": arch,
                "scenario": scenario,
                "total_profit": summary.total_profit,
                "final_trust": summary.final_trust,
                "trust_delta_pct": summary.trust_delta_pct,
                "sharpe": summary.sharpe,
                "violation_rate_pct": summary.violation_rate_pct,
            })
            if out_dir:
                cell_dir = os.path.join(out_dir, f"{arch.lower()}__{scenario.lower()}")
                _write_cell(cell_dir, log, summary)
    if out_dir:
        _write_table(os.path.join(out_dir, "table1.csv"), TABLE1_COLUMNS, rows)
    return results


def run_trust_sweep(
    cfg: BenchConfig,
    multipliers: Sequence[float] = TRUST_SWEEP_MULTIPLIERS,
    out_dir: Optional[str] = None,
) -> list[tuple[float, EpisodeLog, MetricsSummary]]:
    if not multipliers:
        raise ValueError("multipliers must be non-empty")
    results = []
    rows = []
    pareto = []
    for mult in multipliers:
        engine = fit_bench_engine(cfg, trust_multiplier=mult)
        log, summary = run_cell(
            ag.FULL_STACK, ag.NEUTRAL, cfg, engine=engine, trust_multiplier=mult
        )
        results.append((mult, log, summary))
        rows.append({
            "multiplier": mult,
            "total_profit": summary.total_profit,
            "mean_weekly": summary.mean_weekly,
            "std_weekly": summary.std_weekly,
            "sharpe": summary.sharpe,
            "final_trust": summary.final_trust,
        })
        pareto.append({"multiplier": mult, "final_trust": summary.final_trust,
                       "total_profit": summary.total_profit})
        if out_dir:
            cell_dir = os.path.join(out_dir, f"sweep_{int(mult)}")
            _write_cell(cell_dir, log, summary)
    if out_dir:
        _write_table(os.path.join(out_dir, "table2.csv"), TABLE2_COLUMNS, rows)
        _write_table(
            os.path.join(out_dir, "pareto.csv"),
            ["multiplier", "final_trust", "total_profit"],
            pareto,
        )
    return results


# -- plot data -----------------------------------------------------------


def rolling_mean(values: Sequence[float], window: int) -> list[float]:
    out = []
    for i in range(len(values)):
        lo = max(0, i - window + 1)
        chunk = values[lo : i + 1]
        out.append(sum(chunk) / len(chunk))
    return out


def write_plot_data(log: EpisodeLog, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    weeks = [r.week for r in log.weeks]
    profits = [r.profit for r in log.weeks]
    prices = [r.price_after for r in log.weeks]
    series = {
        "cumulative_profit.csv": [r.cumulative_profit for r in log.weeks],
        "weekly_profit_rolling3.csv": rolling_mean(profits, 3),
        "trust.csv": [r.trust_after for r in log.weeks],
        "price_rolling5.csv": rolling_mean(prices, 5),
    }
    for fname, values in series.items():
        with open(os.path.join(out_dir, fname), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["week", "value"])
            for w, v in zip(weeks, values):
                writer.writerow([w, f"{v:.6f}"])


def _write_cell(cell_dir: str, log: EpisodeLog, summary: MetricsSummary) -> None:
    os.makedirs(cell_dir, exist_ok=True)
    write_episode_csv(log, os.path.join(cell_dir, "episode.csv"))
    tmp = os.path.join(cell_dir, "summary.json.tmp")
    with open(tmp, "w") as fh:
        json.dump(asdict(summary), fh, indent=2, sort_keys=True)
    os.replace(tmp, os.path.join(cell_dir, "summary.json"))
    with open(os.path.join(cell_dir, "episode.json"), "w") as fh:
        fh.write(episode_to_json(log))
    write_plot_data(log, os.path.join(cell_dir, "plots"))


def _write_table(path: str, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in columns})


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)
