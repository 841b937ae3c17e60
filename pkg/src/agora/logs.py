"""Episode logging shared by the agent runner, benchmark harness and service."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

from .simulator import Action, MarketState

EPISODE_CSV_COLUMNS = [
    "week", "price", "price_change_pct", "ad_spend", "demand", "profit",
    "trust", "cumulative_profit", "violations", "repairs",
]


@dataclass
class CandidateRecord:
    action: Action
    raw_action: Action
    violation_count: int = 0
    profit_change: Optional[float] = None
    trust_change: Optional[float] = None
    profit_confidence: Optional[float] = None
    trust_confidence: Optional[float] = None
    long_term_value: Optional[float] = None


@dataclass
class WeekRecord:
    week: int
    price_before: float
    trust_before: float
    prev_ad_spend: float
    raw_action: Action
    executed_action: Action
    demand: float
    profit: float
    price_after: float
    trust_after: float
    cumulative_profit: float
    violations: tuple[str, ...] = ()
    repairs: tuple[str, ...] = ()
    candidates: list[CandidateRecord] = field(default_factory=list)
    catastrophic: bool = False


@dataclass
class EpisodeLog:
    architecture: str
    scenario: str
    seed: int
    initial_state: MarketState
    weeks: list[WeekRecord] = field(default_factory=list)

    def n_weeks(self) -> int:
        return len(self.weeks)


def write_episode_csv(log: EpisodeLog, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EPISODE_CSV_COLUMNS)
        for rec in log.weeks:
            writer.writerow([
                rec.week,
                f"{rec.price_after:.6f}",
                f"{rec.executed_action.price_change_pct:.6f}",
                f"{rec.executed_action.ad_spend:.6f}",
                f"{rec.demand:.6f}",
                f"{rec.profit:.6f}",
                f"{rec.trust_after:.6f}",
                f"{rec.cumulative_profit:.6f}",
                "|".join(rec.violations),
                "|".join(rec.repairs),
            ])


def week_record_to_dict(rec: WeekRecord) -> dict:
    return {
        "week": rec.week,
        "price_before": rec.price_before,
        "trust_before": rec.trust_before,
        "prev_ad_spend": rec.prev_ad_spend,
        "raw_action": {
            "price_change_pct": rec.raw_action.price_change_pct,
            "ad_spend": rec.raw_action.ad_spend,
        },
        "executed_action": {
            "price_change_pct": rec.executed_action.price_change_pct,
            "ad_spend": rec.executed_action.ad_spend,
        },
        "demand": rec.demand,
        "profit": rec.profit,
        "price_after": rec.price_after,
        "trust_after": rec.trust_after,
        "cumulative_profit": rec.cumulative_profit,
        "violations": list(rec.violations),
        "repairs": list(rec.repairs),
        "catastrophic": rec.catastrophic,
        "candidates": [
            {
                "action": {
                    "price_change_pct": c.action.price_change_pct,
                    "ad_spend": c.action.ad_spend,
                },
                "violation_count": c.violation_count,
                "profit_change": c.profit_change,
                "trust_change": c.trust_change,
                "profit_confidence": c.profit_confidence,
                "trust_confidence": c.trust_confidence,
                "long_term_value": c.long_term_value,
            }
            for c in rec.candidates
        ],
    }


def episode_to_json(log: EpisodeLog) -> str:
    return json.dumps(
        {
            "architecture": log.architecture,
            "scenario": log.scenario,
            "seed": log.seed,
            "weeks": [week_record_to_dict(r) for r in log.weeks],
        },
        indent=2,
        sort_keys=True,
    )
