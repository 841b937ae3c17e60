"""Embedded explicit-state checker for the Guardian-governed state machine.

Explores every repair-then-apply transition over a finite action lattice
by breadth-first search and checks four safety invariants on each state
reached. Guardian constraints only involve price and ad spend, so the
checker state is (price, prev_ad), with prices quantized for dedup.

Transitions are week-independent, so exploration runs in two phases:
discovery BFS builds the reachable pair graph once (memoizing the repair
transition and a parent tree for witness traces), then vectorized layer
propagation over that graph produces per-depth found/distinct counts up
to the horizon. With depth in the dedup key a pair counts as distinct at
every depth it is reachable, mirroring a diameter-reporting checker; the
week-agnostic mode counts each pair once.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .guardian import ConstraintSet, min_safe_price, repair_action
from .simulator import Action, MarketState

INV_BUFFERED_MARGIN = "BufferedMargin"
INV_PRICE_CAP = "PriceCap"
INV_AD_ABSOLUTE = "AdSpendAbsolute"
INV_AD_RELATIVE = "AdSpendRelative"

# (action, price, prev_ad, constraints) -> (new_price, new_ad)
TransitionFn = Callable[[Action, float, float, ConstraintSet], tuple[float, float]]

MAX_WITNESSES = 25


@dataclass(frozen=True)
class CheckerConfig:
    price_choices: tuple[float, ...] = (-50.0, 0.0, 20.0, 60.0)
    ad_choices: tuple[float, ...] = (0.0, 500.0, 1000.0, 2000.0, 4000.0, 5000.0)
    horizon: int = 52
    price_quantum: float = 0.01
    initial_price: float = 100.0
    initial_ad: float = 0.0
    dedup_by_week: bool = True
    max_distinct_states: int = 500_000_000

    def __post_init__(self) -> None:
        if not self.price_choices or not self.ad_choices:
            raise ValueError("choice lists must be non-empty")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.price_quantum <= 0:
            raise ValueError("price_quantum must be positive")


@dataclass(frozen=True)
class ViolationWitness:
    invariant_id: str
    # Action sequence from the initial state to the violating state.
    trace: tuple[Action, ...]
    depth: int
    price: float
    ad_spend: float
    prev_ad: float


@dataclass
class CheckReport:
    states_found: int = 0
    distinct_states: int = 0
    diameter: int = 0
    violations: list[ViolationWitness] = field(default_factory=list)
    wall_time: float = 0.0
    complete: bool = True

    def to_dict(self) -> dict:
        return {
            "states_found": self.states_found,
            "distinct_states": self.distinct_states,
            "diameter": self.diameter,
            "violations": [
                {
                    "invariant_id": v.invariant_id,
                    "depth": v.depth,
                    "price": v.price,
                    "ad_spend": v.ad_spend,
                    "prev_ad": v.prev_ad,
                    "trace": [
                        {"price_change_pct": a.price_change_pct, "ad_spend": a.ad_spend}
                        for a in v.trace
                    ],
                }
                for v in self.violations
            ],
            "wall_time": self.wall_time,
            "complete": self.complete,
        }


def check_invariants(
    price: float, ad_spend: float, prev_ad: float, cs: ConstraintSet
) -> list[str]:
    violated = []
    if price < min_safe_price(cs) - 1e-9:
        violated.append(INV_BUFFERED_MARGIN)
    if price > cs.max_price + 1e-9:
        violated.append(INV_PRICE_CAP)
    if ad_spend > cs.ad_cap + 1e-9:
        violated.append(INV_AD_ABSOLUTE)
    if ad_spend - prev_ad > cs.ad_increase_cap + 1e-9:
        violated.append(INV_AD_RELATIVE)
    return violated


def guardian_transition(
    action: Action, price: float, prev_ad: float, cs: ConstraintSet
) -> tuple[float, float]:
    """Default transition: repair the proposed action, then apply it."""
    state = MarketState(price=price, prev_ad_spend=prev_ad)
    safe = repair_action(action, state, cs).safe_action
    return price * (1.0 + safe.price_change_pct / 100.0), safe.ad_spend


def explore(
    cfg: CheckerConfig,
    cs: Optional[ConstraintSet] = None,
    transition: TransitionFn = guardian_transition,
) -> CheckReport:
    cs = cs or ConstraintSet()
    start = time.monotonic()
    quantum = cfg.price_quantum

    actions = [
        Action(price_change_pct=pc, ad_spend=ad)
        for pc in cfg.price_choices
        for ad in cfg.ad_choices
    ]
    n_actions = len(actions)

    # --- phase 1: discovery BFS over week-agnostic (price, prev_ad) pairs.
    init = (round(cfg.initial_price / quantum), cfg.initial_ad)
    node_index: dict[tuple, int] = {init: 0}
    nodes: list[tuple] = [init]
    parents: list[Optional[tuple[int, int]]] = [None]  # (parent node, action idx)
    first_depth = [0]
    succ_rows: list[np.ndarray] = []
    # (node, action idx, invariant id, price, ad, prev_ad) per violating edge
    bad_edges: list[tuple[int, int, str, float, float, float]] = []

    frontier = [0]
    depth = 0
    complete = True
    while frontier and depth < cfg.horizon:
        depth += 1
        next_frontier: list[int] = []
        for node in frontier:
            price_q, prev_ad = nodes[node]
            price = price_q * quantum
            row = np.empty(n_actions, dtype=np.int64)
            for ai, action in enumerate(actions):
                new_price, new_ad = transition(action, price, prev_ad, cs)
                for inv in check_invariants(new_price, new_ad, prev_ad, cs):
                    bad_edges.append((node, ai, inv, new_price, new_ad, prev_ad))
                key = (round(new_price / quantum), new_ad)
                idx = node_index.get(key)
                if idx is None:
                    idx = len(nodes)
                    node_index[key] = idx
                    nodes.append(key)
                    parents.append((node, ai))
                    first_depth.append(depth)
                    next_frontier.append(idx)
                row[ai] = idx
            succ_rows.append(row)
        frontier = next_frontier
        if len(nodes) > cfg.max_distinct_states:
            complete = False
            break

    n_nodes = len(nodes)
    succ = np.full((n_nodes, n_actions), -1, dtype=np.int64)
    for i, row in enumerate(succ_rows):
        succ[i] = row

    report = CheckReport(complete=complete)

    # --- violations: a bad edge fires iff its source node is reachable
    # within the horizon; its earliest occurrence is the source's BFS depth.
    for node, ai, inv, price, ad, prev_ad in sorted(
        bad_edges, key=lambda e: first_depth[e[0]]
    )[:MAX_WITNESSES]:
        trace = _rebuild_trace(parents, actions, node) + (actions[ai],)
        report.violations.append(
            ViolationWitness(inv, trace, first_depth[node] + 1, price, ad, prev_ad)
        )

    # --- phase 2: per-depth layer propagation for counts and diameter.
    active = np.zeros(n_nodes, dtype=bool)
    active[0] = True
    found = 0
    distinct = 0
    ever = active.copy()
    diameter = 0
    for d in range(1, depth + 1):
        src = np.flatnonzero(active)
        found += int(src.size) * n_actions
        nxt_idx = np.unique(succ[src].ravel())
        nxt_idx = nxt_idx[nxt_idx >= 0]
        nxt = np.zeros(n_nodes, dtype=bool)
        nxt[nxt_idx] = True
        if cfg.dedup_by_week:
            distinct += int(nxt.sum())
        else:
            fresh = nxt & ~ever
            distinct += int(fresh.sum())
            ever |= nxt
        if nxt.any():
            diameter = d
        active = nxt

    report.states_found = found
    report.distinct_states = distinct
    report.diameter = diameter
    report.wall_time = time.monotonic() - start
    return report


def _rebuild_trace(parents, actions, node: int) -> tuple[Action, ...]:
    trace = []
    while parents[node] is not None:
        parent, ai = parents[node]
        trace.append(actions[ai])
        node = parent
    return tuple(reversed(trace))


def replay_trace(
    cfg: CheckerConfig,
    trace: tuple[Action, ...],
    cs: Optional[ConstraintSet] = None,
    transition: TransitionFn = guardian_transition,
) -> tuple[float, float, float]:
    """Replay a witness trace; returns (price, ad_spend, prev_ad) at the end."""
    cs = cs or ConstraintSet()
    price, prev_ad = cfg.initial_price, cfg.initial_ad
    ad = prev_ad
    prev_before = prev_ad
    for action in trace:
        prev_before = prev_ad
        price, ad = transition(action, price, prev_before, cs)
        price = round(price / cfg.price_quantum) * cfg.price_quantum
        prev_ad = ad
    return price, ad, prev_before


def summary_lines(report: CheckReport) -> list[str]:
    """Human summary mirroring a model-checker progress table."""
    return [
        f"Time            : {report.wall_time:.2f}s",
        f"Diameter        : {report.diameter}",
        f"States Found    : {report.states_found:,}",
        f"Distinct States : {report.distinct_states:,}",
        f"Violations      : {len(report.violations)}",
        f"Complete        : {report.complete}",
    ]
