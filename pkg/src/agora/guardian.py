"""Symbolic constraint engine: validates actions against hard business
rules and repairs invalid ones by ordered per-axis clamping.

All functions are pure over immutable inputs. The repair pipeline for
price is: clip the requested change to the weekly rate window, apply it,
cap at the price ceiling, then raise to the buffered margin floor. Ad
spend is clamped to its absolute cap first and its weekly-increase cap
second. Validity of the repaired action is guaranteed whenever the
current price admits any feasible action, i.e. price stays within
[min_safe_price / (1 + max_increase), max_price / (1 - max_discount)];
Guardian-governed trajectories never leave that corridor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .simulator import Action, MarketState

ON_PRICE = "ON_PRICE"
ON_COST = "ON_COST"

# Rule ids, in the fixed order violations are reported.
RULE_PRICE_CHANGE_WINDOW = "price_change_window"
RULE_PRICE_FLOOR = "price_floor"
RULE_PRICE_CAP = "price_cap"
RULE_AD_BUDGET = "ad_budget"
RULE_AD_INCREASE = "ad_increase"


@dataclass(frozen=True)
class ConstraintSet:
    unit_cost: float = 50.0
    cost_buffer: float = 1.1
    min_margin: float = 0.15
    margin_basis: str = ON_PRICE
    safety_buffer: float = 0.01
    max_price: float = 150.0
    ad_cap: float = 5000.0
    ad_increase_cap: float = 1000.0
    max_discount_pct: float = 40.0
    max_increase_pct: float = 50.0

    def __post_init__(self) -> None:
        if self.margin_basis not in (ON_PRICE, ON_COST):
            raise ValueError(f"unknown margin_basis {self.margin_basis!r}")
        for name in ("unit_cost", "max_price", "ad_cap", "ad_increase_cap",
                     "max_discount_pct", "max_increase_pct"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.min_margin < 1:
            raise ValueError("min_margin must be in [0, 1)")
        if min_safe_price(self) >= self.max_price:
            raise ValueError("margin floor must lie below max_price")


@dataclass(frozen=True)
class Violation:
    rule_id: str
    observed: float
    limit: float


@dataclass(frozen=True)
class Verdict:
    is_valid: bool
    violations: tuple[Violation, ...] = ()
    message: str = ""


@dataclass(frozen=True)
class RepairEntry:
    rule_id: str
    original: float
    repaired: float


@dataclass(frozen=True)
class Repair:
    safe_action: Action
    repairs: tuple[RepairEntry, ...] = ()
    message: str = ""


def min_safe_price(cs: ConstraintSet) -> float:
    """Lowest admissible price: cost buffer vs. margin floor, plus safety buffer."""
    if cs.margin_basis == ON_PRICE:
        margin_floor = cs.unit_cost / (1.0 - cs.min_margin)
    else:
        margin_floor = cs.unit_cost * (1.0 + cs.min_margin)
    return max(cs.unit_cost * cs.cost_buffer, margin_floor) * (1.0 + cs.safety_buffer)


# Absolute slack absorbing round-trip float error when a repaired action is
# re-validated against the exact boundary it was clamped to.
_EPS = 1e-9


def validate_action(action: Action, state: MarketState, cs: ConstraintSet) -> Verdict:
    violations: list[Violation] = []
    pct = action.price_change_pct
    ad = action.ad_spend
    new_price = state.price * (1.0 + pct / 100.0)
    floor = min_safe_price(cs)

    if pct < -cs.max_discount_pct - _EPS or pct > cs.max_increase_pct + _EPS:
        limit = cs.max_increase_pct if pct > 0 else -cs.max_discount_pct
        violations.append(Violation(RULE_PRICE_CHANGE_WINDOW, pct, limit))
    if new_price < floor - _EPS:
        violations.append(Violation(RULE_PRICE_FLOOR, new_price, floor))
    if new_price > cs.max_price + _EPS:
        violations.append(Violation(RULE_PRICE_CAP, new_price, cs.max_price))
    if ad < -_EPS or ad > cs.ad_cap + _EPS:
        limit = cs.ad_cap if ad > 0 else 0.0
        violations.append(Violation(RULE_AD_BUDGET, ad, limit))
    if ad - state.prev_ad_spend > cs.ad_increase_cap + _EPS:
        violations.append(Violation(RULE_AD_INCREASE, ad - state.prev_ad_spend, cs.ad_increase_cap))

    if violations:
        summary = "; ".join(
            f"{v.rule_id}: {v.observed:.2f} vs limit {v.limit:.2f}" for v in violations
        )
        return Verdict(False, tuple(violations), f"invalid action: {summary}")
    return Verdict(True, (), "action satisfies all rules")


def repair_action(action: Action, state: MarketState, cs: ConstraintSet) -> Repair:
    repairs: list[RepairEntry] = []
    pct = action.price_change_pct
    ad = action.ad_spend

    clipped = min(cs.max_increase_pct, max(-cs.max_discount_pct, pct))
    if clipped != pct:
        repairs.append(RepairEntry(RULE_PRICE_CHANGE_WINDOW, pct, clipped))
    pct = clipped

    adjusted = state.price * (1.0 + pct / 100.0)
    if adjusted > cs.max_price:
        new_pct = (cs.max_price / state.price - 1.0) * 100.0
        repairs.append(RepairEntry(RULE_PRICE_CAP, pct, new_pct))
        pct = new_pct
        adjusted = cs.max_price
    floor = min_safe_price(cs)
    if adjusted < floor:
        new_pct = (floor / state.price - 1.0) * 100.0
        repairs.append(RepairEntry(RULE_PRICE_FLOOR, pct, new_pct))
        pct = new_pct

    if ad < 0:
        repairs.append(RepairEntry(RULE_AD_BUDGET, ad, 0.0))
        ad = 0.0
    elif ad > cs.ad_cap:
        repairs.append(RepairEntry(RULE_AD_BUDGET, ad, cs.ad_cap))
        ad = cs.ad_cap
    if ad - state.prev_ad_spend > cs.ad_increase_cap:
        new_ad = state.prev_ad_spend + cs.ad_increase_cap
        repairs.append(RepairEntry(RULE_AD_INCREASE, ad, new_ad))
        ad = new_ad

    safe = Action(price_change_pct=pct, ad_spend=ad)
    if repairs:
        msg = "; ".join(
            f"{r.rule_id}: {r.original:.2f} -> {r.repaired:.2f}" for r in repairs
        )
        return Repair(safe, tuple(repairs), f"repaired: {msg}")
    return Repair(safe, (), "action already valid")


def verdict_to_dict(v: Verdict) -> dict:
    return {
        "is_valid": v.is_valid,
        "violations": [
            {"rule_id": x.rule_id, "observed": x.observed, "limit": x.limit}
            for x in v.violations
        ],
        "message": v.message,
    }


def repair_to_dict(r: Repair) -> dict:
    return {
        "safe_action": {
            "price_change_pct": r.safe_action.price_change_pct,
            "ad_spend": r.safe_action.ad_spend,
        },
        "repairs": [
            {"rule_id": x.rule_id, "original": x.original, "repaired": x.repaired}
            for x in r.repairs
        ],
        "message": r.message,
    }
