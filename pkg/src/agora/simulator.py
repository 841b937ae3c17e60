"""Deterministic weekly e-commerce market simulator.

Demand is multiplicative: base volume scaled by price, trust, advertising
and seasonality factors. Trust evolves asymmetrically with pricing
behavior. All randomness flows through a single seeded generator, so an
episode is a pure function of (config, seed, action sequence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

# Calibrated so the trust factor triples between trust 0.4 and 0.8.
DEFAULT_TRUST_EXPONENT = math.log(3.0) / math.log(2.0)

EQ3 = "EQ3"
V5 = "V5"


class SimulationError(ValueError):
    """Raised for domain errors (non-positive price, trust out of bounds)."""


@dataclass(frozen=True)
class SimConfig:
    base_demand: float = 800.0
    price_elasticity: float = 1.2
    ad_log_scale: float = 0.3
    ad_sat_scale: float = 100.0
    seasonality_amp: float = 0.2
    season_period: int = 52
    trust_ad_gain: float = 0.01
    trust_ad_cap: float = 5000.0
    trust_decay: float = 0.002
    trust_eta: float = 0.3
    trust_min: float = 0.4
    trust_max: float = 1.0
    trust_exponent: float = DEFAULT_TRUST_EXPONENT
    trust_mode: str = EQ3
    unit_cost: float = 50.0
    fixed_cost: float = 3000.0
    reference_price: float = 100.0
    reference_trust: float = 0.7
    noise_sigma: float = 0.0
    seed: int = 42
    initial_price: float = 100.0
    initial_trust: float = 0.7
    initial_ad_spend: float = 0.0

    def __post_init__(self) -> None:
        nonneg = {
            "base_demand": self.base_demand,
            "price_elasticity": self.price_elasticity,
            "ad_log_scale": self.ad_log_scale,
            "seasonality_amp": self.seasonality_amp,
            "trust_ad_gain": self.trust_ad_gain,
            "trust_decay": self.trust_decay,
            "trust_eta": self.trust_eta,
            "noise_sigma": self.noise_sigma,
        }
        for name, value in nonneg.items():
            if not math.isfinite(value) or value < 0:
                raise SimulationError(f"{name} must be finite and non-negative, got {value}")
        if self.base_demand <= 0:
            raise SimulationError("base_demand must be positive")
        if self.season_period <= 0:
            raise SimulationError("season_period must be positive")
        if not self.trust_min < self.trust_max:
            raise SimulationError("trust_min must be below trust_max")
        if self.trust_mode not in (EQ3, V5):
            raise SimulationError(f"unknown trust_mode {self.trust_mode!r}")
        if self.reference_price <= 0 or self.ad_sat_scale <= 0:
            raise SimulationError("reference_price and ad_sat_scale must be positive")
        if self.initial_price <= 0:
            raise SimulationError("initial_price must be positive")
        if not self.trust_min <= self.initial_trust <= self.trust_max:
            raise SimulationError(
                f"initial_trust must lie in [{self.trust_min}, {self.trust_max}]"
            )
        if self.initial_ad_spend < 0:
            raise SimulationError("initial_ad_spend must be non-negative")


@dataclass(frozen=True)
class MarketState:
    week: int = 0
    price: float = 100.0
    trust: float = 0.7
    prev_ad_spend: float = 0.0
    cumulative_profit: float = 0.0


@dataclass(frozen=True)
class Action:
    price_change_pct: float = 0.0
    ad_spend: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.price_change_pct) and math.isfinite(self.ad_spend)):
            raise SimulationError("action fields must be finite")


@dataclass(frozen=True)
class StepOutcome:
    demand: float
    revenue: float
    profit: float
    trust_after: float
    factors: dict = field(default_factory=dict)


def initial_state(cfg: SimConfig) -> MarketState:
    return MarketState(
        week=0,
        price=cfg.initial_price,
        trust=cfg.initial_trust,
        prev_ad_spend=cfg.initial_ad_spend,
        cumulative_profit=0.0,
    )


def season_factor(week: int, cfg: SimConfig) -> float:
    if week < 0:
        raise SimulationError("week must be non-negative")
    return 1.0 + cfg.seasonality_amp * math.sin(2.0 * math.pi * week / cfg.season_period)


def price_factor(price: float, cfg: SimConfig) -> float:
    if price <= 0:
        raise SimulationError(f"price must be positive, got {price}")
    return (cfg.reference_price / price) ** cfg.price_elasticity


def trust_factor(trust: float, cfg: SimConfig) -> float:
    if not (cfg.trust_min <= trust <= cfg.trust_max):
        raise SimulationError(
            f"trust {trust} outside [{cfg.trust_min}, {cfg.trust_max}]"
        )
    return (trust / cfg.reference_trust) ** cfg.trust_exponent


def ad_factor(ad_spend: float, cfg: SimConfig) -> float:
    if ad_spend < 0:
        raise SimulationError(f"ad_spend must be non-negative, got {ad_spend}")
    return 1.0 + cfg.ad_log_scale * math.log1p(ad_spend / cfg.ad_sat_scale)


def demand(
    price: float,
    trust: float,
    ad_spend: float,
    week: int,
    cfg: SimConfig,
    rng: Optional[np.random.Generator] = None,
) -> float:
    base = (
        cfg.base_demand
        * price_factor(price, cfg)
        * trust_factor(trust, cfg)
        * ad_factor(ad_spend, cfg)
        * season_factor(week, cfg)
    )
    if cfg.noise_sigma > 0:
        if rng is None:
            raise SimulationError("noise_sigma > 0 requires an rng")
        # Unit-mean lognormal multiplier keeps expected demand unchanged.
        base *= rng.lognormal(mean=-0.5 * cfg.noise_sigma**2, sigma=cfg.noise_sigma)
    return max(0.0, base)


def trust_update(state: MarketState, action: Action, cfg: SimConfig) -> float:
    pct = action.price_change_pct
    if cfg.trust_mode == EQ3:
        if pct <= 0:
            delta = 0.02
        else:
            delta = -0.1 * (pct / 100.0)
        new = state.trust + cfg.trust_eta * delta
    else:  # V5 bullet-list dynamics
        new = state.trust
        if pct < -5.0:
            new *= 1.03
        elif pct > 10.0:
            new *= 0.98
        new += cfg.trust_ad_gain * min(1.0, max(0.0, action.ad_spend) / cfg.trust_ad_cap)
        new -= cfg.trust_decay
    return min(cfg.trust_max, max(cfg.trust_min, new))


def profit(price: float, qty: float, ad_spend: float, cfg: SimConfig) -> float:
    return (price - cfg.unit_cost) * qty - cfg.fixed_cost - ad_spend


def step(
    state: MarketState,
    action: Action,
    cfg: SimConfig,
    rng: Optional[np.random.Generator] = None,
) -> tuple[MarketState, StepOutcome]:
    new_price = state.price * (1.0 + action.price_change_pct / 100.0)
    if new_price <= 0:
        raise SimulationError(
            f"price change {action.price_change_pct}% from {state.price} "
            "yields a non-positive price"
        )
    ad = action.ad_spend
    if ad < 0:
        raise SimulationError(f"ad_spend must be non-negative, got {ad}")

    factors = {
        "price_factor": price_factor(new_price, cfg),
        "trust_factor": trust_factor(state.trust, cfg),
        "ad_factor": ad_factor(ad, cfg),
        "season_factor": season_factor(state.week, cfg),
    }
    qty = demand(new_price, state.trust, ad, state.week, cfg, rng)
    week_profit = profit(new_price, qty, ad, cfg)
    new_trust = trust_update(state, action, cfg)

    next_state = MarketState(
        week=state.week + 1,
        price=new_price,
        trust=new_trust,
        prev_ad_spend=ad,
        cumulative_profit=state.cumulative_profit + week_profit,
    )
    outcome = StepOutcome(
        demand=qty,
        revenue=new_price * qty,
        profit=week_profit,
        trust_after=new_trust,
        factors=factors,
    )
    return next_state, outcome


class Simulator:
    """Stateful episode wrapper owning the noise stream for one episode."""

    def __init__(self, cfg: SimConfig, seed: Optional[int] = None):
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        self.rng = np.random.default_rng(self.seed)
        self.state = initial_state(cfg)

    def reset(self, state: Optional[MarketState] = None) -> MarketState:
        self.rng = np.random.default_rng(self.seed)
        self.state = state if state is not None else initial_state(self.cfg)
        return self.state

    def step(self, action: Action) -> StepOutcome:
        self.state, outcome = step(self.state, action, self.cfg, self.rng)
        return outcome

    def peek(self, action: Action) -> tuple[MarketState, StepOutcome]:
        """Evaluate a step without mutating this episode (noise-free only)."""
        if self.cfg.noise_sigma > 0:
            raise SimulationError("peek requires noise_sigma == 0")
        return step(self.state, action, self.cfg)


def clone_config(cfg: SimConfig, **overrides) -> SimConfig:
    return replace(cfg, **overrides)
