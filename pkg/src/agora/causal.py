"""Counterfactual effect engine based on double machine learning.

Cross-fitted random forests estimate the nuisances E[Y|S] and E[A|S];
residualizing both outcome and treatment removes first-order confounding
bias. Heterogeneous effects are then estimated by a bootstrap ensemble of
trees grown on the state features, with a local linear model of the
outcome residual on the two treatment residuals inside each leaf. The
effect of an action relative to the reference (no price change, unchanged
ad spend) is the ensemble-averaged local slope applied to the action
delta; across-tree dispersion drives the confidence scores.
"""

from __future__ import annotations

import pickle
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from sklearn.ensemble import RandomForestRegressor
from sklearn.model_selection import KFold
from sklearn.tree import DecisionTreeRegressor

from . import guardian as gd
from . import simulator as sm

ARTIFACT_VERSION = 1

FEATURE_NAMES = ("price", "trust", "prev_ad_spend", "season_phase")


class CausalEngineError(RuntimeError):
    pass


class InsufficientDataError(CausalEngineError):
    pass


class DegenerateTreatmentError(CausalEngineError):
    pass


@dataclass(frozen=True)
class Observation:
    price: float
    trust: float
    prev_ad_spend: float
    season_phase: int
    price_change_pct: float
    ad_spend: float
    profit_outcome: float
    trust_outcome: float

    def features(self) -> tuple[float, float, float, float]:
        return (self.price, self.trust, self.prev_ad_spend, float(self.season_phase))

    def treatment(self) -> tuple[float, float]:
        return (self.price_change_pct, self.ad_spend)

    def outcomes(self) -> tuple[float, float]:
        return (self.profit_outcome, self.trust_outcome)


@dataclass(frozen=True)
class CausalEstimate:
    profit_change: float
    trust_change: float
    profit_confidence: float
    trust_confidence: float

    def to_dict(self) -> dict:
        return {
            "profit_change": self.profit_change,
            "trust_change": self.trust_change,
            "profit_confidence": self.profit_confidence,
            "trust_confidence": self.trust_confidence,
        }


@dataclass(frozen=True)
class EngineConfig:
    n_trees: int = 200
    min_leaf: int = 25
    n_folds: int = 5
    retrain_interval: int = 10
    trust_multiplier: float = 150_000.0
    min_observations: int = 200
    outcome_horizon: int = 4
    discount: float = 0.9
    seed: int = 7

    def __post_init__(self) -> None:
        if self.n_folds < 2:
            raise ValueError("n_folds must be >= 2")
        if self.retrain_interval < 1:
            raise ValueError("retrain_interval must be >= 1")
        if self.trust_multiplier < 0:
            raise ValueError("trust_multiplier must be non-negative")


@dataclass
class _EffectTree:
    tree: DecisionTreeRegressor
    # leaf id -> slope of the outcome residual on the 2-d treatment residual
    leaf_slopes: dict


class FittedEngine:
    """Immutable after fit; safe for concurrent queries."""

    def __init__(
        self,
        cfg: EngineConfig,
        trees_per_outcome: list[list[_EffectTree]],
        feature_mean: np.ndarray,
        feature_std: np.ndarray,
        treatment_scale: np.ndarray,
        n_observations: int,
    ):
        self.cfg = cfg
        self._trees = trees_per_outcome
        self.feature_mean = feature_mean
        self.feature_std = feature_std
        self.treatment_scale = treatment_scale
        self.n_observations = n_observations

    # -- prediction ------------------------------------------------------

    def _slopes(self, outcome_idx: int, features: np.ndarray) -> np.ndarray:
        """Per-tree 2-d slope at the given state; shape (n_trees, 2)."""
        x = features.reshape(1, -1)
        slopes = np.empty((len(self._trees[outcome_idx]), 2))
        for i, et in enumerate(self._trees[outcome_idx]):
            leaf = int(et.tree.apply(x)[0])
            slopes[i] = et.leaf_slopes.get(leaf, (0.0, 0.0))
        return slopes

    def _hull_penalty(self, features: np.ndarray) -> float:
        z = np.abs(features - self.feature_mean) / np.maximum(self.feature_std, 1e-9)
        excess = max(0.0, float(z.max()) - 2.0)
        return 1.0 / (1.0 + excess)

    def effect(self, features: Sequence[float], delta: Sequence[float]) -> tuple[float, float, float, float]:
        """Effect of a treatment delta vs. the reference, per outcome.

        Returns (profit_effect, trust_effect, profit_conf, trust_conf).
        """
        x = np.asarray(features, dtype=float)
        d = np.asarray(delta, dtype=float)
        penalty = self._hull_penalty(x)
        out = []
        for j in range(2):
            votes = self._slopes(j, x) @ d
            mean = float(votes.mean())
            if np.allclose(d, 0.0):
                out.append((0.0, min(1.0, penalty)))
                continue
            spread = float(votes.std())
            cv = spread / (abs(mean) + 1e-12)
            conf = penalty / (1.0 + cv)
            out.append((mean, min(1.0, max(0.0, conf))))
        (p_eff, p_conf), (t_eff, t_conf) = out
        return p_eff, t_eff, p_conf, t_conf


def _as_arrays(dataset: Sequence[Observation]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    S = np.array([o.features() for o in dataset], dtype=float)
    A = np.array([o.treatment() for o in dataset], dtype=float)
    Y = np.array([o.outcomes() for o in dataset], dtype=float)
    return S, A, Y


def fit(dataset: Sequence[Observation], cfg: EngineConfig) -> FittedEngine:
    if len(dataset) < cfg.min_observations:
        raise InsufficientDataError(
            f"need at least {cfg.min_observations} observations, got {len(dataset)}"
        )
    S, A, Y = _as_arrays(dataset)
    if not np.isfinite(S).all() or not np.isfinite(A).all() or not np.isfinite(Y).all():
        raise CausalEngineError("dataset contains non-finite values")

    rng = np.random.default_rng(cfg.seed)
    n = len(dataset)

    # Cross-fitted nuisances: out-of-fold predictions only.
    y_hat = np.zeros_like(Y)
    a_hat = np.zeros_like(A)
    folds = KFold(n_splits=cfg.n_folds, shuffle=True, random_state=cfg.seed)
    for train_idx, test_idx in folds.split(S):
        m_y = RandomForestRegressor(
            n_estimators=100, min_samples_leaf=5, random_state=cfg.seed, n_jobs=-1
        )
        m_a = RandomForestRegressor(
            n_estimators=100, min_samples_leaf=5, random_state=cfg.seed + 1, n_jobs=-1
        )
        m_y.fit(S[train_idx], Y[train_idx])
        m_a.fit(S[train_idx], A[train_idx])
        y_hat[test_idx] = m_y.predict(S[test_idx])
        a_hat[test_idx] = m_a.predict(S[test_idx])

    y_res = Y - y_hat
    a_res = A - a_hat
    a_scale = a_res.std(axis=0)
    if (a_scale < 1e-9).any():
        raise DegenerateTreatmentError(
            "treatment has no residual variation after adjusting for state"
        )

    trees_per_outcome: list[list[_EffectTree]] = []
    for j in range(2):
        trees: list[_EffectTree] = []
        for b in range(cfg.n_trees):
            idx = rng.integers(0, n, size=n)
            tree = DecisionTreeRegressor(
                min_samples_leaf=cfg.min_leaf,
                random_state=int(rng.integers(0, 2**31 - 1)),
            )
            tree.fit(S[idx], y_res[idx, j])
            leaves = tree.apply(S[idx])
            slopes: dict = {}
            for leaf in np.unique(leaves):
                members = idx[leaves == leaf]
                slopes[int(leaf)] = _local_slope(a_res[members], y_res[members, j], a_scale)
            trees.append(_EffectTree(tree, slopes))
        trees_per_outcome.append(trees)

    return FittedEngine(
        cfg=cfg,
        trees_per_outcome=trees_per_outcome,
        feature_mean=S.mean(axis=0),
        feature_std=S.std(axis=0),
        treatment_scale=a_scale,
        n_observations=n,
    )


def _local_slope(a_res: np.ndarray, y_res: np.ndarray, a_scale: np.ndarray) -> tuple[float, float]:
    """Ridge-stabilized regression of outcome residual on treatment residuals."""
    Xs = a_res / a_scale
    X = np.column_stack([np.ones(len(Xs)), Xs])
    gram = X.T @ X + np.diag([1e-9, 1e-3, 1e-3]) * len(Xs)
    beta = np.linalg.solve(gram, X.T @ y_res)
    return (float(beta[1] / a_scale[0]), float(beta[2] / a_scale[1]))


def state_features(state: sm.MarketState, cfg: Optional[sm.SimConfig] = None) -> tuple:
    period = cfg.season_period if cfg is not None else 52
    return (state.price, state.trust, state.prev_ad_spend, float(state.week % period))


def estimate_profit_impact(
    price_change_pct: float,
    ad_spend: float,
    state: sm.MarketState,
    engine: FittedEngine,
) -> CausalEstimate:
    if engine is None:
        raise CausalEngineError("engine is not fitted")
    delta = (price_change_pct, ad_spend - state.prev_ad_spend)
    p_eff, t_eff, p_conf, t_conf = engine.effect(state_features(state), delta)
    return CausalEstimate(
        profit_change=p_eff,
        trust_change=t_eff,
        profit_confidence=p_conf,
        trust_confidence=t_conf,
    )


def long_term_value(est: CausalEstimate, trust_multiplier: float) -> float:
    return est.profit_change + est.trust_change * trust_multiplier


def maybe_retrain(
    engine: Optional[FittedEngine],
    week: int,
    accumulated: Sequence[Observation],
    cfg: EngineConfig,
) -> Optional[FittedEngine]:
    """Refit on schedule when new data has arrived; otherwise no-op."""
    if week <= 0 or week % cfg.retrain_interval != 0:
        return engine
    fitted_n = engine.n_observations if engine is not None else 0
    if len(accumulated) <= fitted_n or len(accumulated) < cfg.min_observations:
        return engine
    return fit(accumulated, cfg)


# -- training data generation -------------------------------------------


def generate_observations(
    sim_cfg: sm.SimConfig,
    n_episodes: int = 200,
    weeks_per_episode: int = 40,
    seed: int = 123,
    cs: Optional[gd.ConstraintSet] = None,
    horizon: int = 1,
    discount: float = 0.9,
) -> list[Observation]:
    """Transitions from randomized Guardian-governed policies.

    Outcomes are discounted sums over `horizon` weeks of weekly profit and
    weekly trust delta following the recorded action.
    """
    cs = cs or gd.ConstraintSet()
    rng = np.random.default_rng(seed)
    obs: list[Observation] = []
    for ep in range(n_episodes):
        sim = sm.Simulator(sim_cfg, seed=seed + 1000 * ep)
        records = []
        for _ in range(weeks_per_episode + horizon - 1):
            raw = sm.Action(
                price_change_pct=float(rng.uniform(-cs.max_discount_pct, cs.max_increase_pct)),
                ad_spend=float(rng.uniform(0.0, cs.ad_cap)),
            )
            safe = gd.repair_action(raw, sim.state, cs).safe_action
            before = sim.state
            outcome = sim.step(safe)
            records.append((before, safe, outcome.profit, sim.state.trust - before.trust))
        for t in range(weeks_per_episode):
            window = records[t : t + horizon]
            profit_y = sum(discount**h * w[2] for h, w in enumerate(window))
            trust_y = sum(discount**h * w[3] for h, w in enumerate(window))
            before, action, _, _ = records[t]
            obs.append(
                Observation(
                    price=before.price,
                    trust=before.trust,
                    prev_ad_spend=before.prev_ad_spend,
                    season_phase=before.week % sim_cfg.season_period,
                    price_change_pct=action.price_change_pct,
                    ad_spend=action.ad_spend,
                    profit_outcome=profit_y,
                    trust_outcome=trust_y,
                )
            )
    return obs


# -- persistence ---------------------------------------------------------


def save_engine(engine: FittedEngine, path) -> None:
    payload = {
        "format_version": ARTIFACT_VERSION,
        "config": engine.cfg,
        "engine": engine,
    }
    with open(path, "wb") as fh:
        pickle.dump(payload, fh)


def load_engine(path) -> FittedEngine:
    with open(path, "rb") as fh:
        payload = pickle.load(fh)
    version = payload.get("format_version")
    if version != ARTIFACT_VERSION:
        raise CausalEngineError(f"unsupported engine artifact version {version}")
    return payload["engine"]


# -- CSV round trip ------------------------------------------------------

CSV_HEADER = [
    "price", "trust", "prev_ad_spend", "season_phase",
    "price_change_pct", "ad_spend", "profit_outcome", "trust_outcome",
]


def observations_to_csv(obs: Sequence[Observation], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for o in obs:
            writer.writerow([
                o.price, o.trust, o.prev_ad_spend, o.season_phase,
                o.price_change_pct, o.ad_spend, o.profit_outcome, o.trust_outcome,
            ])


def observations_from_csv(path) -> list[Observation]:
    import csv

    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise CausalEngineError(f"unexpected CSV header: {reader.fieldnames}")
        for row in reader:
            out.append(
                Observation(
                    price=float(row["price"]),
                    trust=float(row["trust"]),
                    prev_ad_spend=float(row["prev_ad_spend"]),
                    season_phase=int(float(row["season_phase"])),
                    price_change_pct=float(row["price_change_pct"]),
                    ad_spend=float(row["ad_spend"]),
                    profit_outcome=float(row["profit_outcome"]),
                    trust_outcome=float(row["trust_outcome"]),
                )
            )
    return out
