"""Strategist implementations and the three decision architectures.

LLM_ONLY executes the strategist's raw choice. LLM_GUARDIAN routes every
action through the constraint engine and feeds repair messages back.
FULL_STACK runs the complete loop: propose three hypotheses, validate and
replace invalid ones, score each survivor with the causal engine, pick
the best trust-adjusted value, execute, and retrain the engine on
schedule. Scripted strategists give the benchmarks a deterministic,
bias-directed stand-in for an external language model.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Callable, Optional, Protocol, Sequence

import numpy as np

from . import causal as cz
from . import guardian as gd
from . import simulator as sm
from .logs import CandidateRecord, EpisodeLog, WeekRecord

NEUTRAL = "NEUTRAL"
VOLUME = "VOLUME"
MARGIN = "MARGIN"

LLM_ONLY = "LLM_ONLY"
LLM_GUARDIAN = "LLM_GUARDIAN"
FULL_STACK = "FULL_STACK"

ARCHITECTURES = (LLM_ONLY, LLM_GUARDIAN, FULL_STACK)

OBJECTIVE_TEXTS = {
    NEUTRAL: "Maximize long-term sustainable profit while maintaining brand trust.",
    VOLUME: (
        "Our strategy prioritizes market share growth. "
        "Maximize profit through aggressive volume expansion."
    ),
    MARGIN: (
        "Our strategy prioritizes unit economics. "
        "Maximize profit through premium pricing and margin expansion."
    ),
}

# Floor for clamped recovery when a raw action would drive price to zero.
CATASTROPHIC_PRICE_EPS = 1e-6


@dataclass(frozen=True)
class ScenarioContext:
    bias: str = NEUTRAL
    objective_text: str = OBJECTIVE_TEXTS[NEUTRAL]
    trust_multiplier: float = 150_000.0

    def __post_init__(self) -> None:
        if self.bias not in OBJECTIVE_TEXTS:
            raise ValueError(f"unknown bias {self.bias!r}")
        if self.objective_text != OBJECTIVE_TEXTS[self.bias]:
            raise ValueError("objective_text does not match the bias")


def scenario_context(bias: str, trust_multiplier: float = 150_000.0) -> ScenarioContext:
    if bias not in OBJECTIVE_TEXTS:
        raise ValueError(f"unknown bias {bias!r}")
    return ScenarioContext(
        bias=bias, objective_text=OBJECTIVE_TEXTS[bias], trust_multiplier=trust_multiplier
    )


@dataclass
class Candidate:
    action: sm.Action
    raw_action: sm.Action
    verdict: Optional[gd.Verdict] = None
    estimate: Optional[cz.CausalEstimate] = None
    long_term_value: Optional[float] = None
    violation_count: int = 0


class Strategist(Protocol):
    def propose(self, state: sm.MarketState, context: ScenarioContext, k: int) -> list[sm.Action]:
        ...

    def choose(self, state: sm.MarketState, candidates: Sequence[Candidate]) -> sm.Action:
        ...

    def feedback(self, message: str) -> None:
        ...


class ScriptedStrategist:
    """Deterministic bias-directed proposal generator.

    VOLUME pushes deep discounts (below the margin floor, so repair gets
    exercised), MARGIN pushes large raises toward and past the price cap,
    NEUTRAL proposes moderate moves. Proposals are jittered from a seeded
    stream, so a given seed always reproduces the same episode.
    """

    _BASES = {
        VOLUME: [(-48.0, 4500.0), (-25.0, 3000.0), (-8.0, 1500.0)],
        MARGIN: [(55.0, 0.0), (30.0, 500.0), (6.0, 1000.0)],
        NEUTRAL: [(-4.0, 1200.0), (0.0, 800.0), (5.0, 500.0)],
    }

    def __init__(self, bias: str = NEUTRAL, seed: int = 0):
        if bias not in self._BASES:
            raise ValueError(f"unknown bias {bias!r}")
        self.bias = bias
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.messages: list[str] = []

    def propose(self, state: sm.MarketState, context: ScenarioContext, k: int = 3) -> list[sm.Action]:
        bases = self._BASES[self.bias]
        actions = []
        for i in range(k):
            pct, ad = bases[i % len(bases)]
            pct += float(self.rng.uniform(-1.5, 1.5))
            ad = max(0.0, ad + float(self.rng.uniform(-150.0, 150.0)))
            actions.append(sm.Action(price_change_pct=pct, ad_spend=ad))
        return actions

    def choose(self, state: sm.MarketState, candidates: Sequence[Candidate]) -> sm.Action:
        return candidates[0].action

    def feedback(self, message: str) -> None:
        self.messages.append(message)


ENV_MODEL_URL = "AGORA_MODEL_URL"
ENV_MODEL_KEY = "AGORA_MODEL_KEY"
ENV_MODEL_NAME = "AGORA_MODEL_NAME"

PROMPT_SCAFFOLD = """Your Strategic Objective: Maximize long-term sustainable profit AND brand trust.

Organizational Context: {objective}

Your Unique Advantage: you have two powerful tools:
1. check_business_rules: prevents catastrophic decisions
2. estimate_profit_impact: predicts long-term profit AND trust outcomes

Decision Process:
1. Phase 1: Generate three diverse strategic hypotheses
2. Phase 2: Validate each using check_business_rules
3. Phase 3: Estimate causal impacts using estimate_profit_impact
4. Phase 4: Select action optimizing profit-trust balance

Current market state: {state}

Respond with a JSON object: {{"candidates": [{{"price_change_pct": <percent>, "ad_spend": <currency>}}, ...]}}
with exactly {k} candidates."""


class LLMStrategist:
    """Chat-completions backed strategist with tool-call handling.

    The transport is injectable for offline tests; by default it POSTs to
    the configured endpoint. Malformed replies are re-prompted once, then
    the scripted balanced strategist takes over for that call.
    """

    def __init__(
        self,
        context_bias: str = NEUTRAL,
        transport: Optional[Callable[[list[dict]], dict]] = None,
        temperature: float = 0.9,
        max_tokens: int = 1000,
        transcript_path: Optional[str] = None,
        timeout: float = 60.0,
    ):
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.transcript_path = transcript_path
        self.timeout = timeout
        self.tools: dict[str, Callable[..., dict]] = {}
        self.fallback = ScriptedStrategist(NEUTRAL, seed=0)
        self.fallback_events: list[str] = []
        self.messages: list[str] = []
        if transport is not None:
            self.transport = transport
        else:
            url = os.environ.get(ENV_MODEL_URL)
            if not url:
                raise RuntimeError(f"environment variable {ENV_MODEL_URL} is not set")
            key = os.environ.get(ENV_MODEL_KEY)
            if not key:
                raise RuntimeError(f"environment variable {ENV_MODEL_KEY} is not set")
            self.model = os.environ.get(ENV_MODEL_NAME, "gpt-4o")
            self.transport = self._http_transport(url, key)

    def _http_transport(self, url: str, key: str) -> Callable[[list[dict]], dict]:
        import httpx

        def send(messages: list[dict]) -> dict:
            resp = httpx.post(
                url,
                headers={"Authorization": f"Bearer {key}"},
                json={
                    "model": self.model,
                    "messages": messages,
                    "temperature": self.temperature,
                    "max_tokens": self.max_tokens,
                },
                timeout=self.timeout,
            )
            resp.raise_for_status()
            return resp.json()

        return send

    def bind_tools(self, tools: dict[str, Callable[..., dict]]) -> None:
        self.tools = tools

    def _record(self, entry: dict) -> None:
        if self.transcript_path:
            with open(self.transcript_path, "a") as fh:
                fh.write(json.dumps(entry) + "\n")

    def propose(self, state: sm.MarketState, context: ScenarioContext, k: int = 3) -> list[sm.Action]:
        prompt = PROMPT_SCAFFOLD.format(
            objective=context.objective_text,
            state={
                "week": state.week,
                "price": state.price,
                "trust": state.trust,
                "prev_ad_spend": state.prev_ad_spend,
            },
            k=k,
        )
        messages = [{"role": "user", "content": prompt}]
        for attempt in range(2):
            try:
                actions = self._converse(messages, k)
            except Exception as exc:  # network, auth, malformed payloads
                self.fallback_events.append(f"transport failure: {exc}")
                break
            if actions is not None:
                return actions
            messages.append({
                "role": "user",
                "content": "Your previous reply was malformed. "
                           "Reply with only the JSON object described above.",
            })
        self.fallback_events.append("fell back to scripted balanced strategist")
        return self.fallback.propose(state, context, k)

    def _converse(self, messages: list[dict], k: int) -> Optional[list[sm.Action]]:
        for _ in range(8):  # bounded tool-call rounds
            reply = self.transport(messages)
            self._record({"request": messages[-1], "response": reply})
            msg = reply["choices"][0]["message"]
            calls = msg.get("tool_calls") or []
            if calls:
                messages.append(msg)
                for call in calls:
                    name = call["function"]["name"]
                    args = json.loads(call["function"]["arguments"])
                    tool = self.tools.get(name)
                    result = tool(**args) if tool else {"error": f"unknown tool {name}"}
                    messages.append({
                        "role": "tool",
                        "tool_call_id": call.get("id", ""),
                        "content": json.dumps(result),
                    })
                continue
            return self._parse_candidates(msg.get("content") or "", k)
        return None

    @staticmethod
    def _parse_candidates(content: str, k: int) -> Optional[list[sm.Action]]:
        start, end = content.find("{"), content.rfind("}")
        if start < 0 or end <= start:
            return None
        try:
            payload = json.loads(content[start : end + 1])
            cands = payload["candidates"]
            actions = [
                sm.Action(
                    price_change_pct=float(c["price_change_pct"]),
                    ad_spend=float(c["ad_spend"]),
                )
                for c in cands
            ]
        except (KeyError, TypeError, ValueError, json.JSONDecodeError):
            return None
        return actions if len(actions) == k else None

    def choose(self, state: sm.MarketState, candidates: Sequence[Candidate]) -> sm.Action:
        return candidates[0].action

    def feedback(self, message: str) -> None:
        self.messages.append(message)


def scripted_strategist(bias: str, seed: int = 0) -> ScriptedStrategist:
    return ScriptedStrategist(bias, seed)


def llm_strategist(**kwargs) -> LLMStrategist:
    return LLMStrategist(**kwargs)


# -- architecture runner -------------------------------------------------


def _observation_from(rec: WeekRecord, period: int) -> cz.Observation:
    return cz.Observation(
        price=rec.price_before,
        trust=rec.trust_before,
        prev_ad_spend=rec.prev_ad_spend,
        season_phase=rec.week % period,
        price_change_pct=rec.executed_action.price_change_pct,
        ad_spend=rec.executed_action.ad_spend,
        profit_outcome=rec.profit,
        trust_outcome=rec.trust_after - rec.trust_before,
    )


def run_architecture(
    kind: str,
    strategist: Strategist,
    sim: sm.Simulator,
    cs: gd.ConstraintSet,
    engine: Optional[cz.FittedEngine] = None,
    weeks: int = 52,
    context: Optional[ScenarioContext] = None,
    engine_cfg: Optional[cz.EngineConfig] = None,
    accumulated: Optional[list[cz.Observation]] = None,
    candidate_count: int = 3,
    replacement_rounds: int = 3,
) -> EpisodeLog:
    if kind not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {kind!r}")
    if kind == FULL_STACK and engine is None:
        raise ValueError("FULL_STACK requires a fitted causal engine")
    context = context or scenario_context(NEUTRAL)
    log = EpisodeLog(
        architecture=kind,
        scenario=context.bias,
        seed=sim.seed,
        initial_state=sim.state,
    )
    dataset = accumulated if accumulated is not None else []

    for _ in range(weeks):
        state = sim.state
        if kind == FULL_STACK:
            rec = _full_stack_week(
                strategist, sim, cs, engine, context, candidate_count, replacement_rounds
            )
            dataset.append(_observation_from(rec, sim.cfg.season_period))
            if engine_cfg is not None:
                engine = cz.maybe_retrain(engine, sim.state.week, dataset, engine_cfg)
        elif kind == LLM_GUARDIAN:
            proposals = strategist.propose(state, context, candidate_count)
            cands = [Candidate(action=a, raw_action=a) for a in proposals]
            raw = strategist.choose(state, cands)
            repair = gd.repair_action(raw, state, cs)
            if repair.repairs:
                strategist.feedback(repair.message)
            outcome = sim.step(repair.safe_action)
            rec = _make_record(state, raw, repair.safe_action, outcome, sim.state)
            rec.repairs = tuple(r.rule_id for r in repair.repairs)
        else:  # LLM_ONLY: raw execution, no guardian, no engine
            proposals = strategist.propose(state, context, candidate_count)
            cands = [Candidate(action=a, raw_action=a) for a in proposals]
            raw = strategist.choose(state, cands)
            try:
                outcome = sim.step(raw)
                executed = raw
                catastrophic = False
            except sm.SimulationError:
                # Mathematically impossible state; clamp price and continue.
                clamped_pct = (CATASTROPHIC_PRICE_EPS / state.price - 1.0) * 100.0
                executed = sm.Action(clamped_pct, max(0.0, raw.ad_spend))
                outcome = sim.step(executed)
                catastrophic = True
            rec = _make_record(state, raw, executed, outcome, sim.state)
            rec.catastrophic = catastrophic
        log.weeks.append(rec)
    return log


def _make_record(
    before: sm.MarketState,
    raw: sm.Action,
    executed: sm.Action,
    outcome: sm.StepOutcome,
    after: sm.MarketState,
) -> WeekRecord:
    return WeekRecord(
        week=before.week,
        price_before=before.price,
        trust_before=before.trust,
        prev_ad_spend=before.prev_ad_spend,
        raw_action=raw,
        executed_action=executed,
        demand=outcome.demand,
        profit=outcome.profit,
        price_after=after.price,
        trust_after=after.trust,
        cumulative_profit=after.cumulative_profit,
    )


def _full_stack_week(
    strategist: Strategist,
    sim: sm.Simulator,
    cs: gd.ConstraintSet,
    engine: cz.FittedEngine,
    context: ScenarioContext,
    candidate_count: int,
    replacement_rounds: int,
) -> WeekRecord:
    state = sim.state
    proposals = strategist.propose(state, context, candidate_count)
    candidates: list[Candidate] = []
    for raw in proposals:
        verdict = gd.validate_action(raw, state, cs)
        if verdict.is_valid:
            candidates.append(Candidate(action=raw, raw_action=raw, verdict=verdict))
            continue
        # Invalid hypotheses are discarded and replaced: a few fresh asks,
        # then the repaired original as a last resort.
        replaced = None
        for _ in range(replacement_rounds):
            fresh = strategist.propose(state, context, 1)[0]
            fresh_verdict = gd.validate_action(fresh, state, cs)
            if fresh_verdict.is_valid:
                replaced = Candidate(
                    action=fresh,
                    raw_action=raw,
                    verdict=fresh_verdict,
                    violation_count=len(verdict.violations),
                )
                break
        if replaced is None:
            safe = gd.repair_action(raw, state, cs).safe_action
            replaced = Candidate(
                action=safe,
                raw_action=raw,
                verdict=gd.validate_action(safe, state, cs),
                violation_count=len(verdict.violations),
            )
        candidates.append(replaced)

    for cand in candidates:
        cand.estimate = cz.estimate_profit_impact(
            cand.action.price_change_pct, cand.action.ad_spend, state, engine
        )
        cand.long_term_value = cz.long_term_value(cand.estimate, context.trust_multiplier)

    best = min(
        candidates,
        key=lambda c: (-c.long_term_value, c.violation_count, abs(c.action.price_change_pct)),
    )
    outcome = sim.step(best.action)
    rec = _make_record(state, best.raw_action, best.action, outcome, sim.state)
    rec.candidates = [
        CandidateRecord(
            action=c.action,
            raw_action=c.raw_action,
            violation_count=c.violation_count,
            profit_change=c.estimate.profit_change,
            trust_change=c.estimate.trust_change,
            profit_confidence=c.estimate.profit_confidence,
            trust_confidence=c.estimate.trust_confidence,
            long_term_value=c.long_term_value,
        )
        for c in candidates
    ]
    return rec


def annotate_violations(log: EpisodeLog, cs: gd.ConstraintSet) -> EpisodeLog:
    """Post-hoc violation accounting over executed actions.

    Runs outside the decision loop so LLM_ONLY episodes stay guardian-free
    while they execute.
    """
    for rec in log.weeks:
        state = sm.MarketState(
            week=rec.week,
            price=rec.price_before,
            trust=rec.trust_before,
            prev_ad_spend=rec.prev_ad_spend,
        )
        verdict = gd.validate_action(rec.executed_action, state, cs)
        rec.violations = tuple(v.rule_id for v in verdict.violations)
    return log
