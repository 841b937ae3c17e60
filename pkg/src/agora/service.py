"""HTTP session service: step a live market week by week.

Each session owns one market state plus its history. Mutations on a
session are serialized behind a per-session lock; an `expected_week`
guard turns double-act races into a 409. Optional JSON-lines persistence
replays sessions to identical state on restart.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import agents as ag
from . import causal as cz
from . import guardian as gd
from . import simulator as sm
from .bench import compute_metrics
from .kvconfig import coerce_fields
from .logs import EpisodeLog, WeekRecord, week_record_to_dict

DEFAULT_TTL_SECONDS = 24 * 3600.0


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class ActionBody(BaseModel):
    price_change_pct: float = 0.0
    ad_spend: float = 0.0
    mode: str = "repaired"  # act only: "raw" | "repaired"
    expected_week: Optional[int] = None


class SessionBody(BaseModel):
    sim: dict = {}
    constraints: dict = {}
    trust_multiplier: float = 150_000.0


@dataclass
class Session:
    session_id: str
    sim: sm.Simulator
    cs: gd.ConstraintSet
    trust_multiplier: float
    log: EpisodeLog
    created: float = field(default_factory=time.time)
    last_touched: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(
        self,
        engine: Optional[cz.FittedEngine] = None,
        persist_dir: Optional[str] = None,
        ttl: float = DEFAULT_TTL_SECONDS,
    ):
        self.engine = engine
        self.persist_dir = persist_dir
        self.ttl = ttl
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        if persist_dir:
            os.makedirs(persist_dir, exist_ok=True)
            self._replay_all()

    # -- lifecycle -------------------------------------------------------

    def create(self, body: SessionBody) -> Session:
        try:
            sim_cfg = sm.SimConfig(**coerce_fields(sm.SimConfig, {k: str(v) for k, v in body.sim.items()}))
            cs = gd.ConstraintSet(**coerce_fields(gd.ConstraintSet, {k: str(v) for k, v in body.constraints.items()}))
        except (ValueError, TypeError, sm.SimulationError) as exc:
            raise ServiceError(400, "invalid_config", str(exc))
        session_id = secrets.token_urlsafe(16)
        session = self._build(session_id, sim_cfg, cs, body.trust_multiplier)
        self._persist(session, {"event": "create", "sim": body.sim,
                                "constraints": body.constraints,
                                "trust_multiplier": body.trust_multiplier})
        return session

    def _build(self, session_id: str, sim_cfg: sm.SimConfig, cs: gd.ConstraintSet,
               trust_multiplier: float) -> Session:
        sim = sm.Simulator(sim_cfg)
        session = Session(
            session_id=session_id,
            sim=sim,
            cs=cs,
            trust_multiplier=trust_multiplier,
            log=EpisodeLog("SERVICE", "interactive", sim_cfg.seed, sim.state),
        )
        with self._lock:
            self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        self._expire()
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(404, "unknown_session", f"no session {session_id}")
        session.last_touched = time.time()
        return session

    def _expire(self) -> None:
        now = time.time()
        with self._lock:
            stale = [k for k, s in self._sessions.items() if now - s.last_touched > self.ttl]
            for k in stale:
                del self._sessions[k]

    # -- persistence -----------------------------------------------------

    def _persist(self, session: Session, event: dict) -> None:
        if not self.persist_dir:
            return
        path = os.path.join(self.persist_dir, f"{session.session_id}.jsonl")
        with open(path, "a") as fh:
            fh.write(json.dumps(event) + "\n")

    def _replay_all(self) -> None:
        for fname in sorted(os.listdir(self.persist_dir)):
            if not fname.endswith(".jsonl"):
                continue
            session_id = fname[: -len(".jsonl")]
            with open(os.path.join(self.persist_dir, fname)) as fh:
                events = [json.loads(line) for line in fh if line.strip()]
            if not events or events[0].get("event") != "create":
                continue
            head = events[0]
            sim_cfg = sm.SimConfig(**coerce_fields(
                sm.SimConfig, {k: str(v) for k, v in head["sim"].items()}))
            cs = gd.ConstraintSet(**coerce_fields(
                gd.ConstraintSet, {k: str(v) for k, v in head["constraints"].items()}))
            session = self._build(session_id, sim_cfg, cs, head["trust_multiplier"])
            for event in events[1:]:
                if event.get("event") != "act":
                    continue
                act_session(session, self, sm.Action(
                    price_change_pct=event["price_change_pct"],
                    ad_spend=event["ad_spend"],
                ), mode=event["mode"], expected_week=None, persist=False)


# -- operations ----------------------------------------------------------


def state_payload(state: sm.MarketState) -> dict:
    return {
        "week": state.week,
        "price": state.price,
        "trust": state.trust,
        "prev_ad_spend": state.prev_ad_spend,
        "cumulative_profit": state.cumulative_profit,
    }


def act_session(
    session: Session,
    store: SessionStore,
    action: sm.Action,
    mode: str,
    expected_week: Optional[int],
    persist: bool = True,
) -> dict:
    if mode not in ("raw", "repaired"):
        raise ServiceError(400, "invalid_mode", f"unknown mode {mode!r}")
    with session.lock:
        state = session.sim.state
        if expected_week is not None and expected_week != state.week:
            raise ServiceError(
                409, "week_already_played",
                f"expected week {expected_week} but session is at week {state.week}",
            )
        repairs: tuple = ()
        if mode == "repaired":
            repair = gd.repair_action(action, state, session.cs)
            executed = repair.safe_action
            repairs = tuple(r.rule_id for r in repair.repairs)
        else:
            executed = action
        try:
            outcome = session.sim.step(executed)
        except sm.SimulationError as exc:
            raise ServiceError(400, "invalid_action", str(exc))
        after = session.sim.state
        verdict = gd.validate_action(executed, state, session.cs)
        rec = WeekRecord(
            week=state.week,
            price_before=state.price,
            trust_before=state.trust,
            prev_ad_spend=state.prev_ad_spend,
            raw_action=action,
            executed_action=executed,
            demand=outcome.demand,
            profit=outcome.profit,
            price_after=after.price,
            trust_after=after.trust,
            cumulative_profit=after.cumulative_profit,
            violations=tuple(v.rule_id for v in verdict.violations),
            repairs=repairs,
        )
        session.log.weeks.append(rec)
        if persist:
            store._persist(session, {
                "event": "act",
                "price_change_pct": action.price_change_pct,
                "ad_spend": action.ad_spend,
                "mode": mode,
            })
        return {
            "outcome": {
                "demand": outcome.demand,
                "revenue": outcome.revenue,
                "profit": outcome.profit,
                "trust_after": outcome.trust_after,
                "factors": outcome.factors,
            },
            "executed_action": {
                "price_change_pct": executed.price_change_pct,
                "ad_spend": executed.ad_spend,
            },
            "repairs": list(repairs),
            "state": state_payload(after),
        }


def create_app(
    engine: Optional[cz.FittedEngine] = None,
    engine_path: Optional[str] = None,
    persist_dir: Optional[str] = None,
    ttl: float = DEFAULT_TTL_SECONDS,
    cors_origins: Optional[list[str]] = None,
) -> FastAPI:
    if engine is None and engine_path and os.path.exists(engine_path):
        engine = cz.load_engine(engine_path)
    store = SessionStore(engine=engine, persist_dir=persist_dir, ttl=ttl)
    app = FastAPI(title="market decision service")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ServiceError)
    async def _service_error(_req: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.post("/sessions")
    def create_session(body: SessionBody):
        session = store.create(body)
        return {"session_id": session.session_id,
                "state": state_payload(session.sim.state)}

    @app.post("/sessions/{session_id}/validate")
    def validate(session_id: str, body: ActionBody):
        session = store.get(session_id)
        action = sm.Action(body.price_change_pct, body.ad_spend)
        state = session.sim.state
        verdict = gd.validate_action(action, state, session.cs)
        repair = gd.repair_action(action, state, session.cs)
        return {"verdict": gd.verdict_to_dict(verdict),
                "repair": gd.repair_to_dict(repair)}

    @app.post("/sessions/{session_id}/estimate")
    def estimate(session_id: str, body: ActionBody):
        session = store.get(session_id)
        if store.engine is None:
            raise ServiceError(409, "engine_missing",
                               "no causal engine artifact is loaded")
        est = cz.estimate_profit_impact(
            body.price_change_pct, body.ad_spend, session.sim.state, store.engine
        )
        payload = est.to_dict()
        payload["long_term_value"] = cz.long_term_value(est, session.trust_multiplier)
        payload["trust_multiplier"] = session.trust_multiplier
        return payload

    @app.post("/sessions/{session_id}/act")
    def act(session_id: str, body: ActionBody):
        session = store.get(session_id)
        action = sm.Action(body.price_change_pct, body.ad_spend)
        return act_session(session, store, action, body.mode, body.expected_week)

    @app.get("/sessions/{session_id}/history")
    def history(session_id: str):
        session = store.get(session_id)
        return {"session_id": session_id,
                "weeks": [week_record_to_dict(r) for r in session.log.weeks]}

    @app.get("/sessions/{session_id}/metrics")
    def metrics(session_id: str):
        session = store.get(session_id)
        if not session.log.weeks:
            return {"metrics": None}
        return {"metrics": asdict(compute_metrics(session.log))}

    return app
