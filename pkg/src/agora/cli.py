"""Command-line entry points for the decision stack."""

from __future__ import annotations

import json
import sys

import click

from . import agents as ag
from . import bench as bh
from . import causal as cz
from . import checker as ck
from . import guardian as gd
from . import simulator as sm
from .kvconfig import load_config
from .logs import write_episode_csv


def _overrides(pairs: tuple[str, ...]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.BadParameter(f"expected key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


@click.group()
def main() -> None:
    """Market decision stack: simulator, guardian, verifier, causal engine."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="key=value simulator config file")
@click.option("--set", "sets", multiple=True, help="override any config field, key=value")
@click.option("--weeks", default=52, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--bias", type=click.Choice(["NEUTRAL", "VOLUME", "MARGIN"]), default="NEUTRAL")
@click.option("--out", "out_path", type=click.Path(), default="episode.csv", show_default=True)
def simulate(config_path, sets, weeks, seed, bias, out_path) -> None:
    """Run one Guardian-governed scripted episode and write its CSV log."""
    cfg = load_config(sm.SimConfig, config_path, _overrides(sets))
    cs = gd.ConstraintSet()
    sim = sm.Simulator(cfg, seed=seed)
    strategist = ag.scripted_strategist(bias, seed=seed)
    log = ag.run_architecture(
        ag.LLM_GUARDIAN, strategist, sim, cs,
        weeks=weeks, context=ag.scenario_context(bias),
    )
    ag.annotate_violations(log, cs)
    write_episode_csv(log, out_path)
    click.echo(f"wrote {weeks} weeks to {out_path}")


@main.group()
def guardian() -> None:
    """Constraint engine utilities."""


@guardian.command("check")
@click.argument("payload", required=False)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--set", "sets", multiple=True)
def guardian_check(payload, config_path, sets) -> None:
    """Validate and repair a JSON action+state read from arg or stdin.

    Payload shape: {"action": {"price_change_pct", "ad_spend"},
    "state": {"week", "price", "trust", "prev_ad_spend"}}
    """
    raw = payload if payload else sys.stdin.read()
    data = json.loads(raw)
    cs = load_config(gd.ConstraintSet, config_path, _overrides(sets))
    action = sm.Action(
        price_change_pct=float(data["action"].get("price_change_pct", 0.0)),
        ad_spend=float(data["action"].get("ad_spend", 0.0)),
    )
    state = sm.MarketState(
        week=int(data["state"].get("week", 0)),
        price=float(data["state"]["price"]),
        trust=float(data["state"].get("trust", 0.7)),
        prev_ad_spend=float(data["state"].get("prev_ad_spend", 0.0)),
    )
    verdict = gd.validate_action(action, state, cs)
    repair = gd.repair_action(action, state, cs)
    click.echo(json.dumps(
        {"verdict": gd.verdict_to_dict(verdict), "repair": gd.repair_to_dict(repair)},
        indent=2,
    ))


@main.command()
@click.option("--horizon", default=52, show_default=True)
@click.option("--price-choices", default="-50,0,20,60", show_default=True)
@click.option("--ad-choices", default="0,500,1000,2000,4000,5000", show_default=True)
@click.option("--quantum", default=0.01, show_default=True)
@click.option("--initial-price", default=100.0, show_default=True)
@click.option("--initial-ad", default=0.0, show_default=True)
@click.option("--max-states", default=50_000_000, show_default=True,
              help="memory budget as a distinct-state cap")
@click.option("--json", "as_json", is_flag=True, help="emit the report as JSON")
def verify(horizon, price_choices, ad_choices, quantum, initial_price, initial_ad,
           max_states, as_json) -> None:
    """Exhaustively check the Guardian-governed state machine."""
    cfg = ck.CheckerConfig(
        price_choices=tuple(float(x) for x in price_choices.split(",")),
        ad_choices=tuple(float(x) for x in ad_choices.split(",")),
        horizon=horizon,
        price_quantum=quantum,
        initial_price=initial_price,
        initial_ad=initial_ad,
        max_distinct_states=max_states,
    )
    report = ck.explore(cfg)
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        for line in ck.summary_lines(report):
            click.echo(line)
    sys.exit(1 if report.violations else 0)


@main.group()
def causal() -> None:
    """Counterfactual engine utilities."""


@causal.command("fit")
@click.option("--data", "data_path", type=click.Path(exists=True), default=None,
              help="observation CSV; generated from the simulator when omitted")
@click.option("--episodes", default=200, show_default=True)
@click.option("--weeks", default=40, show_default=True)
@click.option("--seed", default=123, show_default=True)
@click.option("--trees", default=200, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default="engine.pkl", show_default=True)
def causal_fit(data_path, episodes, weeks, seed, trees, out_path) -> None:
    cfg = cz.EngineConfig(n_trees=trees, seed=seed)
    if data_path:
        obs = cz.observations_from_csv(data_path)
    else:
        obs = cz.generate_observations(
            sm.SimConfig(), n_episodes=episodes, weeks_per_episode=weeks, seed=seed
        )
    engine = cz.fit(obs, cfg)
    cz.save_engine(engine, out_path)
    click.echo(f"fitted on {len(obs)} observations; saved to {out_path}")


@causal.command("predict")
@click.argument("engine_path", type=click.Path(exists=True))
@click.option("--price-change", default=0.0, show_default=True)
@click.option("--ad-spend", default=0.0, show_default=True)
@click.option("--price", default=100.0, show_default=True)
@click.option("--trust", default=0.7, show_default=True)
@click.option("--prev-ad", default=0.0, show_default=True)
@click.option("--week", default=0, show_default=True)
@click.option("--multiplier", default=150_000.0, show_default=True)
def causal_predict(engine_path, price_change, ad_spend, price, trust, prev_ad,
                   week, multiplier) -> None:
    engine = cz.load_engine(engine_path)
    state = sm.MarketState(week=week, price=price, trust=trust, prev_ad_spend=prev_ad)
    est = cz.estimate_profit_impact(price_change, ad_spend, state, engine)
    payload = est.to_dict()
    payload["long_term_value"] = cz.long_term_value(est, multiplier)
    click.echo(json.dumps(payload, indent=2))


@main.group()
def bench() -> None:
    """Benchmark matrix and trust-multiplier sweep."""


_ARCH_ALIASES = {"llm-only": ag.LLM_ONLY, "guardian": ag.LLM_GUARDIAN, "full": ag.FULL_STACK}


@bench.command("run")
@click.option("--arch", default="llm-only,guardian,full", show_default=True)
@click.option("--scenario", default="neutral,volume,margin", show_default=True)
@click.option("--weeks", default=52, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default="bench_out", show_default=True)
def bench_run(arch, scenario, weeks, seed, out_dir) -> None:
    archs = [_ARCH_ALIASES[a.strip()] for a in arch.split(",")]
    scenarios = [s.strip().upper() for s in scenario.split(",")]
    cfg = bh.BenchConfig(weeks=weeks, seed=seed)
    results = bh.run_matrix(archs, scenarios, cfg, out_dir=out_dir)
    for log, summary in results:
        click.echo(
            f"{log.architecture:12s} {log.scenario:8s} "
            f"total={summary.total_profit:14.2f} trust={summary.final_trust:.3f} "
            f"sharpe={summary.sharpe:6.2f} violations={summary.violation_rate_pct:.1f}%"
        )
    click.echo(f"results written to {out_dir}")


@bench.command("sweep")
@click.option("--multipliers", default="50000,100000,150000,200000,300000", show_default=True)
@click.option("--weeks", default=52, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default="sweep_out", show_default=True)
def bench_sweep(multipliers, weeks, seed, out_dir) -> None:
    mults = [float(m) for m in multipliers.split(",")]
    cfg = bh.BenchConfig(weeks=weeks, seed=seed)
    results = bh.run_trust_sweep(cfg, mults, out_dir=out_dir)
    for mult, _log, summary in results:
        click.echo(
            f"multiplier={mult:>9.0f} total={summary.total_profit:14.2f} "
            f"sharpe={summary.sharpe:6.2f} trust={summary.final_trust:.3f}"
        )
    click.echo(f"results written to {out_dir}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--engine", "engine_path", type=click.Path(), default=None)
@click.option("--persist-dir", type=click.Path(), default=None)
@click.option("--ttl", default=24 * 3600.0, show_default=True)
def serve(host, port, engine_path, persist_dir, ttl) -> None:
    """Start the HTTP session service."""
    import uvicorn

    from .service import create_app

    app = create_app(engine_path=engine_path, persist_dir=persist_dir, ttl=ttl)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
