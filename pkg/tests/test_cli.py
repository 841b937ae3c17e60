"""CLI, config-file, and golden-episode regression tests."""

import json
import os
from pathlib import Path

import pytest
from click.testing import CliRunner

import agora.agents as ag
import agora.guardian as gd
import agora.simulator as sm
from agora.cli import main
from agora.kvconfig import dump_config, load_config, parse_kv_text
from agora.logs import write_episode_csv

GOLDEN = Path(__file__).parent / "data" / "golden_episode.csv"


class TestGoldenEpisode:
    def test_episode_reproduces_frozen_csv(self, tmp_path):
        """A fixed scripted policy with a fixed seed is bit-stable."""
        cs = gd.ConstraintSet()
        sim = sm.Simulator(sm.SimConfig(), seed=42)
        log = ag.run_architecture(
            ag.LLM_GUARDIAN,
            ag.scripted_strategist(ag.NEUTRAL, seed=42),
            sim,
            cs,
            weeks=52,
            context=ag.scenario_context(ag.NEUTRAL),
        )
        ag.annotate_violations(log, cs)
        out = tmp_path / "episode.csv"
        write_episode_csv(log, out)
        assert out.read_bytes() == GOLDEN.read_bytes()


class TestKvConfig:
    def test_parse_kv_text(self):
        text = "# comment\nbase_demand = 900\n\ntrust_mode=V5\n"
        assert parse_kv_text(text) == {"base_demand": "900", "trust_mode": "V5"}

    def test_load_config_with_overrides(self, tmp_path):
        path = tmp_path / "sim.cfg"
        path.write_text("base_demand=900\ninitial_trust=0.5\n")
        cfg = load_config(sm.SimConfig, str(path), {"initial_trust": "0.6"})
        assert cfg.base_demand == 900.0
        assert cfg.initial_trust == 0.6

    def test_dump_round_trip(self, tmp_path):
        cfg = sm.SimConfig(base_demand=850.0)
        path = tmp_path / "out.cfg"
        path.write_text(dump_config(cfg))
        assert load_config(sm.SimConfig, str(path), {}) == cfg

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "sim.cfg"
        path.write_text("no_such_field=1\n")
        with pytest.raises(ValueError):
            load_config(sm.SimConfig, str(path), {})


class TestSimulateCommand:
    def test_writes_episode_csv(self, tmp_path):
        out = tmp_path / "ep.csv"
        result = CliRunner().invoke(
            main, ["simulate", "--weeks", "5", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert len(lines) == 6  # header + 5 weeks
        assert lines[0].startswith("week,price,")

    def test_set_overrides(self, tmp_path):
        out = tmp_path / "ep.csv"
        result = CliRunner().invoke(
            main,
            ["simulate", "--weeks", "2", "--out", str(out), "--set", "initial_trust=2.0"],
        )
        assert result.exit_code != 0


class TestGuardianCheckCommand:
    def test_check_reports_verdict_and_repair(self):
        payload = json.dumps(
            {"action": {"price_change_pct": 60.0, "ad_spend": 0.0}, "state": {"price": 100.0}}
        )
        result = CliRunner().invoke(main, ["guardian", "check", payload])
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["verdict"]["is_valid"] is False
        assert data["repair"]["safe_action"]["price_change_pct"] == pytest.approx(50.0)

    def test_check_reads_stdin(self):
        payload = json.dumps({"action": {}, "state": {"price": 100.0}})
        result = CliRunner().invoke(main, ["guardian", "check"], input=payload)
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["verdict"]["is_valid"] is True


class TestVerifyCommand:
    def test_horizon_one_json(self):
        result = CliRunner().invoke(main, ["verify", "--horizon", "1", "--json"])
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["states_found"] == 24
        assert data["violations"] == []

    def test_human_summary(self):
        result = CliRunner().invoke(main, ["verify", "--horizon", "2"])
        assert result.exit_code == 0, result.output
        assert "Distinct States" in result.output


class TestBenchCommand:
    def test_matrix_without_engine(self, tmp_path):
        out = tmp_path / "bench"
        result = CliRunner().invoke(
            main,
            [
                "bench", "run",
                "--arch", "llm-only,guardian",
                "--scenario", "volume",
                "--weeks", "4",
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        assert (out / "table1.csv").is_file()
        assert "LLM_GUARDIAN" in result.output


class TestCausalCommands:
    def test_fit_then_predict(self, tmp_path):
        engine_path = tmp_path / "engine.pkl"
        fit = CliRunner().invoke(
            main,
            [
                "causal", "fit",
                "--episodes", "10",
                "--weeks", "20",
                "--trees", "10",
                "--out", str(engine_path),
            ],
        )
        assert fit.exit_code == 0, fit.output
        assert engine_path.is_file()

        predict = CliRunner().invoke(
            main,
            ["causal", "predict", str(engine_path), "--price-change", "5.0"],
        )
        assert predict.exit_code == 0, predict.output
        data = json.loads(predict.output)
        assert set(data) == {
            "profit_change",
            "trust_change",
            "profit_confidence",
            "trust_confidence",
            "long_term_value",
        }
