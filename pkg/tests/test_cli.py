import json

import pytest

from twinproto.cli import main
from twinproto.harness import run_batch
from twinproto.protocol import Strategy
from twinproto.scenarios import (
    DEFAULT_SEED,
    ScenarioError,
    ScenarioSpec,
    apply_overrides,
    load_scenario,
    scenario_from_dict,
)


def write_scenario(tmp_path, name="scenario.json", **fields):
    path = tmp_path / name
    path.write_text(json.dumps(fields), encoding="utf-8")
    return path


# --- scenario parsing ---------------------------------------------------------------

def test_scenario_defaults_and_fixed_seed():
    spec = scenario_from_dict({"kind": "single_config", "config": "e1"})
    assert spec.seed == DEFAULT_SEED
    assert spec.strategy.version == "v2"
    assert spec.strategy.identity_mode == "none"


def test_scenario_rejects_unknown_keys():
    with pytest.raises(ScenarioError, match="unknown scenario keys"):
        scenario_from_dict({"kind": "single_config", "config": "e1", "trails": 10})


def test_scenario_kind_constraints():
    with pytest.raises(ScenarioError):
        scenario_from_dict({"kind": "clash_s7", "config": "e1"})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"kind": "deadlock_v1", "config": "e1"})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"kind": "double_pair", "leader_rule": "fixed_red"})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"kind": "single_config"})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"kind": "single_config", "config": "e1", "trials": 0})


def test_scenario_overrides_win_over_file_values(tmp_path):
    path = write_scenario(tmp_path, kind="single_config", config="e1", trials=10)
    spec = load_scenario(path)
    updated = apply_overrides(spec, trials=99, identity_mode="per_pair")
    assert updated.trials == 99
    assert updated.strategy.identity_mode == "per_pair"
    assert updated.config == "e1"


def test_scenario_presets_match_packaged_files():
    import pathlib

    root = pathlib.Path(__file__).resolve().parent.parent / "scenarios"
    clash = load_scenario(root / "clash_s7.json")
    assert clash.kind == "clash_s7"
    assert clash.config == "e2"
    assert clash.strategy.leader_rule == "fixed_yellow"
    double = load_scenario(root / "double_pair_random.json")
    assert double.strategy.pairing_rule == "random"


# --- predict ---------------------------------------------------------------------------

def test_predict_prints_exact_tables(capsys):
    assert main(["predict", "e3"]) == 0
    out = capsys.readouterr().out
    assert "C+ 0.833333333333  = 5/6" in out
    assert "= 9/10" in out
    assert "forbidden: none" in out


def test_predict_prints_forbidden_pairs(capsys):
    assert main(["predict", "e1"]) == 0
    out = capsys.readouterr().out
    assert "forbidden: (D+,V-)" in out


def test_predict_intercepted_placement(capsys):
    assert main(["predict", "h"]) == 0
    out = capsys.readouterr().out
    assert out.count("= 1/3") >= 3
    assert "forbidden: (U+,U-)" in out


def test_predict_unknown_selector(capsys):
    assert main(["predict", "e9"]) == 2
    assert "unknown config" in capsys.readouterr().err


# --- simulate -----------------------------------------------------------------------------

def test_simulate_writes_json_report(tmp_path, capsys):
    scenario = write_scenario(
        tmp_path, kind="single_config", config="e1", identity_mode="none",
        trials=5000, seed=7,
    )
    out_path = tmp_path / "report.json"
    code = main([
        "simulate", "--scenario", str(scenario), "--format", "json",
        "--out", str(out_path),
    ])
    assert code == 0
    report = json.loads(out_path.read_text(encoding="utf-8"))
    assert report["scenario"]["trials"] == 5000
    assert report["all_bounds_ok"] is True
    spec = ScenarioSpec(kind="single_config", config="e1",
                        strategy=Strategy(identity_mode="none"), trials=5000, seed=7)
    assert report == run_batch(spec).to_json_dict()
    out = capsys.readouterr().out
    assert "tvd_vs_quantum" in out


def test_simulate_csv_to_stdout(tmp_path, capsys):
    scenario = write_scenario(
        tmp_path, kind="single_config", config="e3", identity_mode="none",
        trials=2000, seed=3,
    )
    assert main(["simulate", "--scenario", str(scenario), "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("row_type,key,empirical,oracle,quantum")


def test_simulate_applies_overrides(tmp_path, capsys):
    scenario = write_scenario(
        tmp_path, kind="single_config", config="e1", identity_mode="none",
        trials=100000, seed=3,
    )
    code = main([
        "simulate", "--scenario", str(scenario), "--trials", "2000",
        "--seed", "11", "--identity-mode", "per_pair",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "trials=2000" in out
    assert "seed=11" in out
    assert "identity=per_pair" in out


def test_simulate_rejects_bad_scenario(tmp_path, capsys):
    scenario = write_scenario(tmp_path, kind="single_config", config="e1", bogus=1)
    assert main(["simulate", "--scenario", str(scenario)]) == 1
    assert "unknown scenario keys" in capsys.readouterr().err


def test_simulate_rejects_missing_file(tmp_path, capsys):
    assert main(["simulate", "--scenario", str(tmp_path / "nope.json")]) == 1


def test_simulate_exits_three_on_unexpected_deadlock(tmp_path, capsys):
    scenario = write_scenario(
        tmp_path, kind="single_config", config="e3", version="v1", trials=20,
    )
    assert main(["simulate", "--scenario", str(scenario)]) == 3
    assert "deadlock" in capsys.readouterr().err


def test_simulate_exits_two_on_bound_violation(tmp_path, capsys, monkeypatch):
    scenario = write_scenario(
        tmp_path, kind="single_config", config="e1", identity_mode="none",
        trials=500, seed=5,
    )
    import twinproto.cli as cli_mod

    real_run_batch = cli_mod.run_batch

    def broken_run_batch(spec, workers=1):
        result = real_run_batch(spec, workers=workers)
        result.all_bounds_ok = False
        return result

    monkeypatch.setattr(cli_mod, "run_batch", broken_run_batch)
    assert main(["simulate", "--scenario", str(scenario)]) == 2
    assert "bound" in capsys.readouterr().err


def test_simulate_expected_deadlock_is_success(tmp_path, capsys):
    scenario = write_scenario(tmp_path, kind="deadlock_v1", config="e3", trials=50)
    assert main(["simulate", "--scenario", str(scenario)]) == 0
    out = capsys.readouterr().out
    assert "deadlock: true" in out
