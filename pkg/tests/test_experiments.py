import json

import pytest

from bvlab import io
from bvlab.experiments import SCENARIOS, ScenarioConfig, emit_report, reverify, run_scenario
from bvlab.experiments.cli import main

EXPECTED = {"besov-extension-bound", "layer-estimates", "l1-extension-bound", "trace-recovery",
            "thin-tube-counterexample", "space-comparison", "regularity-audit"}


def tube_config(**kw):
    return ScenarioConfig.from_dict({"scenario": "thin-tube-counterexample",
                                     "options": {"discretized": False}, **kw})


def test_registry():
    assert set(SCENARIOS) == EXPECTED


def test_config_validation():
    with pytest.raises(KeyError):
        ScenarioConfig.from_dict({"scenario": "nope"})
    with pytest.raises(ValueError):
        ScenarioConfig.from_dict({"scenario": "layer-estimates", "colour": "red"})
    cfg = ScenarioConfig.from_dict({"scenario": "layer-estimates", "meshes": [0.03125]})
    assert cfg.meshes == [0.03125] and cfg.options["rho2"] == [0.2, 0.1, 0.05]


def test_report_is_deterministic():
    a, b = run_scenario(tube_config()), run_scenario(tube_config())
    assert io.dumps(a.payload()) == io.dumps(b.payload())
    assert a.passed
    for c in a.checks:
        assert c.lhs is not None and c.rhs is not None


def test_verdicts_recompute_from_saved_payload(tmp_path):
    rep = run_scenario(tube_config())
    path = emit_report(rep, "json", tmp_path)[0]
    payload = json.loads(path.read_text())
    assert reverify(payload) == [c["passed"] for c in payload["checks"]]


def test_emit_formats(tmp_path):
    rep = run_scenario(tube_config())
    emit_report(rep, "csv", tmp_path / "csv")
    rows = io.read_csv(tmp_path / "csv" / "thin_tubes_exact.csv")
    assert rows[0] == ["n", "l1", "variation", "bv", "trace_l1", "ratio"] and len(rows) == 8
    md = emit_report(rep, "md", tmp_path / "md")[0].read_text()
    assert md.count("| lhs | relation | rhs | verdict |") == len(rep.checks)
    timing = json.loads((tmp_path / "md" / "timing.json").read_text())
    assert "wall_time_s" in timing
    data = (tmp_path / "csv" / "thin_tubes_exact.csv").read_text()
    assert "time" not in data
    with pytest.raises(ValueError):
        emit_report(rep, "xml", tmp_path)


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_report(run_scenario(tube_config()), "json", blocker / "sub")


def test_cli_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in EXPECTED)


def test_cli_run_pass(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "thin-tube-counterexample", "options": {"discretized": False}}))
    code = main(["run", "thin-tube-counterexample", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 0
    assert (tmp_path / "o" / "json" / "thin-tube-counterexample.json").exists()
    assert (tmp_path / "o" / "md" / "thin-tube-counterexample.md").exists()
    assert "PASS" in capsys.readouterr().out


def test_cli_failing_verdict_exit_code(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "thin-tube-counterexample", "options": {"discretized": False},
                               "tolerances": {"doubling": [2.5, 3.0]}}))
    assert main(["run", "thin-tube-counterexample", "--config", str(cfg)]) == 2


def test_cli_errors(tmp_path, capsys):
    assert main(["run", "no-such-scenario"]) == 1
    assert main(["run", "layer-estimates", "--mesh", "0.9"]) == 1
    assert main(["run", "layer-estimates", "--config", str(tmp_path / "missing.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_audit(capsys):
    assert main(["audit", "disc", "--mesh", "0.0625"]) == 0
    assert "regularity-audit: PASS" in capsys.readouterr().out


def test_mesh_override():
    rep = run_scenario(ScenarioConfig.from_dict({"scenario": "layer-estimates", "meshes": [1 / 32]}))
    assert {row[0] for row in rep.tables["layer_estimates"][1]} == {1 / 32}
