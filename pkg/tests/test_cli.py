from __future__ import annotations

import json
import threading
import time
from pathlib import Path

import pytest

import courseforge.cli as cli
from conftest import CapturingTransport
from courseforge.config import load_config
from courseforge.errors import InvalidDocument
from courseforge.pipeline.engine import EngineConfig


@pytest.fixture(autouse=True)
def mock_backend(monkeypatch):
    """Route every engine the CLI builds through the in-process mock."""
    from courseforge.config import CliConfig

    unpatched = CliConfig.engine_config

    def wrapped(self) -> EngineConfig:
        config = unpatched(self)
        config.transport = CapturingTransport()
        config.latex_enabled = False
        config.sleeper = lambda s: None
        return config

    monkeypatch.setattr(CliConfig, "engine_config", wrapped)
    yield


def run_cli(args: list[str]) -> int:
    return cli.main(args)


def test_generate_autonomous_populates_six_kinds(tmp_path, capsys):
    code = run_cli([
        "--run-root", str(tmp_path / "runs"), "generate", "Data Mining",
        "--mode", "autonomous", "--topic-hint", "3-week microcourse",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "complete" in out
    run_dir = next((tmp_path / "runs").glob("run-*"))
    art = run_dir / "artifacts"
    assert (art / "objectives.json").exists()
    assert (art / "syllabus.json").exists()
    assert sorted(p.name for p in (art / "chapters").glob("*.json"))
    assert sorted(p.name for p in (art / "decks").glob("*.json"))
    assert sorted(p.name for p in (art / "scripts").glob("*.json"))
    assert sorted(p.name for p in (art / "assessments").glob("*.json"))


def test_generate_with_catalog_file(tmp_path):
    catalog = tmp_path / "catalog.yaml"
    catalog.write_text("teaching_constraints:\n  max_slide_count: 50\n")
    code = run_cli([
        "--run-root", str(tmp_path / "runs"), "generate", "Data Mining",
        "--mode", "catalog_guided", "--catalog", str(catalog),
        "--topic-hint", "3-week microcourse",
    ])
    assert code == 0


def test_feedback_unknown_subtask_exits_1_and_names_valid_set(tmp_path, capsys):
    run_cli([
        "--run-root", str(tmp_path / "runs"), "generate", "Data Mining",
        "--mode", "feedback_guided", "--topic-hint", "3-week microcourse",
    ])
    run_id = next((tmp_path / "runs").glob("run-*")).name
    code = run_cli([
        "--run-root", str(tmp_path / "runs"), "feedback", run_id,
        "--subtask", "quiz_polishing", "--note", "x",
    ])
    assert code == 1
    err = capsys.readouterr().err
    assert "quiz_polishing" in err
    assert "assessment_planning" in err  # valid names listed


def test_feedback_happy_path(tmp_path, capsys):
    run_cli([
        "--run-root", str(tmp_path / "runs"), "generate", "Data Mining",
        "--mode", "feedback_guided", "--topic-hint", "3-week microcourse",
    ])
    run_id = next((tmp_path / "runs").glob("run-*")).name
    code = run_cli([
        "--run-root", str(tmp_path / "runs"), "feedback", run_id,
        "--subtask", "assessment_planning", "--note", "Add variety.",
    ])
    assert code == 0
    assert "assessment_plan" in capsys.readouterr().out


def test_report_renders_four_headline_metrics(tmp_path, capsys):
    run_cli([
        "--run-root", str(tmp_path / "runs"), "generate", "Data Mining",
        "--mode", "autonomous", "--topic-hint", "3-week microcourse",
    ])
    run_id = next((tmp_path / "runs").glob("run-*")).name
    capsys.readouterr()
    code = run_cli(["--run-root", str(tmp_path / "runs"), "report", run_id])
    assert code == 0
    out = capsys.readouterr().out
    for metric in ("Token Usage (millions)", "Inference Time (hrs)", "Human Time (mins)", "Compute Cost (USD)"):
        assert metric in out


def test_report_json_flag(tmp_path, capsys):
    run_cli([
        "--run-root", str(tmp_path / "runs"), "generate", "Data Mining",
        "--mode", "autonomous", "--topic-hint", "3-week microcourse",
    ])
    run_id = next((tmp_path / "runs").glob("run-*")).name
    capsys.readouterr()
    code = run_cli(["--json", "--run-root", str(tmp_path / "runs"), "report", run_id])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["token_total"] > 0


def test_decide_records_to_decision_file_and_unblocks(tmp_path, capsys):
    run_root = str(tmp_path / "runs")
    catalog = tmp_path / "catalog.json"
    catalog.write_text(json.dumps({"teaching_constraints": {"max_slide_count": 50}}))

    codes = {}

    def generate():
        codes["generate"] = run_cli([
            "--run-root", run_root, "generate", "Data Mining",
            "--mode", "full_copilot", "--catalog", str(catalog),
            "--topic-hint", "3-week microcourse",
        ])

    worker = threading.Thread(target=generate, daemon=True)
    worker.start()

    decided = set()
    deadline = time.monotonic() + 30
    while worker.is_alive() and time.monotonic() < deadline:
        runs = list(Path(run_root).glob("run-*"))
        if runs:
            state_file = runs[0] / "state.json"
            if state_file.exists():
                state = json.loads(state_file.read_text())["state"]
                pause = state.get("pending_pause")
                if pause and pause["pause_id"] not in decided:
                    decided.add(pause["pause_id"])
                    assert run_cli(["--run-root", run_root, "decide", runs[0].name, "--approve"]) == 0
        time.sleep(0.05)
    worker.join(timeout=5)
    assert not worker.is_alive()
    assert codes["generate"] == 0
    assert len(decided) == 9


def test_decide_without_pause_is_domain_error(tmp_path, capsys):
    run_cli([
        "--run-root", str(tmp_path / "runs"), "generate", "Data Mining",
        "--mode", "autonomous", "--topic-hint", "3-week microcourse",
    ])
    run_id = next((tmp_path / "runs").glob("run-*")).name
    code = run_cli(["--run-root", str(tmp_path / "runs"), "decide", run_id, "--approve"])
    assert code == 1
    assert "no pending pause" in capsys.readouterr().err


def test_evaluate_automated_and_import(tmp_path, capsys):
    run_root = str(tmp_path / "runs")
    run_cli([
        "--run-root", run_root, "generate", "Data Mining",
        "--mode", "autonomous", "--topic-hint", "3-week microcourse",
    ])
    run_id = next((tmp_path / "runs").glob("run-*")).name
    code = run_cli(["--run-root", run_root, "evaluate", run_id, "--reviewer", "automated"])
    assert code == 0
    out = capsys.readouterr().out
    assert "overall:" in out
    assert (Path(run_root) / run_id / "reports" / "scores_automated.csv").exists()

    csv_path = tmp_path / "human.csv"
    csv_path.write_text(
        "evaluator_id,kind,metric,value\n"
        "e1,LO,Clarity,4\ne1,LO,Measurability,4\ne1,LO,Appropriateness,4\n"
        "e2,LO,Clarity,2\ne2,LO,Measurability,2\ne2,LO,Appropriateness,2\n"
    )
    code = run_cli(["--run-root", run_root, "evaluate", run_id, "--import-csv", str(csv_path)])
    assert code == 0
    assert "LO: 3.00" in capsys.readouterr().out


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["generate"])  # missing course title
    assert excinfo.value.code == 2


def test_resume_unknown_run_exits_1(tmp_path, capsys):
    code = run_cli(["--run-root", str(tmp_path / "runs"), "resume", "run-missing"])
    assert code == 1


def test_flag_precedence_over_config_file_over_default(tmp_path):
    config_file = tmp_path / "cf.toml"
    config_file.write_text(
        "slide_budget = 40\n\n[backend]\nmodel_name = \"file-model\"\n"
    )
    # default
    assert load_config(None).slide_budget == 30
    # file over default
    from_file = load_config(config_file)
    assert from_file.slide_budget == 40
    assert from_file.model_name == "file-model"
    # flag over file
    merged = load_config(config_file, {"slide_budget": 55, "model_name": "flag-model"})
    assert merged.slide_budget == 55
    assert merged.model_name == "flag-model"
    assert merged.base_url == load_config(None).base_url  # untouched fields keep defaults


def test_config_file_must_not_store_secrets(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("backend:\n  api_key: sk-oops\n")
    with pytest.raises(InvalidDocument):
        load_config(bad)


def test_api_key_never_persisted_in_run_dir(tmp_path, monkeypatch):
    secret = "sk-super-secret-value-42"
    monkeypatch.setenv("COURSEFORGE_API_KEY", secret)
    run_root = tmp_path / "runs"
    run_cli([
        "--run-root", str(run_root), "generate", "Data Mining",
        "--mode", "autonomous", "--topic-hint", "3-week microcourse",
    ])
    hits = [
        path
        for path in run_root.rglob("*")
        if path.is_file() and secret in path.read_text(encoding="utf-8", errors="ignore")
    ]
    assert hits == []
