from __future__ import annotations

import threading
import time

import pytest

from conftest import CapturingTransport, fixture_course
from courseforge.catalog import validate_catalog
from courseforge.model import ModeId
from courseforge.pipeline.engine import AbandonedRun, ModeError, PipelineEngine
from courseforge.pipeline.state import DAG, CoPilotDecision, EventKind, SubtaskId

CATALOG = {"teaching_constraints": {"max_slide_count": 50}}


def artifact_bytes(run_dir):
    out = {}
    art = run_dir / "artifacts"
    for path in sorted(art.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            out[str(path.relative_to(art))] = path.read_bytes()
    return out


def approve_all(engine: PipelineEngine, run_id: str) -> threading.Thread:
    def work():
        seen = set()
        while True:
            try:
                state = engine.load_state_for(run_id)
            except Exception:
                time.sleep(0.01)
                continue
            if state.closed:
                return
            pause = state.pending_pause
            if pause and pause.pause_id not in seen:
                seen.add(pause.pause_id)
                engine.decisions.submit(run_id, CoPilotDecision(action="approve"))
            time.sleep(0.01)

    thread = threading.Thread(target=work, daemon=True)
    thread.start()
    return thread


def test_autonomous_run_has_all_kinds_and_zero_pauses(engine_factory):
    engine = engine_factory()
    package = engine.run(fixture_course(ModeId.AUTONOMOUS))
    assert package is not None
    assert len(package.chapters) == len(package.decks) == len(package.scripts) == len(package.assessments)
    assert package.objectives.objectives and package.syllabus.weekly_entries
    run_id = package.manifest.run_id
    events = engine.events_for(run_id).read_all()
    assert not [e for e in events if e.kind is EventKind.PAUSE_ISSUED]
    state = engine.load_state_for(run_id)
    assert not state.feedback_log or all(n.author == "agent" for n in state.feedback_log)


def test_full_copilot_emits_nine_pauses_and_matches_autonomous(engine_factory, tmp_path):
    copilot = engine_factory()
    course = fixture_course(ModeId.FULL_COPILOT)
    state = copilot.start_run(course, validate_catalog(CATALOG))
    approve_all(copilot, state.run_id)
    package = copilot.resume(state.run_id)
    assert package is not None
    events = copilot.events_for(state.run_id).read_all()
    pauses = [e for e in events if e.kind is EventKind.PAUSE_ISSUED]
    assert len(pauses) == 9
    assert {e.payload["subtask"] for e in pauses} == {s.value for s in SubtaskId}

    autonomous = engine_factory()
    autonomous.run(fixture_course(ModeId.AUTONOMOUS))
    runs = sorted((tmp_path / "runs").glob("run-*"))
    assert artifact_bytes(runs[0]) == artifact_bytes(runs[1])


def test_catalog_guided_injects_catalog_into_every_deliberation(engine_factory):
    capture = CapturingTransport()
    engine = engine_factory(transport=capture)
    engine.run(fixture_course(ModeId.CATALOG_GUIDED), validate_catalog(CATALOG))
    firsts = capture.first_user_messages()
    assert firsts
    for prompt in firsts:
        assert "### Context: educator_catalog" in prompt


def test_catalog_slide_budget_overrides_default(engine_factory):
    capture = CapturingTransport()
    engine = engine_factory(transport=capture)
    package = engine.run(fixture_course(ModeId.CATALOG_GUIDED), validate_catalog(CATALOG))
    run_id = package.manifest.run_id
    assert engine.load_state_for(run_id).slide_budget == 50
    slide_briefs = [m for m in capture.first_user_messages() if "Slide budget:" in m]
    assert slide_briefs
    assert all("Slide budget: 50" in m for m in slide_briefs)


def test_default_slide_budget_without_catalog(engine_factory):
    capture = CapturingTransport()
    engine = engine_factory(transport=capture)
    package = engine.run(fixture_course(ModeId.AUTONOMOUS))
    assert engine.load_state_for(package.manifest.run_id).slide_budget == 30
    slide_briefs = [m for m in capture.first_user_messages() if "Slide budget:" in m]
    assert all("Slide budget: 30" in m for m in slide_briefs)


def test_autonomous_prompts_carry_no_catalog_block(engine_factory):
    capture = CapturingTransport()
    engine = engine_factory(transport=capture)
    engine.run(fixture_course(ModeId.AUTONOMOUS))
    assert all("educator_catalog" not in m for m in capture.first_user_messages())


def test_mode_catalog_consistency_enforced(engine_factory):
    engine = engine_factory()
    with pytest.raises(ModeError):
        engine.run(fixture_course(ModeId.CATALOG_GUIDED), None)
    with pytest.raises(ModeError):
        engine.run(fixture_course(ModeId.FULL_COPILOT), None)
    with pytest.raises(ModeError):
        engine.run(fixture_course(ModeId.AUTONOMOUS), validate_catalog(CATALOG))


def test_event_log_covers_every_state_transition(engine_factory):
    engine = engine_factory()
    package = engine.run(fixture_course(ModeId.AUTONOMOUS))
    run_id = package.manifest.run_id
    state = engine.load_state_for(run_id)
    events = engine.events_for(run_id).read_all()
    completed_events = {
        e.payload["subtask"] for e in events if e.kind is EventKind.SUBTASK_COMPLETED
    }
    assert {s.value for s in state.completed} <= completed_events
    assert any(e.kind is EventKind.RUN_FINISHED for e in events)


def test_dag_safety_in_event_order(engine_factory):
    engine = engine_factory()
    package = engine.run(fixture_course(ModeId.AUTONOMOUS))
    events = engine.events_for(package.manifest.run_id).read_all()
    completed: set[SubtaskId] = set()
    for event in events:
        if event.kind is EventKind.SUBTASK_STARTED:
            subtask = SubtaskId(event.payload["subtask"])
            for prerequisite in DAG[subtask]:
                assert prerequisite in completed
        elif event.kind is EventKind.SUBTASK_COMPLETED:
            completed.add(SubtaskId(event.payload["subtask"]))
    assert completed == set(SubtaskId)


def test_concurrent_analyze_flag_preserves_dag(engine_factory):
    engine = engine_factory(concurrent_analyze=True)
    package = engine.run(fixture_course(ModeId.AUTONOMOUS))
    assert package is not None
    events = engine.events_for(package.manifest.run_id).read_all()
    started = [e.payload["subtask"] for e in events if e.kind is EventKind.SUBTASK_STARTED]
    syllabus_at = started.index("syllabus_design")
    assert set(started[:syllabus_at]) == {
        "objectives_definition", "audience_analysis", "resource_assessment",
    }


def test_copilot_modify_triggers_rerun_then_new_pause(engine_factory):
    engine = engine_factory()
    course = fixture_course(ModeId.FULL_COPILOT)
    state = engine.start_run(course, validate_catalog(CATALOG))
    run_id = state.run_id

    def scripted():
        sent_modify = False
        seen = set()
        while True:
            try:
                current = engine.load_state_for(run_id)
            except Exception:
                time.sleep(0.01)
                continue
            if current.closed:
                return
            pause = current.pending_pause
            if pause and pause.pause_id not in seen:
                seen.add(pause.pause_id)
                if not sent_modify and pause.subtask is SubtaskId.OBJECTIVES_DEFINITION:
                    sent_modify = True
                    engine.decisions.submit(
                        run_id, CoPilotDecision(action="modify", text="Sharpen verbs.")
                    )
                else:
                    engine.decisions.submit(run_id, CoPilotDecision(action="approve"))
            time.sleep(0.01)

    threading.Thread(target=scripted, daemon=True).start()
    package = engine.resume(run_id)
    assert package is not None
    events = engine.events_for(run_id).read_all()
    pauses = [e for e in events if e.kind is EventKind.PAUSE_ISSUED]
    assert len(pauses) == 10  # nine subtasks + one re-pause after the modify rerun
    reruns = [
        e for e in events
        if e.kind is EventKind.SUBTASK_STARTED and e.payload.get("rerun")
    ]
    assert len(reruns) == 1
    final = engine.load_state_for(run_id)
    notes = [n for n in final.feedback_log if n.author == "human"]
    assert notes and notes[0].suggestion == "Sharpen verbs."


def test_unanswered_pause_abandons_but_state_persists(engine_factory):
    engine = engine_factory(pause_timeout=0.3)
    state = engine.start_run(fixture_course(ModeId.FULL_COPILOT), validate_catalog(CATALOG))
    with pytest.raises(AbandonedRun):
        engine.resume(state.run_id)
    persisted = engine.load_state_for(state.run_id)
    assert persisted.pending_pause is not None
    assert SubtaskId.OBJECTIVES_DEFINITION in persisted.completed
