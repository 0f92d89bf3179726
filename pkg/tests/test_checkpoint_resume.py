from __future__ import annotations

import pytest

from conftest import fixture_course
from courseforge.errors import UnknownRun
from courseforge.model import ModeId
from courseforge.pipeline.state import (
    SUBTASK_ORDER,
    CorruptCheckpoint,
    SubtaskId,
    load_state,
)


def artifact_bytes(run_dir):
    out = {}
    art = run_dir / "artifacts"
    for path in sorted(art.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            out[str(path.relative_to(art))] = path.read_bytes()
    return out


def test_kill_after_syllabus_design_resumes_at_slide_planning(engine_factory):
    engine = engine_factory()
    state = engine.start_run(fixture_course(ModeId.AUTONOMOUS))
    assert engine.resume(state.run_id, stop_after=SubtaskId.SYLLABUS_DESIGN) is None
    reloaded = engine.load_state_for(state.run_id)
    assert reloaded.next_subtask() is SubtaskId.SLIDE_PLANNING
    package = engine.resume(state.run_id)
    assert package is not None


@pytest.mark.parametrize("stop", list(SUBTASK_ORDER))
def test_kill_and_resume_after_every_subtask_matches_uninterrupted(
    engine_factory, tmp_path, stop
):
    interrupted = engine_factory()
    state = interrupted.start_run(fixture_course(ModeId.AUTONOMOUS))
    interrupted.resume(state.run_id, stop_after=stop)
    # a fresh engine plays the resumed half, as a new process would
    resumer = engine_factory()
    package = resumer.resume(state.run_id)
    assert package is not None

    straight = engine_factory()
    straight.run(fixture_course(ModeId.AUTONOMOUS))

    runs = sorted((tmp_path / "runs").glob("run-*"))
    assert len(runs) == 2
    assert artifact_bytes(runs[0]) == artifact_bytes(runs[1])


def test_resume_nothing_twice_is_identity(engine_factory):
    engine = engine_factory()
    state = engine.start_run(fixture_course(ModeId.AUTONOMOUS))
    first = engine.resume(state.run_id)
    events_before = len(engine.events_for(state.run_id).read_all())
    second = engine.resume(state.run_id)
    assert second is not None
    assert second.to_dict() == first.to_dict()
    assert len(engine.events_for(state.run_id).read_all()) == events_before


def test_checkpoint_reload_is_identity(engine_factory):
    engine = engine_factory()
    state = engine.start_run(fixture_course(ModeId.AUTONOMOUS))
    engine.resume(state.run_id, stop_after=SubtaskId.ASSESSMENT_PLANNING)
    paths = engine.paths_for(state.run_id)
    loaded = load_state(paths)
    assert loaded.to_dict() == load_state(paths).to_dict()
    assert len(loaded.completed) == 6


def test_edited_checkpoint_bytes_detected(engine_factory):
    engine = engine_factory()
    state = engine.start_run(fixture_course(ModeId.AUTONOMOUS))
    engine.resume(state.run_id, stop_after=SubtaskId.OBJECTIVES_DEFINITION)
    paths = engine.paths_for(state.run_id)
    tampered = paths.state_file.read_text().replace("Data Mining", "Data Rigging", 1)
    paths.state_file.write_text(tampered)
    with pytest.raises(CorruptCheckpoint):
        load_state(paths)


def test_unknown_run_rejected(engine_factory):
    engine = engine_factory()
    with pytest.raises(UnknownRun):
        engine.resume("run-never-existed")


def test_resume_falls_back_to_latest_checkpoint(engine_factory):
    engine = engine_factory()
    state = engine.start_run(fixture_course(ModeId.AUTONOMOUS))
    engine.resume(state.run_id, stop_after=SubtaskId.AUDIENCE_ANALYSIS)
    paths = engine.paths_for(state.run_id)
    paths.state_file.unlink()
    recovered = load_state(paths)
    assert SubtaskId.AUDIENCE_ANALYSIS in recovered.completed
    package = engine.resume(state.run_id)
    assert package is not None
