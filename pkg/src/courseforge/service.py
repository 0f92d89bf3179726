"""HTTP facade over the pipeline: run lifecycle, pauses, events, artifacts.

Request handlers are stateless; everything mutable flows through the
single-writer engine guarded by per-run locks. Decisions are idempotent
by client-supplied decision_id, and exactly one decision wins a pause:
the loser gets 409 and the pipeline advances once.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from typing import Iterator, Optional

from fastapi import Depends, FastAPI, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse

from courseforge.catalog import EducatorCatalog, catalog_hash, validate_catalog
from courseforge.config import CliConfig
from courseforge.errors import CourseforgeError, UnknownRun
from courseforge.model import CourseSpec
from courseforge.pipeline.engine import AbandonedRun, PipelineEngine, SubtaskFailed
from courseforge.pipeline.state import (
    CoPilotDecision,
    EventKind,
    FeedbackNote,
    SubtaskId,
    load_state,
    save_state,
)
from courseforge.util import read_json, utcnow_iso

READ, DECIDE, ADMIN = "read", "decide", "admin"


@dataclass(frozen=True)
class ApiSession:
    token: str
    scopes: frozenset[str]

    def allows(self, scope: str) -> bool:
        return scope in self.scopes or ADMIN in self.scopes


class ApiError(Exception):
    def __init__(self, status: int, title: str, detail: str = ""):
        self.status = status
        self.title = title
        self.detail = detail
        super().__init__(f"{status} {title}: {detail}")


def problem(status: int, title: str, detail: str = "") -> JSONResponse:
    return JSONResponse(
        status_code=status,
        media_type="application/problem+json",
        content={"type": "about:blank", "title": title, "status": status, "detail": detail},
    )


@dataclass
class RunHandle:
    thread: threading.Thread
    error: Optional[str] = None


class ServiceCoordinator:
    """Owns run threads and the exactly-once decision bookkeeping."""

    def __init__(self, engine: PipelineEngine):
        self.engine = engine
        self.handles: dict[str, RunHandle] = {}
        self._claimed_pauses: dict[str, set[str]] = {}
        self._decision_ids: dict[str, set[str]] = {}
        self._guard = threading.Lock()

    def start_run(self, course: CourseSpec, catalog: Optional[EducatorCatalog]) -> str:
        state = self.engine.start_run(course, catalog)
        run_id = state.run_id

        def work() -> None:
            try:
                self.engine.resume(run_id)
            except (SubtaskFailed, AbandonedRun, CourseforgeError) as exc:
                with self._guard:
                    self.handles[run_id].error = str(exc)

        thread = threading.Thread(target=work, name=f"run-{run_id}", daemon=True)
        with self._guard:
            self.handles[run_id] = RunHandle(thread=thread)
        thread.start()
        return run_id

    def busy(self, run_id: str) -> bool:
        handle = self.handles.get(run_id)
        return handle is not None and handle.thread.is_alive()

    def submit_decision(self, run_id: str, decision: CoPilotDecision) -> str:
        """Returns applied | duplicate | conflict | no_pause."""
        with self.engine.decisions.run_lock(run_id):
            state = self.engine.load_state_for(run_id)
            known = self._decision_ids.setdefault(run_id, set())
            if decision.decision_id in known or decision.decision_id in state.applied_decision_ids:
                return "duplicate"
            pause = state.pending_pause
            if pause is None:
                return "no_pause"
            claimed = self._claimed_pauses.setdefault(run_id, set())
            if pause.pause_id in claimed:
                return "conflict"
            claimed.add(pause.pause_id)
            known.add(decision.decision_id)
            self.engine.decisions.submit(run_id, decision)
            return "applied"

    def update_catalog(self, run_id: str, raw: dict) -> EducatorCatalog:
        with self.engine.decisions.run_lock(run_id):
            state = self.engine.load_state_for(run_id)
            if state.pending_pause is None:
                raise ApiError(409, "catalog locked", "catalog edits are allowed only while paused")
            catalog = validate_catalog(raw)
            state.catalog = catalog
            state.catalog_hash = catalog_hash(catalog)
            paths = self.engine.paths_for(run_id)
            save_state(state, paths)
            with (paths.run_dir / "catalog_updates.ndjson").open("a", encoding="utf-8") as handle:
                handle.write(
                    json.dumps({"at": utcnow_iso(), "catalog": catalog.to_dict()}) + "\n"
                )
            return catalog


ARTIFACT_KINDS = {
    "objectives": ("file", "objectives.json"),
    "learner_profile": ("file", "learner_profile.json"),
    "resource_plan": ("file", "resource_plan.json"),
    "syllabus": ("file", "syllabus.json"),
    "slide_plan": ("file", "slide_plan.json"),
    "assessment_plan": ("file", "assessment_plan.json"),
    "manifest": ("file", "manifest.json"),
    "chapters": ("dir", "chapters"),
    "decks": ("dir", "decks"),
    "scripts": ("dir", "scripts"),
    "assessments": ("dir", "assessments"),
}


def create_app(config: CliConfig, engine: Optional[PipelineEngine] = None) -> FastAPI:
    engine = engine or PipelineEngine(config.engine_config())
    coordinator = ServiceCoordinator(engine)
    app = FastAPI(title="courseforge gateway")
    app.state.engine = engine
    app.state.coordinator = coordinator

    tokens = dict(config.server_tokens)

    def session_for(request: Request) -> ApiSession:
        header = request.headers.get("authorization", "")
        token = header.removeprefix("Bearer ").strip()
        if not tokens:
            return ApiSession(token="anonymous", scopes=frozenset({ADMIN}))
        if token in tokens:
            return ApiSession(token=token, scopes=frozenset(tokens[token]))
        raise ApiError(403, "forbidden", "unknown or missing bearer token")

    def require(scope: str):
        def check(request: Request) -> ApiSession:
            session = session_for(request)
            if not session.allows(scope):
                raise ApiError(403, "forbidden", f"missing scope {scope!r}")
            return session

        return Depends(check)

    @app.exception_handler(ApiError)
    async def on_api_error(_request: Request, exc: ApiError):
        return problem(exc.status, exc.title, exc.detail)

    @app.exception_handler(CourseforgeError)
    async def on_domain_error(_request: Request, exc: CourseforgeError):
        if isinstance(exc, UnknownRun):
            return problem(404, "unknown run", str(exc))
        return problem(422, "domain error", str(exc))

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/runs", status_code=201)
    async def create_run(request: Request, _session: ApiSession = require(ADMIN)) -> dict:
        body = await request.json()
        course = CourseSpec.from_dict(body["course"])
        catalog_raw = body.get("catalog")
        catalog = validate_catalog(catalog_raw) if catalog_raw else None
        run_id = coordinator.start_run(course, catalog)
        return {"run_id": run_id}

    def state_summary(run_id: str) -> dict:
        state = engine.load_state_for(run_id)
        handle = coordinator.handles.get(run_id)
        return {
            "run_id": state.run_id,
            "mode": state.mode.value,
            "course": state.course.to_dict(),
            "completed": [s.value for s in state.completed],
            "next_subtask": (state.next_subtask().value if state.next_subtask() else None),
            "pending_pause": state.pending_pause.to_dict() if state.pending_pause else None,
            "stale": sorted(s.value for s in state.stale),
            "closed": state.closed,
            "slide_budget": state.slide_budget,
            "feedback_log": [n.to_dict() for n in state.feedback_log],
            "error": handle.error if handle else None,
            "busy": coordinator.busy(run_id),
        }

    @app.get("/runs")
    def list_runs(_session: ApiSession = require(READ)) -> dict:
        root = engine.config.run_root
        run_ids = sorted(p.name for p in root.glob("run-*") if p.is_dir()) if root.exists() else []
        return {"runs": [state_summary(run_id) for run_id in run_ids]}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str, _session: ApiSession = require(READ)) -> dict:
        return state_summary(run_id)

    @app.get("/runs/{run_id}/pause")
    def get_pause(run_id: str, _session: ApiSession = require(READ)):
        state = engine.load_state_for(run_id)
        if state.pending_pause is None:
            return problem(404, "no pending pause", f"run {run_id} is not paused")
        return state.pending_pause.to_dict()

    @app.post("/runs/{run_id}/decision")
    async def post_decision(
        run_id: str, request: Request, _session: ApiSession = require(DECIDE)
    ):
        body = await request.json()
        decision = CoPilotDecision.from_dict(body)
        outcome = coordinator.submit_decision(run_id, decision)
        if outcome == "no_pause":
            return problem(409, "no pending pause", "decision arrived with no pause outstanding")
        if outcome == "conflict":
            return problem(409, "already decided", "another decision already claimed this pause")
        return {"status": outcome, "decision_id": decision.decision_id}

    @app.post("/runs/{run_id}/feedback")
    def post_feedback(
        run_id: str, body: dict, _session: ApiSession = require(DECIDE)
    ):
        if coordinator.busy(run_id):
            return problem(409, "run busy", "wait for the run to finish before rerunning")
        note = FeedbackNote(
            target_subtask=SubtaskId.parse(body["subtask"]),
            suggestion=body.get("suggestion", ""),
            author="human",
        )
        artifacts = engine.rerun_with_feedback(
            run_id, note, allow_stale_catalog=bool(body.get("allow_stale_catalog"))
        )
        return {"status": "rerun_complete", "artifacts": artifacts}

    @app.get("/runs/{run_id}/artifacts/{kind}")
    def get_artifact(run_id: str, kind: str, _session: ApiSession = require(READ)):
        if kind not in ARTIFACT_KINDS:
            return problem(404, "unknown artifact kind", f"valid kinds: {sorted(ARTIFACT_KINDS)}")
        paths = engine.paths_for(run_id)
        if not paths.exists():
            return problem(404, "unknown run", run_id)
        shape, name = ARTIFACT_KINDS[kind]
        if shape == "file":
            target = paths.artifacts_dir / name
            if not target.exists():
                return problem(404, "artifact not ready", f"{kind} not generated yet")
            return read_json(target)
        files = sorted((paths.artifacts_dir / name).glob("chapter_*.json"))
        return {"items": [read_json(f) for f in files]}

    @app.get("/runs/{run_id}/transcripts/{subtask}")
    def get_transcript(run_id: str, subtask: str, _session: ApiSession = require(READ)):
        paths = engine.paths_for(run_id)
        target = paths.transcripts_dir / f"{SubtaskId.parse(subtask).value}.json"
        if not target.exists():
            return problem(404, "transcript not ready", subtask)
        return {"items": read_json(target)}

    @app.get("/runs/{run_id}/catalog")
    def get_catalog(run_id: str, _session: ApiSession = require(READ)):
        state = engine.load_state_for(run_id)
        return state.catalog.to_dict() if state.catalog else {}

    @app.put("/runs/{run_id}/catalog")
    async def put_catalog(
        run_id: str, request: Request, _session: ApiSession = require(DECIDE)
    ):
        body = await request.json()
        catalog = coordinator.update_catalog(run_id, body)
        return catalog.to_dict()

    @app.get("/runs/{run_id}/report")
    def get_report(run_id: str, _session: ApiSession = require(READ)) -> dict:
        report = engine.report(run_id, config.cost_table())
        return report.to_dict()

    @app.get("/runs/{run_id}/events")
    def get_events(
        run_id: str, after: int = 0, _session: ApiSession = require(READ)
    ) -> Response:
        log = engine.events_for(run_id)

        def stream() -> Iterator[str]:
            cursor = after
            idle = 0
            while True:
                events = log.read_after(cursor)
                if not events:
                    events = log.wait_after(cursor, timeout=0.5)
                if not events:
                    idle += 1
                    if idle >= 4 and not coordinator.busy(run_id):
                        return
                    continue
                idle = 0
                finished = False
                for event in events:
                    cursor = max(cursor, event.sequence)
                    yield json.dumps(event.to_dict(), sort_keys=True) + "\n"
                    if event.kind is EventKind.RUN_FINISHED:
                        finished = True
                if finished:
                    return

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    return app
