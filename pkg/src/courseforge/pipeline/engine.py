"""The run coordinator: executes subtasks, pauses, resumes, and reruns.

One engine may serve many runs, but each run has a single writer: all
state mutation happens on the thread executing that run, except catalog
edits at a pause, which go through the per-run lock while the executor
is blocked waiting for a decision.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Optional

import httpx

from courseforge import beamer
from courseforge.agents.deliberation import (
    DeliberationTranscript,
    extract_structured,
    run_deliberation,
)
from courseforge.agents.gateway import ChatGateway, SamplingParams
from courseforge.agents.prompts import ARTIFACT_SCHEMAS, CASTS, DeliberationKind
from courseforge.catalog import EducatorCatalog, catalog_hash
from courseforge.chapterize import chapterize
from courseforge.errors import CourseforgeError, UnknownRun
from courseforge.metering import (
    CostTable,
    HumanTimeEntry,
    RunReport,
    UsageLog,
    build_report,
)
from courseforge.model import (
    AssessmentPack,
    AssessmentPlan,
    Chapter,
    CompileStatus,
    CourseSpec,
    InstructionalPackage,
    LearnerProfile,
    LearningObjectives,
    ModeId,
    PackageManifest,
    ResourcePlan,
    SlideContent,
    SlideDeckSource,
    SlideOutline,
    SlidePlan,
    SlideScript,
    Syllabus,
)
from courseforge.pipeline import subtasks as briefs
from courseforge.pipeline.state import (
    DAG,
    SUBTASK_ORDER,
    CoPilotDecision,
    CompletedRecord,
    EventKind,
    EventLog,
    FeedbackNote,
    PausePoint,
    PipelineState,
    RunPaths,
    SubtaskId,
    UnknownSubtask,
    descendants,
    load_state,
    save_state,
    write_checkpoint,
)
from courseforge.review.parse import NoRatingsFound, parse_review_report
from courseforge.util import new_run_id, read_json, sha256_hex, utcnow_iso, write_json

logger = logging.getLogger(__name__)

K = DeliberationKind
S = SubtaskId


class SubtaskFailed(CourseforgeError):
    """A subtask raised; run state remains on disk and is resumable."""

    def __init__(self, subtask: SubtaskId, cause: Exception):
        self.subtask = subtask
        self.cause = cause
        super().__init__(f"subtask {subtask.value} failed: {cause}")


class AbandonedRun(CourseforgeError):
    """A co-pilot pause went unanswered past the timeout; state persists."""


class StaleCatalog(CourseforgeError):
    """Catalog changed since the target subtask ran; rerun needs the flag."""


class ModeError(CourseforgeError):
    """Mode/catalog combination or mode-gated operation not allowed."""


@dataclass
class EngineConfig:
    run_root: Path
    base_url: str = "http://127.0.0.1:8089/v1"
    model_name: str = "mock-edu"
    api_key_env_name: str = "COURSEFORGE_API_KEY"
    sampling: SamplingParams = field(default_factory=SamplingParams)
    rounds: int = 1
    slide_budget: int = 30
    pilot_students: int = 1
    latex_enabled: Optional[bool] = None  # None = probe at startup
    latex_binary: str = "pdflatex"
    compile_timeout: float = 120.0
    compile_max_attempts: int = 3
    pause_timeout: float = 3600.0
    preview_bytes: int = 2048
    concurrent_chapters: bool = False
    concurrent_analyze: bool = False
    transport: Optional[httpx.BaseTransport] = None
    sleeper: Callable[[float], None] = time.sleep

    def latex_available(self) -> bool:
        if self.latex_enabled is not None:
            return self.latex_enabled
        return beamer.probe_toolchain(self.latex_binary) is not None


class DecisionBus:
    """Hands co-pilot decisions (and paused catalog edits) to run threads.

    Decisions arrive in-process via `submit` or cross-process via the
    run's decisions file; both are matched against the current pause id
    and deduplicated by decision id.
    """

    def __init__(self):
        self._queues: dict[str, list[CoPilotDecision]] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._guard = threading.Lock()

    def run_lock(self, run_id: str) -> threading.RLock:
        with self._guard:
            return self._locks.setdefault(run_id, threading.RLock())

    def submit(self, run_id: str, decision: CoPilotDecision) -> None:
        with self.run_lock(run_id):
            self._queues.setdefault(run_id, []).append(decision)

    def _file_decisions(self, paths: RunPaths) -> list[dict]:
        if not paths.decisions_file.exists():
            return []
        out = []
        for line in paths.decisions_file.read_text(encoding="utf-8").splitlines():
            if line.strip():
                out.append(json.loads(line))
        return out

    def poll(
        self, paths: RunPaths, pause_id: str, consumed: set[str]
    ) -> Optional[CoPilotDecision]:
        with self.run_lock(paths.run_id):
            queue = self._queues.get(paths.run_id, [])
            while queue:
                decision = queue.pop(0)
                if decision.decision_id not in consumed:
                    return decision
            for entry in self._file_decisions(paths):
                target = entry.get("pause_id") or pause_id
                decision = CoPilotDecision.from_dict(entry)
                if target == pause_id and decision.decision_id not in consumed:
                    return decision
        return None

    def wait(
        self,
        paths: RunPaths,
        pause_id: str,
        timeout: float,
        consumed: set[str],
        poll_interval: float = 0.05,
    ) -> Optional[CoPilotDecision]:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            decision = self.poll(paths, pause_id, consumed)
            if decision is not None:
                return decision
            time.sleep(poll_interval)
        return None


@dataclass
class RunContext:
    state: PipelineState
    paths: RunPaths
    events: EventLog
    usage: UsageLog
    gateway: ChatGateway
    documents: dict[str, Any] = field(default_factory=dict)
    transcripts: dict[SubtaskId, list[DeliberationTranscript]] = field(default_factory=dict)

    def doc(self, name: str) -> Any:
        if name not in self.documents:
            path = self.paths.artifacts_dir / f"{name}.json"
            self.documents[name] = read_json(path)
        return self.documents[name]

    def chapter_docs(self) -> list[dict]:
        if "chapters" not in self.documents:
            files = sorted((self.paths.artifacts_dir / "chapters").glob("chapter_*.json"))
            self.documents["chapters"] = {"chapters": [read_json(f) for f in files]}
        return self.documents["chapters"]["chapters"]


class PipelineEngine:
    def __init__(self, config: EngineConfig, decisions: Optional[DecisionBus] = None):
        self.config = config
        self.decisions = decisions or DecisionBus()
        self._event_logs: dict[str, EventLog] = {}
        self._event_guard = threading.Lock()

    # --- plumbing ---------------------------------------------------------

    def paths_for(self, run_id: str) -> RunPaths:
        return RunPaths(self.config.run_root, run_id)

    def events_for(self, run_id: str) -> EventLog:
        with self._event_guard:
            if run_id not in self._event_logs:
                paths = self.paths_for(run_id)
                if not paths.exists():
                    raise UnknownRun(f"no run directory for {run_id!r}")
                self._event_logs[run_id] = EventLog(paths)
            return self._event_logs[run_id]

    def load_state_for(self, run_id: str) -> PipelineState:
        return load_state(self.paths_for(run_id))

    def _context_for(self, state: PipelineState, paths: RunPaths) -> RunContext:
        usage = UsageLog(paths.run_dir)
        gateway = ChatGateway(
            base_url=self.config.base_url,
            model_name=self.config.model_name,
            api_key_env_name=self.config.api_key_env_name,
            transport=self.config.transport,
            sleeper=self.config.sleeper,
            usage_sink=usage.record,
        )
        return RunContext(
            state=state, paths=paths, events=self.events_for(state.run_id),
            usage=usage, gateway=gateway,
        )

    @staticmethod
    def _check_mode_catalog(mode: ModeId, catalog: Optional[EducatorCatalog]) -> None:
        needs = mode in (ModeId.CATALOG_GUIDED, ModeId.FULL_COPILOT)
        if needs and catalog is None:
            raise ModeError(f"{mode.value} mode requires a provided educator catalog")
        if not needs and catalog is not None:
            raise ModeError(f"{mode.value} mode does not accept an educator catalog")

    # --- run lifecycle ------------------------------------------------------

    def start_run(
        self,
        course: CourseSpec,
        catalog: Optional[EducatorCatalog] = None,
        run_id: str = "",
    ) -> PipelineState:
        course.validate()
        self._check_mode_catalog(course.mode, catalog)
        run_id = run_id or new_run_id()
        paths = self.paths_for(run_id).ensure()
        budget = self.config.slide_budget
        if catalog is not None and catalog.max_slide_count is not None:
            budget = catalog.max_slide_count
        state = PipelineState(
            run_id=run_id,
            mode=course.mode,
            course=course,
            catalog=catalog,
            created_at=utcnow_iso(),
            backend_model_name=self.config.model_name,
            slide_budget=budget,
            catalog_hash=catalog_hash(catalog),
        )
        save_state(state, paths)
        return state

    def run(
        self,
        course: CourseSpec,
        catalog: Optional[EducatorCatalog] = None,
        run_id: str = "",
        stop_after: Optional[SubtaskId] = None,
    ) -> Optional[InstructionalPackage]:
        state = self.start_run(course, catalog, run_id)
        return self._execute(state, stop_after)

    def resume(
        self, run_id: str, stop_after: Optional[SubtaskId] = None
    ) -> Optional[InstructionalPackage]:
        """Rebuild state from disk and continue; completed work never reruns."""
        state = self.load_state_for(run_id)
        if state.closed:
            return self.load_package(run_id)
        return self._execute(state, stop_after)

    def _execute(
        self, state: PipelineState, stop_after: Optional[SubtaskId]
    ) -> Optional[InstructionalPackage]:
        paths = self.paths_for(state.run_id)
        ctx = self._context_for(state, paths)
        try:
            if ctx.state.pending_pause is not None:
                # an earlier attempt was abandoned mid-pause; re-issue it
                ctx.state.pending_pause = None
                self._pause_rendezvous(ctx, self._last_completed(ctx.state))
            while True:
                if (
                    self.config.concurrent_analyze
                    and ctx.state.mode is not ModeId.FULL_COPILOT
                    and ctx.state.next_subtask() == S.OBJECTIVES_DEFINITION
                    and not ctx.state.completed
                ):
                    self._run_analyze_concurrently(ctx)
                    if stop_after in (
                        S.OBJECTIVES_DEFINITION, S.AUDIENCE_ANALYSIS, S.RESOURCE_ASSESSMENT,
                    ):
                        return None
                subtask = ctx.state.next_subtask()
                if subtask is None:
                    break
                self._run_one(ctx, subtask)
                if ctx.state.mode is ModeId.FULL_COPILOT:
                    self._pause_rendezvous(ctx, subtask)
                if stop_after is subtask:
                    return None
            return self._finalize(ctx)
        finally:
            ctx.gateway.close()

    @staticmethod
    def _last_completed(state: PipelineState) -> SubtaskId:
        done = [s for s in SUBTASK_ORDER if s in state.completed]
        if not done:
            raise CourseforgeError("pause recorded before any subtask completed")
        return done[-1]

    def _run_one(self, ctx: RunContext, subtask: SubtaskId, rerun: bool = False) -> None:
        for prerequisite in DAG[subtask]:
            if prerequisite not in ctx.state.completed:
                raise SubtaskFailed(
                    subtask, CourseforgeError(f"prerequisite {prerequisite.value} incomplete")
                )
        suggestions = self._pending_suggestions(ctx, subtask)
        ctx.events.append(EventKind.SUBTASK_STARTED, {"subtask": subtask.value, "rerun": rerun})
        ctx.transcripts[subtask] = []
        try:
            artifacts = _EXECUTORS[subtask](self, ctx, suggestions)
        except Exception as exc:
            ctx.events.append(
                EventKind.ERROR, {"subtask": subtask.value, "error": str(exc)[:500]}
            )
            save_state(ctx.state, ctx.paths)
            if isinstance(exc, SubtaskFailed):
                raise
            raise SubtaskFailed(subtask, exc) from exc
        transcript_ref = self._write_transcripts(ctx, subtask)
        ctx.state.completed[subtask] = CompletedRecord(
            artifacts=artifacts,
            transcript_ref=transcript_ref,
            finished_at=utcnow_iso(),
            catalog_hash=ctx.state.catalog_hash,
        )
        ctx.state.stale.discard(subtask)
        write_checkpoint(ctx.state, ctx.paths)
        ctx.events.append(
            EventKind.SUBTASK_COMPLETED,
            {"subtask": subtask.value, "artifacts": artifacts, "rerun": rerun},
        )

    def _run_analyze_concurrently(self, ctx: RunContext) -> None:
        analyze = (S.OBJECTIVES_DEFINITION, S.AUDIENCE_ANALYSIS, S.RESOURCE_ASSESSMENT)
        results: dict[SubtaskId, dict[str, str]] = {}
        errors: dict[SubtaskId, Exception] = {}

        def work(subtask: SubtaskId) -> None:
            ctx.events.append(EventKind.SUBTASK_STARTED, {"subtask": subtask.value})
            ctx.transcripts[subtask] = []
            try:
                results[subtask] = _EXECUTORS[subtask](self, ctx, [])
            except Exception as exc:  # recorded per subtask below
                errors[subtask] = exc

        with ThreadPoolExecutor(max_workers=3) as pool:
            list(pool.map(work, analyze))
        for subtask in analyze:
            if subtask in errors:
                ctx.events.append(
                    EventKind.ERROR,
                    {"subtask": subtask.value, "error": str(errors[subtask])[:500]},
                )
                save_state(ctx.state, ctx.paths)
                raise SubtaskFailed(subtask, errors[subtask])
            transcript_ref = self._write_transcripts(ctx, subtask)
            ctx.state.completed[subtask] = CompletedRecord(
                artifacts=results[subtask],
                transcript_ref=transcript_ref,
                finished_at=utcnow_iso(),
                catalog_hash=ctx.state.catalog_hash,
            )
            write_checkpoint(ctx.state, ctx.paths)
            ctx.events.append(
                EventKind.SUBTASK_COMPLETED,
                {"subtask": subtask.value, "artifacts": results[subtask]},
            )

    def _pending_suggestions(self, ctx: RunContext, subtask: SubtaskId) -> list[str]:
        suggestions = list(ctx.state.guidance_for_next)
        ctx.state.guidance_for_next = []
        return suggestions

    def _write_transcripts(self, ctx: RunContext, subtask: SubtaskId) -> str:
        relative = f"transcripts/{subtask.value}.json"
        write_json(
            ctx.paths.run_dir / relative,
            [t.to_dict() for t in ctx.transcripts.get(subtask, [])],
        )
        return relative

    # --- pauses ---------------------------------------------------------------

    def _previews(self, ctx: RunContext, subtask: SubtaskId) -> dict[str, str]:
        previews: dict[str, str] = {}
        record = ctx.state.completed.get(subtask)
        if record is None:
            return previews
        for name, ref in sorted(record.artifacts.items()):
            path = ctx.paths.artifact(ref)
            if path.is_dir():
                listing = sorted(p.name for p in path.glob("*"))
                previews[name] = json.dumps(listing)[: self.config.preview_bytes]
            elif path.exists():
                previews[name] = path.read_text(encoding="utf-8")[: self.config.preview_bytes]
        return previews

    def _pause_rendezvous(self, ctx: RunContext, subtask: SubtaskId) -> None:
        while True:
            pause = PausePoint.fresh(subtask, self._previews(ctx, subtask))
            ctx.state.pending_pause = pause
            save_state(ctx.state, ctx.paths)
            ctx.events.append(
                EventKind.PAUSE_ISSUED,
                {"subtask": subtask.value, "pause_id": pause.pause_id},
            )
            started = time.monotonic()
            decision = self.decisions.wait(
                ctx.paths,
                pause.pause_id,
                self.config.pause_timeout,
                set(ctx.state.applied_decision_ids),
            )
            if decision is None:
                ctx.events.append(
                    EventKind.ERROR,
                    {"kind": "abandoned", "pause_id": pause.pause_id, "subtask": subtask.value},
                )
                save_state(ctx.state, ctx.paths)
                raise AbandonedRun(
                    f"pause after {subtask.value} unanswered for {self.config.pause_timeout}s"
                )
            with self.decisions.run_lock(ctx.state.run_id):
                # pick up catalog edits made while paused
                fresh = load_state(ctx.paths)
                fresh.pending_pause = None
                ctx.state = fresh
                ctx.state.applied_decision_ids.append(decision.decision_id)
                save_state(ctx.state, ctx.paths)
            ctx.events.append(
                EventKind.DECISION_APPLIED,
                {
                    "pause_id": pause.pause_id,
                    "decision_id": decision.decision_id,
                    "action": decision.action,
                    "subtask": subtask.value,
                    "seconds_waited": round(time.monotonic() - started, 3),
                },
            )
            if decision.action == "approve":
                save_state(ctx.state, ctx.paths)
                return
            if decision.action == "guide":
                target = ctx.state.next_subtask() or subtask
                ctx.state.guidance_for_next.append(decision.text)
                ctx.state.feedback_log.append(
                    FeedbackNote(target_subtask=target, suggestion=decision.text, author="human")
                )
                save_state(ctx.state, ctx.paths)
                return
            # modify: rerun this subtask with every human suggestion so far
            note = FeedbackNote(
                target_subtask=subtask, suggestion=decision.text,
                author="human", applied_in_rerun=True,
            )
            ctx.state.feedback_log.append(note)
            ctx.state.guidance_for_next = self._human_suggestions(ctx.state, subtask)
            self._run_one(ctx, subtask, rerun=True)

    @staticmethod
    def _human_suggestions(state: PipelineState, subtask: SubtaskId) -> list[str]:
        return [
            note.suggestion
            for note in state.feedback_log
            if note.target_subtask is subtask and note.author == "human" and note.applied_in_rerun
        ]

    # --- feedback reruns ------------------------------------------------------

    def rerun_with_feedback(
        self, run_id: str, note: FeedbackNote, allow_stale_catalog: bool = False
    ) -> dict[str, str]:
        """Rerun one completed subtask with the suggestion appended to its
        original context; downstream subtasks are marked stale, not rerun."""
        paths = self.paths_for(run_id)
        state = load_state(paths)
        if state.mode in (ModeId.AUTONOMOUS, ModeId.CATALOG_GUIDED):
            raise ModeError(
                f"{state.mode.value} mode does not accept retrospective feedback"
            )
        if note.target_subtask not in state.completed:
            raise UnknownSubtask(
                f"subtask {note.target_subtask.value} has not completed in run {run_id}"
            )
        record = state.completed[note.target_subtask]
        if record.catalog_hash != state.catalog_hash and not allow_stale_catalog:
            raise StaleCatalog(
                "catalog changed since this subtask ran; pass the confirmation flag to proceed"
            )
        applied = replace(note, applied_in_rerun=True)
        state.feedback_log.append(applied)
        ctx = self._context_for(state, paths)
        reopened = state.closed
        if reopened:
            ctx.usage.reopen()
        try:
            ctx.state.guidance_for_next = self._rerun_suggestions(state, note.target_subtask)
            self._run_one(ctx, note.target_subtask, rerun=True)
            stale = descendants(note.target_subtask) & set(ctx.state.completed)
            ctx.state.stale |= stale
            save_state(ctx.state, ctx.paths)
            return ctx.state.completed[note.target_subtask].artifacts
        finally:
            if reopened:
                ctx.usage.close()
            ctx.gateway.close()

    @staticmethod
    def _rerun_suggestions(state: PipelineState, subtask: SubtaskId) -> list[str]:
        return [
            n.suggestion
            for n in state.feedback_log
            if n.target_subtask is subtask and n.applied_in_rerun
        ]

    # --- finalization ------------------------------------------------------

    def load_package(self, run_id: str) -> InstructionalPackage:
        paths = self.paths_for(run_id)
        state = load_state(paths)
        art = paths.artifacts_dir
        chapters = [read_json(f) for f in sorted((art / "chapters").glob("chapter_*.json"))]
        decks = [read_json(f) for f in sorted((art / "decks").glob("chapter_*.json"))]
        scripts = [read_json(f) for f in sorted((art / "scripts").glob("chapter_*.json"))]
        packs = [read_json(f) for f in sorted((art / "assessments").glob("chapter_*.json"))]
        return InstructionalPackage(
            objectives=LearningObjectives.from_dict(read_json(art / "objectives.json")),
            syllabus=Syllabus.from_dict(read_json(art / "syllabus.json")),
            chapters=tuple(Chapter.from_dict(c) for c in chapters),
            decks=tuple(SlideDeckSource.from_dict(d) for d in decks),
            scripts=tuple(SlideScript.from_dict(s) for s in scripts),
            assessments=tuple(AssessmentPack.from_dict(a) for a in packs),
            manifest=PackageManifest.from_dict(read_json(art / "manifest.json")),
        ).validate()

    def _finalize(self, ctx: RunContext) -> InstructionalPackage:
        manifest = PackageManifest(
            run_id=ctx.state.run_id,
            mode=ctx.state.mode,
            created_at=ctx.state.created_at,
            backend_model_name=ctx.state.backend_model_name,
        )
        write_json(ctx.paths.artifacts_dir / "manifest.json", manifest.to_dict())
        package = self.load_package(ctx.state.run_id)
        ctx.state.closed = True
        save_state(ctx.state, ctx.paths)
        ctx.usage.close()
        ctx.events.append(EventKind.RUN_FINISHED, {"run_id": ctx.state.run_id})
        return package

    # --- reporting ---------------------------------------------------------

    def human_time_entries(self, run_id: str) -> list[HumanTimeEntry]:
        events = self.events_for(run_id).read_all()
        opened: dict[str, Any] = {}
        abandoned: set[str] = set()
        entries: list[HumanTimeEntry] = []
        for event in events:
            if event.kind is EventKind.PAUSE_ISSUED:
                opened[event.payload["pause_id"]] = event
            elif event.kind is EventKind.ERROR and event.payload.get("kind") == "abandoned":
                abandoned.add(event.payload.get("pause_id", ""))
            elif event.kind is EventKind.DECISION_APPLIED:
                pause_id = event.payload.get("pause_id", "")
                start = opened.pop(pause_id, None)
                if start is not None:
                    entries.append(
                        HumanTimeEntry(
                            event_id=pause_id,
                            started_at=start.at,
                            ended_at=event.at,
                            interrupted=pause_id in abandoned,
                        )
                    )
        return entries

    def report(self, run_id: str, costs: CostTable) -> RunReport:
        paths = self.paths_for(run_id)
        if not paths.exists():
            raise UnknownRun(f"no run directory for {run_id!r}")
        usage = UsageLog(paths.run_dir)
        events = self.events_for(run_id).read_all()
        pipeline_seconds = None
        if len(events) >= 2:
            try:
                from datetime import datetime

                first = datetime.fromisoformat(events[0].at)
                last = datetime.fromisoformat(events[-1].at)
                pipeline_seconds = (last - first).total_seconds()
            except ValueError:
                pipeline_seconds = None
        return build_report(
            run_id=run_id,
            records=usage.records(),
            costs=costs,
            human_entries=self.human_time_entries(run_id),
            pipeline_seconds=pipeline_seconds,
        )

    # --- deliberation helper -------------------------------------------------

    def _deliberate(
        self,
        ctx: RunContext,
        kind: DeliberationKind,
        brief: str,
        labeled_docs: list[tuple[str, Any]],
        suggestions: list[str],
        subtask: SubtaskId,
    ) -> DeliberationTranscript:
        blocks = briefs.assemble_blocks(ctx.state.catalog, labeled_docs, suggestions)
        transcript = run_deliberation(
            ctx.gateway,
            kind,
            CASTS[kind],
            brief,
            blocks,
            rounds=self.config.rounds,
            params=self.config.sampling,
            subtask_label=subtask.value,
        )
        for schema_id in ARTIFACT_SCHEMAS[kind]:
            extract_structured(transcript, schema_id, gateway=ctx.gateway, params=self.config.sampling)
        ctx.transcripts.setdefault(subtask, []).append(transcript)
        return transcript

    # --- subtask executors ----------------------------------------------------

    def _exec_objectives(self, ctx: RunContext, suggestions: list[str]) -> dict[str, str]:
        transcript = self._deliberate(
            ctx, K.OBJECTIVES_DEFINITION, briefs.brief_objectives(ctx.state.course),
            [], suggestions, S.OBJECTIVES_DEFINITION,
        )
        document = LearningObjectives.from_dict(transcript.extracted["learning_objectives"]).to_dict()
        write_json(ctx.paths.artifacts_dir / "objectives.json", document)
        ctx.documents["objectives"] = document
        return {"objectives": "artifacts/objectives.json"}

    def _exec_audience(self, ctx: RunContext, suggestions: list[str]) -> dict[str, str]:
        # context-free among the analysis subtasks, which are mutually
        # independent in the DAG and may run concurrently
        transcript = self._deliberate(
            ctx, K.AUDIENCE_ANALYSIS, briefs.brief_audience(ctx.state.course),
            [], suggestions, S.AUDIENCE_ANALYSIS,
        )
        document = LearnerProfile.from_dict(transcript.extracted["learner_profile"]).to_dict()
        write_json(ctx.paths.artifacts_dir / "learner_profile.json", document)
        ctx.documents["learner_profile"] = document
        return {"learner_profile": "artifacts/learner_profile.json"}

    def _exec_resources(self, ctx: RunContext, suggestions: list[str]) -> dict[str, str]:
        transcript = self._deliberate(
            ctx, K.RESOURCE_ASSESSMENT, briefs.brief_resources(ctx.state.course),
            [], suggestions, S.RESOURCE_ASSESSMENT,
        )
        document = ResourcePlan.from_dict(transcript.extracted["resource_plan"]).to_dict()
        write_json(ctx.paths.artifacts_dir / "resource_plan.json", document)
        ctx.documents["resource_plan"] = document
        return {"resource_plan": "artifacts/resource_plan.json"}

    def _exec_syllabus(self, ctx: RunContext, suggestions: list[str]) -> dict[str, str]:
        transcript = self._deliberate(
            ctx, K.SYLLABUS_DESIGN, briefs.brief_syllabus(ctx.state.course),
            [
                ("learning_objectives", ctx.doc("objectives")),
                ("learner_profile", ctx.doc("learner_profile")),
                ("resource_plan", ctx.doc("resource_plan")),
            ],
            suggestions, S.SYLLABUS_DESIGN,
        )
        syllabus = Syllabus.from_dict(transcript.extracted["syllabus"])
        write_json(ctx.paths.artifacts_dir / "syllabus.json", syllabus.to_dict())
        ctx.documents["syllabus"] = syllabus.to_dict()

        def proposer(syl: Syllabus, retry: bool) -> list[dict]:
            processing = self._deliberate(
                ctx, K.SYLLABUS_PROCESSING,
                briefs.brief_syllabus_processing(ctx.state.course, retry=retry),
                [("syllabus", syl.to_dict())], [], S.SYLLABUS_DESIGN,
            )
            return processing.extracted["chapter_list"]["chapters"]

        chapters = chapterize(syllabus, proposer=proposer)
        for chapter in chapters:
            write_json(
                ctx.paths.artifacts_dir / "chapters" / f"chapter_{chapter.chapter_index:02d}.json",
                chapter.to_dict(),
            )
        ctx.documents["chapters"] = {"chapters": [c.to_dict() for c in chapters]}
        return {
            "syllabus": "artifacts/syllabus.json",
            "chapters": "artifacts/chapters",
        }

    def _exec_slide_planning(self, ctx: RunContext, suggestions: list[str]) -> dict[str, str]:
        transcript = self._deliberate(
            ctx, K.SLIDE_PLANNING, briefs.brief_slide_planning(ctx.state.course),
            [
                ("learning_objectives", ctx.doc("objectives")),
                ("learner_profile", ctx.doc("learner_profile")),
                ("syllabus", ctx.doc("syllabus")),
                ("chapters", {"chapters": ctx.chapter_docs()}),
            ],
            suggestions, S.SLIDE_PLANNING,
        )
        document = SlidePlan.from_dict(transcript.extracted["slide_plan"]).to_dict()
        write_json(ctx.paths.artifacts_dir / "slide_plan.json", document)
        ctx.documents["slide_plan"] = document
        return {"slide_plan": "artifacts/slide_plan.json"}

    def _exec_assessment_planning(self, ctx: RunContext, suggestions: list[str]) -> dict[str, str]:
        transcript = self._deliberate(
            ctx, K.ASSESSMENT_PLANNING, briefs.brief_assessment_planning(ctx.state.course),
            [
                ("learning_objectives", ctx.doc("objectives")),
                ("syllabus", ctx.doc("syllabus")),
            ],
            suggestions, S.ASSESSMENT_PLANNING,
        )
        document = AssessmentPlan.from_dict(transcript.extracted["assessment_plan"]).to_dict()
        write_json(ctx.paths.artifacts_dir / "assessment_plan.json", document)
        ctx.documents["assessment_plan"] = document
        return {"assessment_plan": "artifacts/assessment_plan.json"}

    def _generate_chapter(
        self, ctx: RunContext, chapter: Chapter, suggestions: list[str]
    ) -> tuple[list[DeliberationTranscript], SlideDeckSource, SlideScript, AssessmentPack]:
        course = ctx.state.course
        budget = ctx.state.slide_budget
        transcripts: list[DeliberationTranscript] = []

        slides = run_deliberation(
            ctx.gateway, K.MATERIALS_SLIDES, CASTS[K.MATERIALS_SLIDES],
            briefs.brief_materials_slides(course, chapter, budget),
            briefs.assemble_blocks(
                ctx.state.catalog,
                [
                    ("chapter", chapter.to_dict()),
                    ("slide_plan", ctx.doc("slide_plan")),
                    ("learning_objectives", ctx.doc("objectives")),
                ],
                suggestions,
            ),
            rounds=self.config.rounds, params=self.config.sampling,
            subtask_label=S.MATERIALS_GENERATION.value,
        )
        for schema_id in ARTIFACT_SCHEMAS[K.MATERIALS_SLIDES]:
            extract_structured(slides, schema_id, gateway=ctx.gateway, params=self.config.sampling)
        transcripts.append(slides)
        outline = SlideOutline.from_dict(slides.extracted["slide_outline"], slide_budget=budget)
        contents = [
            SlideContent.from_dict(entry)
            for entry in slides.extracted["slide_contents"]["contents"]
        ]

        raw_tex = beamer.assemble(
            outline, contents, chapter_title=chapter.title, course_title=course.course_title
        )
        deck = self._compile_deck(ctx, chapter, raw_tex)

        script_t = run_deliberation(
            ctx.gateway, K.MATERIALS_SCRIPT, CASTS[K.MATERIALS_SCRIPT],
            briefs.brief_materials_script(course, chapter),
            briefs.assemble_blocks(
                ctx.state.catalog,
                [
                    ("chapter", chapter.to_dict()),
                    ("slide_outline", outline.to_dict()),
                    ("slide_contents", slides.extracted["slide_contents"]),
                ],
                suggestions,
            ),
            rounds=self.config.rounds, params=self.config.sampling,
            subtask_label=S.MATERIALS_GENERATION.value,
        )
        extract_structured(script_t, "slide_script", gateway=ctx.gateway, params=self.config.sampling)
        transcripts.append(script_t)
        script = SlideScript.from_dict(script_t.extracted["slide_script"], outline=outline)

        pack_t = run_deliberation(
            ctx.gateway, K.MATERIALS_ASSESSMENTS, CASTS[K.MATERIALS_ASSESSMENTS],
            briefs.brief_materials_assessments(course, chapter),
            briefs.assemble_blocks(
                ctx.state.catalog,
                [
                    ("chapter", chapter.to_dict()),
                    ("slide_outline", outline.to_dict()),
                    ("assessment_plan", ctx.doc("assessment_plan")),
                ],
                suggestions,
            ),
            rounds=self.config.rounds, params=self.config.sampling,
            subtask_label=S.MATERIALS_GENERATION.value,
        )
        extract_structured(pack_t, "assessment_pack", gateway=ctx.gateway, params=self.config.sampling)
        transcripts.append(pack_t)
        pack = AssessmentPack.from_dict(pack_t.extracted["assessment_pack"])
        return transcripts, deck, script, pack

    def _compile_deck(self, ctx: RunContext, chapter: Chapter, raw_tex: str) -> SlideDeckSource:
        cleaned = beamer.sanitize(raw_tex)
        index = chapter.chapter_index
        if not self.config.latex_available():
            return SlideDeckSource(
                chapter_index=index,
                tex_source=cleaned.tex,
                sanitized=True,
                compile_status=CompileStatus.UNCOMPILED,
            )
        workdir = ctx.paths.run_dir / "build" / f"chapter_{index:02d}"

        def on_attempt(attempt: int, result: beamer.CompileResult) -> None:
            ctx.events.append(
                EventKind.COMPILE_ATTEMPT,
                {"chapter_index": index, "attempt": attempt, "status": result.status},
            )

        try:
            outcome = beamer.repair_loop(
                cleaned.tex,
                workdir,
                max_attempts=self.config.compile_max_attempts,
                binary=self.config.latex_binary,
                timeout=self.config.compile_timeout,
                on_attempt=on_attempt,
            )
        except beamer.ExhaustedAttempts:
            return SlideDeckSource(
                chapter_index=index, tex_source=cleaned.tex,
                sanitized=True, compile_status=CompileStatus.FAILED,
            )
        if not outcome.result.ok:
            return SlideDeckSource(
                chapter_index=index, tex_source=outcome.tex,
                sanitized=True, compile_status=CompileStatus.FAILED,
            )
        pdf_rel = f"artifacts/decks/chapter_{index:02d}.pdf"
        target = ctx.paths.artifact(pdf_rel)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(outcome.result.pdf_path.read_bytes())
        return SlideDeckSource(
            chapter_index=index, tex_source=outcome.tex, sanitized=True,
            compile_status=CompileStatus.SUCCESS, pdf_path=pdf_rel,
        )

    def _exec_materials(self, ctx: RunContext, suggestions: list[str]) -> dict[str, str]:
        chapters = [Chapter.from_dict(c) for c in ctx.chapter_docs()]
        results: dict[int, tuple] = {}

        def generate(chapter: Chapter) -> None:
            results[chapter.chapter_index] = self._generate_chapter(ctx, chapter, suggestions)

        if self.config.concurrent_chapters and len(chapters) > 1:
            with ThreadPoolExecutor(max_workers=min(4, len(chapters))) as pool:
                list(pool.map(generate, chapters))
        else:
            for chapter in chapters:
                generate(chapter)

        ctx.transcripts[S.MATERIALS_GENERATION] = []
        checksums: dict[str, dict[str, str]] = {}
        for index in sorted(results):
            transcripts, deck, script, pack = results[index]
            ctx.transcripts[S.MATERIALS_GENERATION].extend(transcripts)
            stem = f"chapter_{index:02d}.json"
            write_json(ctx.paths.artifacts_dir / "decks" / stem, deck.to_dict())
            write_json(ctx.paths.artifacts_dir / "scripts" / stem, script.to_dict())
            write_json(ctx.paths.artifacts_dir / "assessments" / stem, pack.to_dict())
            tex_path = ctx.paths.artifacts_dir / "decks" / f"chapter_{index:02d}.tex"
            tex_path.write_text(deck.tex_source, encoding="utf-8")
            entry = {"tex_sha256": sha256_hex(deck.tex_source)}
            if deck.pdf_path:
                pdf_bytes = ctx.paths.artifact(deck.pdf_path).read_bytes()
                entry["pdf_sha256"] = hashlib.sha256(pdf_bytes).hexdigest()
            checksums[f"chapter_{index:02d}"] = entry
        write_json(ctx.paths.artifacts_dir / "decks" / "checksums.json", checksums)
        return {
            "decks": "artifacts/decks",
            "scripts": "artifacts/scripts",
            "assessments": "artifacts/assessments",
        }

    def _materials_digest(self, ctx: RunContext) -> list[dict]:
        digest = []
        for chapter_doc in ctx.chapter_docs():
            index = chapter_doc["chapter_index"]
            stem = f"chapter_{index:02d}.json"
            deck = read_json(ctx.paths.artifacts_dir / "decks" / stem)
            script = read_json(ctx.paths.artifacts_dir / "scripts" / stem)
            pack = read_json(ctx.paths.artifacts_dir / "assessments" / stem)
            digest.append(
                {
                    "chapter_index": index,
                    "title": chapter_doc["title"],
                    "compile_status": deck["compile_status"],
                    "deck_excerpt": deck["tex_source"][:800],
                    "script_slides": len(script["per_slide"]),
                    "mcq_count": len(pack["mcqs"]),
                    "activities": pack["activities"],
                }
            )
        return digest

    def _exec_validation(self, ctx: RunContext, suggestions: list[str]) -> dict[str, str]:
        labeled = [
            ("learning_objectives", ctx.doc("objectives")),
            ("syllabus", ctx.doc("syllabus")),
            ("chapters", {"chapters": ctx.chapter_docs()}),
            ("materials_digest", {"chapters": self._materials_digest(ctx)}),
        ]
        artifacts: dict[str, str] = {}
        reviewers = (
            (K.VALIDATION_CHAIR, "program_chair", "reports/validation_chair.json"),
            (K.VALIDATION_STUDENT, "test_student", "reports/validation_student.json"),
        )
        for kind, persona, ref in reviewers:
            transcript = self._deliberate(
                ctx, kind, briefs.brief_validation(ctx.state.course),
                labeled, suggestions, S.VALIDATION,
            )
            try:
                report = parse_review_report(
                    transcript.assistant_messages[-1].content, persona=persona
                )
            except NoRatingsFound as exc:
                logger.warning("validation reviewer %s unparseable: %s", persona, exc)
                ctx.events.append(
                    EventKind.ERROR, {"kind": "review_unparseable", "persona": persona}
                )
                continue
            write_json(ctx.paths.run_dir / ref, report.to_dict())
            artifacts[persona] = ref
            for text in (report.recommendations, report.improvements):
                if text.strip():
                    ctx.state.feedback_log.append(
                        FeedbackNote(
                            target_subtask=S.MATERIALS_GENERATION,
                            suggestion=text.strip(),
                            author="agent",
                        )
                    )
        return artifacts

    def _exec_pilot(self, ctx: RunContext, suggestions: list[str]) -> dict[str, str]:
        chapters = ctx.chapter_docs()
        issues: list[dict] = []
        for student in range(self.config.pilot_students):
            assigned = chapters[student % len(chapters)]["chapter_index"]
            stem = f"chapter_{assigned:02d}.json"
            deck = read_json(ctx.paths.artifacts_dir / "decks" / stem)
            script = read_json(ctx.paths.artifacts_dir / "scripts" / stem)
            transcript = self._deliberate(
                ctx, K.PILOT_TESTING, briefs.brief_pilot(ctx.state.course, assigned),
                [
                    ("deck_source", {"chapter_index": assigned, "tex_excerpt": deck["tex_source"][:2000]}),
                    ("slide_script", script),
                ],
                suggestions, S.PILOT_TESTING,
            )
            document = transcript.extracted["pilot_issues"]
            for issue in document["issues"]:
                issues.append({"chapter_index": document["chapter_index"], **issue})
        write_json(ctx.paths.reports_dir / "pilot_issues.json", issues)
        return {"pilot_issues": "reports/pilot_issues.json"}


_EXECUTORS: dict[SubtaskId, Callable[[PipelineEngine, RunContext, list[str]], dict[str, str]]] = {
    S.OBJECTIVES_DEFINITION: PipelineEngine._exec_objectives,
    S.AUDIENCE_ANALYSIS: PipelineEngine._exec_audience,
    S.RESOURCE_ASSESSMENT: PipelineEngine._exec_resources,
    S.SYLLABUS_DESIGN: PipelineEngine._exec_syllabus,
    S.SLIDE_PLANNING: PipelineEngine._exec_slide_planning,
    S.ASSESSMENT_PLANNING: PipelineEngine._exec_assessment_planning,
    S.MATERIALS_GENERATION: PipelineEngine._exec_materials,
    S.VALIDATION: PipelineEngine._exec_validation,
    S.PILOT_TESTING: PipelineEngine._exec_pilot,
}
