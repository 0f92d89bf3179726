"""Persistent run state: subtask DAG, checkpoints, events, run layout.

State serializes to canonical JSON with a content hash; resume refuses a
state or checkpoint whose bytes no longer match their recorded hash. The
event log is append-only line-delimited JSON with a per-run sequence
number that only ever increases.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Optional

from courseforge.catalog import EducatorCatalog
from courseforge.errors import CourseforgeError, InvalidDocument, UnknownRun
from courseforge.model import CourseSpec, ModeId
from courseforge.util import atomic_write_text, canonical_dumps, sha256_hex, utcnow_iso


class CorruptCheckpoint(CourseforgeError):
    """Stored state bytes do not match their recorded hash."""


class UnknownSubtask(CourseforgeError):
    """Named subtask does not exist or has not completed yet."""

    @staticmethod
    def bad_name(name: str) -> "UnknownSubtask":
        valid = ", ".join(s.value for s in SubtaskId)
        return UnknownSubtask(f"unknown subtask {name!r}; valid subtasks: {valid}")


class SubtaskId(str, Enum):
    OBJECTIVES_DEFINITION = "objectives_definition"
    AUDIENCE_ANALYSIS = "audience_analysis"
    RESOURCE_ASSESSMENT = "resource_assessment"
    SYLLABUS_DESIGN = "syllabus_design"
    SLIDE_PLANNING = "slide_planning"
    ASSESSMENT_PLANNING = "assessment_planning"
    MATERIALS_GENERATION = "materials_generation"
    VALIDATION = "validation"
    PILOT_TESTING = "pilot_testing"

    @classmethod
    def parse(cls, name: str) -> "SubtaskId":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise UnknownSubtask.bad_name(name) from None


S = SubtaskId

# prerequisites per subtask; the three analysis subtasks are mutually
# independent and may run concurrently under a flag
DAG: dict[SubtaskId, tuple[SubtaskId, ...]] = {
    S.OBJECTIVES_DEFINITION: (),
    S.AUDIENCE_ANALYSIS: (),
    S.RESOURCE_ASSESSMENT: (),
    S.SYLLABUS_DESIGN: (S.OBJECTIVES_DEFINITION, S.AUDIENCE_ANALYSIS, S.RESOURCE_ASSESSMENT),
    S.SLIDE_PLANNING: (S.SYLLABUS_DESIGN,),
    S.ASSESSMENT_PLANNING: (S.SYLLABUS_DESIGN,),
    S.MATERIALS_GENERATION: (S.SLIDE_PLANNING, S.ASSESSMENT_PLANNING),
    S.VALIDATION: (S.MATERIALS_GENERATION,),
    S.PILOT_TESTING: (S.VALIDATION,),
}

SUBTASK_ORDER: tuple[SubtaskId, ...] = (
    S.OBJECTIVES_DEFINITION,
    S.AUDIENCE_ANALYSIS,
    S.RESOURCE_ASSESSMENT,
    S.SYLLABUS_DESIGN,
    S.SLIDE_PLANNING,
    S.ASSESSMENT_PLANNING,
    S.MATERIALS_GENERATION,
    S.VALIDATION,
    S.PILOT_TESTING,
)


def descendants(subtask: SubtaskId) -> set[SubtaskId]:
    out: set[SubtaskId] = set()
    frontier = {subtask}
    while frontier:
        nxt = {s for s in SubtaskId if any(p in frontier for p in DAG[s])}
        nxt -= out
        out |= nxt
        frontier = nxt
    return out


@dataclass(frozen=True)
class CompletedRecord:
    artifacts: dict[str, str]  # artifact name -> run-relative path
    transcript_ref: str
    finished_at: str
    catalog_hash: str = ""

    def to_dict(self) -> dict:
        return {
            "artifacts": dict(self.artifacts),
            "transcript_ref": self.transcript_ref,
            "finished_at": self.finished_at,
            "catalog_hash": self.catalog_hash,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CompletedRecord":
        return cls(
            artifacts=dict(data["artifacts"]),
            transcript_ref=data["transcript_ref"],
            finished_at=data["finished_at"],
            catalog_hash=data.get("catalog_hash", ""),
        )


@dataclass(frozen=True)
class PausePoint:
    subtask: SubtaskId
    artifacts_preview: dict[str, str]
    issued_at: str
    pause_id: str

    @classmethod
    def fresh(cls, subtask: SubtaskId, previews: dict[str, str]) -> "PausePoint":
        return cls(
            subtask=subtask,
            artifacts_preview=previews,
            issued_at=utcnow_iso(),
            pause_id=uuid.uuid4().hex,
        )

    def to_dict(self) -> dict:
        return {
            "subtask": self.subtask.value,
            "artifacts_preview": dict(self.artifacts_preview),
            "issued_at": self.issued_at,
            "pause_id": self.pause_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PausePoint":
        return cls(
            subtask=SubtaskId(data["subtask"]),
            artifacts_preview=dict(data["artifacts_preview"]),
            issued_at=data["issued_at"],
            pause_id=data["pause_id"],
        )


@dataclass(frozen=True)
class FeedbackNote:
    """One targeted suggestion; humans and reviewer agents may author them."""

    target_subtask: SubtaskId
    suggestion: str
    author: str = "human"  # human | agent
    applied_in_rerun: bool = False

    def __post_init__(self) -> None:
        if not self.suggestion.strip():
            raise InvalidDocument("feedback suggestion must be non-empty")
        if self.author not in ("human", "agent"):
            raise InvalidDocument(f"bad feedback author {self.author!r}")

    def to_dict(self) -> dict:
        return {
            "target_subtask": self.target_subtask.value,
            "suggestion": self.suggestion,
            "author": self.author,
            "applied_in_rerun": self.applied_in_rerun,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FeedbackNote":
        return cls(
            target_subtask=SubtaskId(data["target_subtask"]),
            suggestion=data["suggestion"],
            author=data.get("author", "human"),
            applied_in_rerun=bool(data.get("applied_in_rerun", False)),
        )


@dataclass(frozen=True)
class CoPilotDecision:
    action: str  # approve | modify | guide
    text: str = ""
    decision_id: str = ""

    def __post_init__(self) -> None:
        if self.action not in ("approve", "modify", "guide"):
            raise InvalidDocument(f"bad decision action {self.action!r}")
        if self.action in ("modify", "guide") and not self.text.strip():
            raise InvalidDocument(f"{self.action} decisions must carry text")
        if not self.decision_id:
            object.__setattr__(self, "decision_id", uuid.uuid4().hex)

    def to_dict(self) -> dict:
        return {"action": self.action, "text": self.text, "decision_id": self.decision_id}

    @classmethod
    def from_dict(cls, data: dict) -> "CoPilotDecision":
        return cls(
            action=data["action"],
            text=data.get("text", ""),
            decision_id=data.get("decision_id", ""),
        )


@dataclass
class PipelineState:
    run_id: str
    mode: ModeId
    course: CourseSpec
    catalog: Optional[EducatorCatalog]
    created_at: str
    backend_model_name: str
    slide_budget: int
    completed: dict[SubtaskId, CompletedRecord] = field(default_factory=dict)
    pending_pause: Optional[PausePoint] = None
    feedback_log: list[FeedbackNote] = field(default_factory=list)
    stale: set[SubtaskId] = field(default_factory=set)
    guidance_for_next: list[str] = field(default_factory=list)
    applied_decision_ids: list[str] = field(default_factory=list)
    catalog_hash: str = ""
    closed: bool = False

    def validate(self) -> "PipelineState":
        for subtask in self.completed:
            for prerequisite in DAG[subtask]:
                if prerequisite not in self.completed:
                    raise InvalidDocument(
                        f"{subtask.value} recorded before prerequisite {prerequisite.value}"
                    )
        if self.pending_pause is not None and self.mode is not ModeId.FULL_COPILOT:
            raise InvalidDocument("pause points exist only in full co-pilot mode")
        return self

    def next_subtask(self) -> Optional[SubtaskId]:
        for subtask in SUBTASK_ORDER:
            if subtask not in self.completed:
                return subtask
        return None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "mode": self.mode.value,
            "course": self.course.to_dict(),
            "catalog": self.catalog.to_dict() if self.catalog else None,
            "created_at": self.created_at,
            "backend_model_name": self.backend_model_name,
            "slide_budget": self.slide_budget,
            "completed": {s.value: r.to_dict() for s, r in self.completed.items()},
            "pending_pause": self.pending_pause.to_dict() if self.pending_pause else None,
            "feedback_log": [n.to_dict() for n in self.feedback_log],
            "stale": sorted(s.value for s in self.stale),
            "guidance_for_next": list(self.guidance_for_next),
            "applied_decision_ids": list(self.applied_decision_ids),
            "catalog_hash": self.catalog_hash,
            "closed": self.closed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineState":
        catalog = data.get("catalog")
        return cls(
            run_id=data["run_id"],
            mode=ModeId.parse(data["mode"]),
            course=CourseSpec.from_dict(data["course"]),
            catalog=EducatorCatalog.from_dict(catalog) if catalog else None,
            created_at=data["created_at"],
            backend_model_name=data["backend_model_name"],
            slide_budget=int(data["slide_budget"]),
            completed={
                SubtaskId(s): CompletedRecord.from_dict(r)
                for s, r in data.get("completed", {}).items()
            },
            pending_pause=(
                PausePoint.from_dict(data["pending_pause"]) if data.get("pending_pause") else None
            ),
            feedback_log=[FeedbackNote.from_dict(n) for n in data.get("feedback_log", [])],
            stale={SubtaskId(s) for s in data.get("stale", [])},
            guidance_for_next=list(data.get("guidance_for_next", [])),
            applied_decision_ids=list(data.get("applied_decision_ids", [])),
            catalog_hash=data.get("catalog_hash", ""),
            closed=bool(data.get("closed", False)),
        ).validate()


class RunPaths:
    """Run directory layout; every artifact path is run-relative on disk."""

    def __init__(self, root: Path, run_id: str):
        self.root = Path(root)
        self.run_id = run_id
        self.run_dir = self.root / run_id

    @property
    def state_file(self) -> Path:
        return self.run_dir / "state.json"

    @property
    def checkpoints_dir(self) -> Path:
        return self.run_dir / "checkpoints"

    @property
    def transcripts_dir(self) -> Path:
        return self.run_dir / "transcripts"

    @property
    def artifacts_dir(self) -> Path:
        return self.run_dir / "artifacts"

    @property
    def reports_dir(self) -> Path:
        return self.run_dir / "reports"

    @property
    def events_file(self) -> Path:
        return self.run_dir / "events.ndjson"

    @property
    def decisions_file(self) -> Path:
        return self.run_dir / "decisions.ndjson"

    def artifact(self, relative: str) -> Path:
        return self.run_dir / relative

    def ensure(self) -> "RunPaths":
        for directory in (
            self.run_dir,
            self.checkpoints_dir,
            self.transcripts_dir,
            self.artifacts_dir,
            self.artifacts_dir / "chapters",
            self.artifacts_dir / "decks",
            self.artifacts_dir / "scripts",
            self.artifacts_dir / "assessments",
            self.reports_dir,
        ):
            directory.mkdir(parents=True, exist_ok=True)
        return self

    def exists(self) -> bool:
        return self.run_dir.is_dir()


def _wrap(state: PipelineState) -> str:
    body = state.to_dict()
    payload = canonical_dumps(body)
    return canonical_dumps({"sha256": sha256_hex(payload), "state": body})


def save_state(state: PipelineState, paths: RunPaths) -> None:
    atomic_write_text(paths.state_file, _wrap(state))


def write_checkpoint(state: PipelineState, paths: RunPaths) -> Path:
    index = len(state.completed)
    latest = sorted(state.completed, key=lambda s: SUBTASK_ORDER.index(s))
    name = latest[-1].value if latest else "initial"
    path = paths.checkpoints_dir / f"{index:02d}_{name}.json"
    atomic_write_text(path, _wrap(state))
    save_state(state, paths)
    return path


def _load_wrapped(path: Path) -> PipelineState:
    data = json.loads(path.read_text(encoding="utf-8"))
    body = data.get("state")
    recorded = data.get("sha256", "")
    if body is None or sha256_hex(canonical_dumps(body)) != recorded:
        raise CorruptCheckpoint(f"hash mismatch in {path.name}")
    return PipelineState.from_dict(body)


def load_state(paths: RunPaths) -> PipelineState:
    """Load the newest intact state; a tampered file raises CorruptCheckpoint."""
    if not paths.exists():
        raise UnknownRun(f"no run directory for {paths.run_id!r}")
    if paths.state_file.exists():
        return _load_wrapped(paths.state_file)
    checkpoints = sorted(paths.checkpoints_dir.glob("*.json"))
    if not checkpoints:
        raise UnknownRun(f"run {paths.run_id!r} has no recoverable state")
    return _load_wrapped(checkpoints[-1])


class EventKind(str, Enum):
    SUBTASK_STARTED = "subtask_started"
    SUBTASK_COMPLETED = "subtask_completed"
    PAUSE_ISSUED = "pause_issued"
    DECISION_APPLIED = "decision_applied"
    COMPILE_ATTEMPT = "compile_attempt"
    RUN_FINISHED = "run_finished"
    ERROR = "error"


@dataclass(frozen=True)
class ProgressEvent:
    sequence: int
    run_id: str
    kind: EventKind
    at: str
    payload: dict[str, Any]

    def to_dict(self) -> dict:
        return {
            "sequence": self.sequence,
            "run_id": self.run_id,
            "kind": self.kind.value,
            "at": self.at,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProgressEvent":
        return cls(
            sequence=int(data["sequence"]),
            run_id=data["run_id"],
            kind=EventKind(data["kind"]),
            at=data["at"],
            payload=data.get("payload", {}),
        )


class EventLog:
    """Append-only progress log with strictly increasing sequence numbers.

    The file is the source of truth; in-process subscribers wait on a
    condition variable so the service can stream without polling loops.
    """

    def __init__(self, paths: RunPaths):
        self.paths = paths
        self._cond = threading.Condition()
        self._last_sequence = 0
        if self.paths.events_file.exists():
            for event in self.read_all():
                self._last_sequence = max(self._last_sequence, event.sequence)

    def append(self, kind: EventKind, payload: Optional[dict] = None) -> ProgressEvent:
        with self._cond:
            self._last_sequence += 1
            event = ProgressEvent(
                sequence=self._last_sequence,
                run_id=self.paths.run_id,
                kind=kind,
                at=utcnow_iso(),
                payload=payload or {},
            )
            with self.paths.events_file.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")
                handle.flush()
            self._cond.notify_all()
        return event

    def read_all(self) -> list[ProgressEvent]:
        if not self.paths.events_file.exists():
            return []
        events = []
        for line in self.paths.events_file.read_text(encoding="utf-8").splitlines():
            if line.strip():
                events.append(ProgressEvent.from_dict(json.loads(line)))
        return events

    def read_after(self, sequence: int) -> list[ProgressEvent]:
        return [e for e in self.read_all() if e.sequence > sequence]

    def wait_after(self, sequence: int, timeout: float) -> list[ProgressEvent]:
        """Block until events newer than `sequence` exist (or timeout)."""
        with self._cond:
            if self._last_sequence <= sequence:
                self._cond.wait(timeout)
        return self.read_after(sequence)

    @property
    def last_sequence(self) -> int:
        return self._last_sequence
