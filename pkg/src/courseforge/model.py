"""Domain documents exchanged between pipeline subtasks.

Every type here is an immutable value document with `to_dict` / `from_dict`
and a `validate` that enforces its invariants. Documents are persisted as
canonical JSON, one file per artifact, under the run directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Optional

from courseforge.errors import InvalidDocument


class ModeId(str, Enum):
    """The four operational modes, ordered by increasing human involvement."""

    AUTONOMOUS = "autonomous"
    CATALOG_GUIDED = "catalog_guided"
    FEEDBACK_GUIDED = "feedback_guided"
    FULL_COPILOT = "full_copilot"

    @classmethod
    def parse(cls, raw: str) -> "ModeId":
        try:
            return cls(raw.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise InvalidDocument(f"unknown mode {raw!r}; valid modes: {valid}") from None


class CourseLevel(str, Enum):
    UNDERGRADUATE = "undergraduate"
    GRADUATE = "graduate"
    UNSPECIFIED = "unspecified"


@dataclass(frozen=True)
class CourseSpec:
    """The run's minimal input: a course identity plus the requested mode."""

    course_title: str
    level: CourseLevel = CourseLevel.UNSPECIFIED
    topic_hint: Optional[str] = None
    mode: ModeId = ModeId.AUTONOMOUS

    def validate(self) -> "CourseSpec":
        if not self.course_title.strip():
            raise InvalidDocument("course_title must be non-empty")
        return self

    def to_dict(self) -> dict:
        return {
            "course_title": self.course_title,
            "level": self.level.value,
            "topic_hint": self.topic_hint,
            "mode": self.mode.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CourseSpec":
        return cls(
            course_title=data["course_title"],
            level=CourseLevel(data.get("level", "unspecified")),
            topic_hint=data.get("topic_hint"),
            mode=ModeId.parse(data.get("mode", "autonomous")),
        ).validate()


@dataclass(frozen=True)
class Objective:
    statement: str
    bloom_verb: str


@dataclass(frozen=True)
class LearningObjectives:
    """Ordered course objectives, each tagged with its measurable verb."""

    objectives: tuple[Objective, ...]

    def validate(self) -> "LearningObjectives":
        if not self.objectives:
            raise InvalidDocument("objectives list must be non-empty")
        for i, obj in enumerate(self.objectives):
            if not obj.statement.strip():
                raise InvalidDocument(f"objective {i} has an empty statement")
        return self

    def to_dict(self) -> dict:
        return {
            "objectives": [
                {"statement": o.statement, "bloom_verb": o.bloom_verb}
                for o in self.objectives
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LearningObjectives":
        objectives = []
        for entry in data["objectives"]:
            statement = entry["statement"]
            # A missing verb defaults to the statement's leading word.
            words = statement.split()
            verb = entry.get("bloom_verb") or (words[0] if words else "")
            objectives.append(Objective(statement=statement, bloom_verb=verb))
        return cls(objectives=tuple(objectives)).validate()


@dataclass(frozen=True)
class LearnerProfile:
    backgrounds: str
    prior_knowledge: str
    challenges: str

    def validate(self) -> "LearnerProfile":
        for name in ("backgrounds", "prior_knowledge", "challenges"):
            if not getattr(self, name).strip():
                raise InvalidDocument(f"learner profile field {name} must be present")
        return self

    def to_dict(self) -> dict:
        return {
            "backgrounds": self.backgrounds,
            "prior_knowledge": self.prior_knowledge,
            "challenges": self.challenges,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LearnerProfile":
        return cls(
            backgrounds=data["backgrounds"],
            prior_knowledge=data["prior_knowledge"],
            challenges=data["challenges"],
        ).validate()


@dataclass(frozen=True)
class ResourcePlan:
    teaching_needs: str
    institutional_constraints: str
    feasible_strategies: str

    def validate(self) -> "ResourcePlan":
        for name in ("teaching_needs", "institutional_constraints", "feasible_strategies"):
            if not getattr(self, name).strip():
                raise InvalidDocument(f"resource plan field {name} must be present")
        return self

    def to_dict(self) -> dict:
        return {
            "teaching_needs": self.teaching_needs,
            "institutional_constraints": self.institutional_constraints,
            "feasible_strategies": self.feasible_strategies,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResourcePlan":
        return cls(
            teaching_needs=data["teaching_needs"],
            institutional_constraints=data["institutional_constraints"],
            feasible_strategies=data["feasible_strategies"],
        ).validate()


@dataclass(frozen=True)
class WeeklyEntry:
    week_index: int
    topic: str
    readings: str = ""
    assignments: str = ""


@dataclass(frozen=True)
class Syllabus:
    """Weekly course plan plus grading and institutional policy text."""

    weekly_entries: tuple[WeeklyEntry, ...]
    grading_policy: str = ""
    policies: str = ""

    def validate(self) -> "Syllabus":
        if not self.weekly_entries:
            raise InvalidDocument("syllabus must contain at least one weekly entry")
        for i, entry in enumerate(self.weekly_entries):
            if entry.week_index != i + 1:
                raise InvalidDocument(
                    f"week_index must increase strictly from 1; entry {i} has {entry.week_index}"
                )
            if not entry.topic.strip():
                raise InvalidDocument(f"week {entry.week_index} has an empty topic")
        return self

    @property
    def week_indices(self) -> set[int]:
        return {e.week_index for e in self.weekly_entries}

    def to_dict(self) -> dict:
        return {
            "weekly_entries": [
                {
                    "week_index": e.week_index,
                    "topic": e.topic,
                    "readings": e.readings,
                    "assignments": e.assignments,
                }
                for e in self.weekly_entries
            ],
            "grading_policy": self.grading_policy,
            "policies": self.policies,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Syllabus":
        entries = tuple(
            WeeklyEntry(
                week_index=int(e["week_index"]),
                topic=e["topic"],
                readings=e.get("readings", ""),
                assignments=e.get("assignments", ""),
            )
            for e in data["weekly_entries"]
        )
        return cls(
            weekly_entries=entries,
            grading_policy=data.get("grading_policy", ""),
            policies=data.get("policies", ""),
        ).validate()


@dataclass(frozen=True)
class Chapter:
    chapter_index: int
    title: str
    description: str
    source_week_indices: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "chapter_index": self.chapter_index,
            "title": self.title,
            "description": self.description,
            "source_week_indices": list(self.source_week_indices),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Chapter":
        return cls(
            chapter_index=int(data["chapter_index"]),
            title=data["title"],
            description=data.get("description", ""),
            source_week_indices=tuple(int(w) for w in data["source_week_indices"]),
        )


def validate_chapters(chapters: list[Chapter], syllabus: Syllabus) -> list[Chapter]:
    """Check a chapter list against its originating syllabus by set algebra.

    Chapters must be indexed 1..N in order, cover every syllabus week exactly
    once, and preserve week order across chapter boundaries.
    """
    from courseforge.chapterize import CoverageGap  # cycle-free: errors only

    if not chapters:
        raise InvalidDocument("chapter list must be non-empty")
    weeks = syllabus.week_indices
    seen: set[int] = set()
    last_week = 0
    for i, chapter in enumerate(chapters):
        if chapter.chapter_index != i + 1:
            raise InvalidDocument(
                f"chapter_index must increase strictly from 1; position {i} has {chapter.chapter_index}"
            )
        if not chapter.source_week_indices:
            raise CoverageGap(f"chapter {chapter.chapter_index} maps to no weeks")
        for week in chapter.source_week_indices:
            if week not in weeks:
                raise InvalidDocument(
                    f"chapter {chapter.chapter_index} references week {week} not in the syllabus"
                )
            if week in seen:
                raise InvalidDocument(f"week {week} is assigned to more than one chapter")
            if week <= last_week:
                raise InvalidDocument("chapters must preserve syllabus week order")
            seen.add(week)
            last_week = week
    missing = weeks - seen
    if missing:
        raise CoverageGap(f"weeks {sorted(missing)} are mapped to no chapter")
    return chapters


@dataclass(frozen=True)
class OutlineSlide:
    slide_index: int
    title: str
    key_points: tuple[str, ...]


@dataclass(frozen=True)
class SlideOutline:
    """Per-chapter slide plan: titles and key points, one entry per slide."""

    chapter_index: int
    slides: tuple[OutlineSlide, ...]

    def validate(self, slide_budget: int) -> "SlideOutline":
        if not 1 <= len(self.slides) <= slide_budget:
            raise InvalidDocument(
                f"slide count {len(self.slides)} outside [1, {slide_budget}]"
            )
        for i, slide in enumerate(self.slides):
            if slide.slide_index != i + 1:
                raise InvalidDocument("slide_index must be contiguous from 1")
        return self

    @property
    def slide_indices(self) -> set[int]:
        return {s.slide_index for s in self.slides}

    def to_dict(self) -> dict:
        return {
            "chapter_index": self.chapter_index,
            "slides": [
                {
                    "slide_index": s.slide_index,
                    "title": s.title,
                    "key_points": list(s.key_points),
                }
                for s in self.slides
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, slide_budget: int = 30) -> "SlideOutline":
        slides = tuple(
            OutlineSlide(
                slide_index=int(s["slide_index"]),
                title=s["title"],
                key_points=tuple(s.get("key_points", [])),
            )
            for s in data["slides"]
        )
        return cls(chapter_index=int(data["chapter_index"]), slides=slides).validate(slide_budget)


@dataclass(frozen=True)
class SlideContent:
    slide_index: int
    body: str
    speaker_notes_draft: Optional[str] = None

    def validate(self) -> "SlideContent":
        if not self.body.strip():
            raise InvalidDocument(f"slide {self.slide_index} body must be non-empty")
        return self

    def to_dict(self) -> dict:
        return {
            "slide_index": self.slide_index,
            "body": self.body,
            "speaker_notes_draft": self.speaker_notes_draft,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SlideContent":
        return cls(
            slide_index=int(data["slide_index"]),
            body=data["body"],
            speaker_notes_draft=data.get("speaker_notes_draft"),
        ).validate()


class CompileStatus(str, Enum):
    UNCOMPILED = "uncompiled"
    SUCCESS = "success"
    FAILED = "failed"


@dataclass(frozen=True)
class SlideDeckSource:
    """One chapter's Beamer source plus its sanitize/compile bookkeeping.

    `pdf_path` is relative to the run directory so deck documents stay
    byte-identical across runs of the same course.
    """

    chapter_index: int
    tex_source: str
    sanitized: bool = False
    compile_status: CompileStatus = CompileStatus.UNCOMPILED
    pdf_path: Optional[str] = None

    def validate(self) -> "SlideDeckSource":
        if self.compile_status is CompileStatus.SUCCESS and not self.pdf_path:
            raise InvalidDocument("a successfully compiled deck must carry a pdf_path")
        if self.compile_status is not CompileStatus.UNCOMPILED and not self.sanitized:
            raise InvalidDocument("decks must be sanitized before any compile attempt")
        return self

    def to_dict(self) -> dict:
        return {
            "chapter_index": self.chapter_index,
            "tex_source": self.tex_source,
            "sanitized": self.sanitized,
            "compile_status": self.compile_status.value,
            "pdf_path": self.pdf_path,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SlideDeckSource":
        return cls(
            chapter_index=int(data["chapter_index"]),
            tex_source=data["tex_source"],
            sanitized=bool(data.get("sanitized", False)),
            compile_status=CompileStatus(data.get("compile_status", "uncompiled")),
            pdf_path=data.get("pdf_path"),
        ).validate()


@dataclass(frozen=True)
class ScriptSlide:
    slide_index: int
    script: str
    transition_cue: str = ""


@dataclass(frozen=True)
class SlideScript:
    """Presenter-ready speaking script, one entry per outline slide."""

    chapter_index: int
    per_slide: tuple[ScriptSlide, ...]

    def validate(self, outline: Optional[SlideOutline] = None) -> "SlideScript":
        indices = [s.slide_index for s in self.per_slide]
        if sorted(indices) != list(range(1, len(indices) + 1)):
            raise InvalidDocument("script slide indices must be contiguous from 1")
        if outline is not None and set(indices) != outline.slide_indices:
            raise InvalidDocument(
                "script must cover exactly the outline's slide indices"
            )
        return self

    def to_dict(self) -> dict:
        return {
            "chapter_index": self.chapter_index,
            "per_slide": [
                {
                    "slide_index": s.slide_index,
                    "script": s.script,
                    "transition_cue": s.transition_cue,
                }
                for s in self.per_slide
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, outline: Optional[SlideOutline] = None) -> "SlideScript":
        per_slide = tuple(
            ScriptSlide(
                slide_index=int(s["slide_index"]),
                script=s["script"],
                transition_cue=s.get("transition_cue", ""),
            )
            for s in data["per_slide"]
        )
        return cls(chapter_index=int(data["chapter_index"]), per_slide=per_slide).validate(outline)


@dataclass(frozen=True)
class Mcq:
    stem: str
    options: tuple[str, str, str, str]
    correct_index: int
    explanation: str = ""


@dataclass(frozen=True)
class AssessmentPack:
    """Chapter assessment bundle: 3-5 MCQs plus activities and prompts."""

    chapter_index: int
    mcqs: tuple[Mcq, ...]
    activities: tuple[str, ...] = ()
    discussion_questions: tuple[str, ...] = ()
    rubric_notes: str = ""

    def validate(self) -> "AssessmentPack":
        if not 3 <= len(self.mcqs) <= 5:
            raise InvalidDocument(
                f"assessment pack needs 3-5 MCQs per chapter unit, got {len(self.mcqs)}"
            )
        for i, mcq in enumerate(self.mcqs):
            if len(mcq.options) != 4:
                raise InvalidDocument(f"MCQ {i} must have exactly 4 options")
            if not 0 <= mcq.correct_index <= 3:
                raise InvalidDocument(f"MCQ {i} correct_index must be in 0..3")
        return self

    def to_dict(self) -> dict:
        return {
            "chapter_index": self.chapter_index,
            "mcqs": [
                {
                    "stem": m.stem,
                    "options": list(m.options),
                    "correct_index": m.correct_index,
                    "explanation": m.explanation,
                }
                for m in self.mcqs
            ],
            "activities": list(self.activities),
            "discussion_questions": list(self.discussion_questions),
            "rubric_notes": self.rubric_notes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AssessmentPack":
        mcqs = tuple(
            Mcq(
                stem=m["stem"],
                options=tuple(m["options"]),
                correct_index=int(m["correct_index"]),
                explanation=m.get("explanation", ""),
            )
            for m in data["mcqs"]
        )
        return cls(
            chapter_index=int(data["chapter_index"]),
            mcqs=mcqs,
            activities=tuple(data.get("activities", [])),
            discussion_questions=tuple(data.get("discussion_questions", [])),
            rubric_notes=data.get("rubric_notes", ""),
        ).validate()


@dataclass(frozen=True)
class SlidePlanChapter:
    chapter_index: int
    key_concepts: tuple[str, ...]
    flow_notes: str = ""


@dataclass(frozen=True)
class SlidePlan:
    """Design-phase bridge artifact: per-chapter key concepts and flow notes."""

    chapters: tuple[SlidePlanChapter, ...]

    def to_dict(self) -> dict:
        return {
            "chapters": [
                {
                    "chapter_index": c.chapter_index,
                    "key_concepts": list(c.key_concepts),
                    "flow_notes": c.flow_notes,
                }
                for c in self.chapters
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SlidePlan":
        return cls(
            chapters=tuple(
                SlidePlanChapter(
                    chapter_index=int(c["chapter_index"]),
                    key_concepts=tuple(c.get("key_concepts", [])),
                    flow_notes=c.get("flow_notes", ""),
                )
                for c in data["chapters"]
            )
        )


@dataclass(frozen=True)
class AssessmentPlan:
    """Design-phase assessment strategy feeding per-chapter assessment packs."""

    strategy: str
    milestones: tuple[str, ...] = ()
    feedback_mechanisms: tuple[str, ...] = ()
    rubric_notes: str = ""

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "milestones": list(self.milestones),
            "feedback_mechanisms": list(self.feedback_mechanisms),
            "rubric_notes": self.rubric_notes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AssessmentPlan":
        return cls(
            strategy=data["strategy"],
            milestones=tuple(data.get("milestones", [])),
            feedback_mechanisms=tuple(data.get("feedback_mechanisms", [])),
            rubric_notes=data.get("rubric_notes", ""),
        )


@dataclass(frozen=True)
class PackageManifest:
    run_id: str
    mode: ModeId
    created_at: str
    backend_model_name: str

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "mode": self.mode.value,
            "created_at": self.created_at,
            "backend_model_name": self.backend_model_name,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PackageManifest":
        return cls(
            run_id=data["run_id"],
            mode=ModeId.parse(data["mode"]),
            created_at=data["created_at"],
            backend_model_name=data["backend_model_name"],
        )


@dataclass(frozen=True)
class InstructionalPackage:
    """The complete six-kind output bundle for one course run."""

    objectives: LearningObjectives
    syllabus: Syllabus
    chapters: tuple[Chapter, ...]
    decks: tuple[SlideDeckSource, ...]
    scripts: tuple[SlideScript, ...]
    assessments: tuple[AssessmentPack, ...]
    manifest: PackageManifest

    def validate(self) -> "InstructionalPackage":
        self.objectives.validate()
        self.syllabus.validate()
        validate_chapters(list(self.chapters), self.syllabus)
        expected = [c.chapter_index for c in self.chapters]
        for name, docs in (
            ("decks", self.decks),
            ("scripts", self.scripts),
            ("assessments", self.assessments),
        ):
            got = [d.chapter_index for d in docs]
            if got != expected:
                raise InvalidDocument(
                    f"{name} must be indexed 1:1 with chapters; expected {expected}, got {got}"
                )
        return self

    def to_dict(self) -> dict:
        return {
            "objectives": self.objectives.to_dict(),
            "syllabus": self.syllabus.to_dict(),
            "chapters": [c.to_dict() for c in self.chapters],
            "decks": [d.to_dict() for d in self.decks],
            "scripts": [s.to_dict() for s in self.scripts],
            "assessments": [a.to_dict() for a in self.assessments],
            "manifest": self.manifest.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InstructionalPackage":
        return cls(
            objectives=LearningObjectives.from_dict(data["objectives"]),
            syllabus=Syllabus.from_dict(data["syllabus"]),
            chapters=tuple(Chapter.from_dict(c) for c in data["chapters"]),
            decks=tuple(SlideDeckSource.from_dict(d) for d in data["decks"]),
            scripts=tuple(SlideScript.from_dict(s) for s in data["scripts"]),
            assessments=tuple(AssessmentPack.from_dict(a) for a in data["assessments"]),
            manifest=PackageManifest.from_dict(data["manifest"]),
        ).validate()


__all__ = [
    "AssessmentPack",
    "AssessmentPlan",
    "Chapter",
    "CompileStatus",
    "CourseLevel",
    "CourseSpec",
    "InstructionalPackage",
    "LearnerProfile",
    "LearningObjectives",
    "Mcq",
    "ModeId",
    "Objective",
    "OutlineSlide",
    "PackageManifest",
    "ResourcePlan",
    "ScriptSlide",
    "SlideContent",
    "SlideDeckSource",
    "SlideOutline",
    "SlidePlan",
    "SlidePlanChapter",
    "SlideScript",
    "Syllabus",
    "WeeklyEntry",
    "validate_chapters",
]
