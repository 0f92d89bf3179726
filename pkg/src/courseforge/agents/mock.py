"""Bundled deterministic backend for offline runs and tests.

The brain identifies the requesting agent by matching the system prompt
against the prompt pack, reads whatever parameters the brief carries
(course title, chapter, assigned student chapter), and produces canned
but parameterized replies. Given identical requests it returns identical
bytes, so whole pipeline runs are reproducible.

Runnable as an HTTP server (`python -m courseforge.agents.mock`) or
mounted in-process through `mock_transport()`.
"""

from __future__ import annotations

import argparse
import json
import re
from typing import Any, Optional

import httpx
from starlette.requests import Request

from courseforge.agents.prompts import PROMPTS, AgentRole, DeliberationKind

K = DeliberationKind

_PROMPT_INDEX = {template.text: key for key, template in PROMPTS.items()}

_COURSE = re.compile(r"^Course: (.+)$", re.MULTILINE)
_LEVEL = re.compile(r"^Level: (.+)$", re.MULTILINE)
_HINT_WEEKS = re.compile(r"(\d+)-week")
_CHAPTER = re.compile(r"^Chapter (\d+): (.+)$", re.MULTILINE)
_ASSIGNED = re.compile(r"^Assigned chapter: (\d+)$", re.MULTILINE)
_REPAIR_SCHEMA = re.compile(r"`(\w+)` document")
_CONTEXT_BLOCK = re.compile(r"### Context: (\w+)\n```json\n(.*?)\n```", re.DOTALL)


def _fenced(document: Any) -> str:
    return "```json\n" + json.dumps(document, indent=2, sort_keys=True) + "\n```"


class MockBrain:
    """Deterministic reply generator keyed on (deliberation, role)."""

    def handle_body(self, body: dict) -> dict:
        messages = body.get("messages", [])
        prompt_chars = sum(len(m.get("content", "")) for m in messages)
        content = self.respond(messages)
        return {
            "id": "mock-completion",
            "object": "chat.completion",
            "model": body.get("model", "mock-edu"),
            "choices": [
                {
                    "index": 0,
                    "message": {"role": "assistant", "content": content},
                    "finish_reason": "stop",
                }
            ],
            "usage": {
                "prompt_tokens": prompt_chars // 4 + 1,
                "completion_tokens": len(content) // 4 + 1,
                "total_tokens": prompt_chars // 4 + len(content) // 4 + 2,
            },
        }

    # --- request dissection ---------------------------------------------

    def respond(self, messages: list[dict]) -> str:
        system = next((m["content"] for m in messages if m["role"] == "system"), "")
        key = _PROMPT_INDEX.get(system)
        if key is None:
            return "I cannot identify my role; echoing the request.\n" + (
                messages[-1]["content"][:200] if messages else ""
            )
        kind, role = key
        first_user = next((m["content"] for m in messages if m["role"] == "user"), "")
        last_user = next(
            (m["content"] for m in reversed(messages) if m["role"] == "user"), ""
        )
        if "failed validation" in last_user:
            repair = _REPAIR_SCHEMA.search(last_user)
            if repair:
                return self._artifact_for_schema(repair.group(1), first_user)
        return self._dispatch(kind, role, first_user)

    @staticmethod
    def _course(brief: str) -> str:
        match = _COURSE.search(brief)
        return match.group(1).strip() if match else "the course"

    @staticmethod
    def _weeks(brief: str) -> int:
        match = _HINT_WEEKS.search(brief)
        return max(1, int(match.group(1))) if match else 3

    @staticmethod
    def _chapter(brief: str) -> tuple[int, str]:
        match = _CHAPTER.search(brief)
        if match:
            return int(match.group(1)), match.group(2).strip()
        return 1, "Overview"

    @staticmethod
    def _context(brief: str, label: str) -> Optional[Any]:
        for match in _CONTEXT_BLOCK.finditer(brief):
            if match.group(1) == label:
                return json.loads(match.group(2))
        return None

    # --- canned artifacts --------------------------------------------------

    def _objectives(self, brief: str) -> dict:
        course = self._course(brief)
        pairs = [
            ("Explain", f"Explain the core concepts of {course}."),
            ("Apply", f"Apply {course} techniques to realistic problems."),
            ("Evaluate", f"Evaluate trade-offs between alternative approaches in {course}."),
            ("Design", f"Design a small end-to-end project grounded in {course}."),
        ]
        return {
            "objectives": [
                {"statement": statement, "bloom_verb": verb} for verb, statement in pairs
            ]
        }

    def _learner_profile(self, brief: str) -> dict:
        level = "mixed"
        match = _LEVEL.search(brief)
        if match:
            level = match.group(1).strip()
        return {
            "backgrounds": f"Students enter at the {level} level from varied majors.",
            "prior_knowledge": "Basic programming and introductory statistics can be assumed.",
            "challenges": "Uneven math preparation and limited prior tooling experience.",
        }

    def _resource_plan(self, brief: str) -> dict:
        course = self._course(brief)
        return {
            "teaching_needs": f"Lecture room with projector and a lab environment for {course}.",
            "institutional_constraints": "Materials must run on the standard managed laptop image.",
            "feasible_strategies": "Weekly lectures with short hands-on labs and a staged project.",
        }

    def _syllabus(self, brief: str) -> dict:
        course = self._course(brief)
        weeks = self._weeks(brief)
        themes = ["Foundations", "Core Methods", "Applications and Project"]
        entries = []
        for i in range(1, weeks + 1):
            theme = themes[(i - 1) % len(themes)]
            cycle = (i - 1) // len(themes)
            topic = f"{course}: {theme}" if cycle == 0 else f"{course}: {theme} {cycle + 1}"
            entries.append(
                {
                    "week_index": i,
                    "topic": topic,
                    "readings": f"Course notes, unit {i}.",
                    "assignments": f"Exercise set {i}.",
                }
            )
        return {
            "weekly_entries": entries,
            "grading_policy": "Project milestones 60%, exercises 30%, participation 10%.",
            "policies": "Standard academic integrity and accessibility policies apply.",
        }

    def _chapter_list(self, brief: str) -> dict:
        syllabus = self._context(brief, "syllabus") or self._syllabus(brief)
        chapters: list[dict] = []
        for entry in syllabus["weekly_entries"]:
            if chapters and chapters[-1]["title"] == entry["topic"]:
                chapters[-1]["source_week_indices"].append(entry["week_index"])
                continue
            chapters.append(
                {
                    "chapter_index": len(chapters) + 1,
                    "title": entry["topic"],
                    "description": f"Chapter built from the syllabus topic: {entry['topic']}",
                    "source_week_indices": [entry["week_index"]],
                }
            )
        for chapter in chapters:
            weeks = ", ".join(str(w) for w in chapter["source_week_indices"])
            chapter["description"] += f" (weeks {weeks})"
        return {"chapters": chapters}

    def _slide_plan(self, brief: str) -> dict:
        chapters = self._context(brief, "chapters") or {"chapters": []}
        plan = []
        for chapter in chapters.get("chapters", []):
            title = chapter["title"]
            plan.append(
                {
                    "chapter_index": chapter["chapter_index"],
                    "key_concepts": [
                        f"Motivation for {title}",
                        f"Mechanics of {title}",
                        f"Applying {title} in practice",
                    ],
                    "flow_notes": "Open with motivation, demonstrate, then practice.",
                }
            )
        if not plan:
            plan = [{"chapter_index": 1, "key_concepts": ["Motivation"], "flow_notes": ""}]
        return {"chapters": plan}

    def _assessment_plan(self, brief: str) -> dict:
        course = self._course(brief)
        return {
            "strategy": f"Milestone-driven project assessment for {course} with formative checkpoints.",
            "milestones": ["Proposal", "Progress report", "Final submission"],
            "feedback_mechanisms": ["Peer review checkpoints", "Weekly quiz feedback"],
            "rubric_notes": "Grade on correctness, clarity, and process; publish rubrics early.",
        }

    def _slide_outline(self, brief: str) -> dict:
        index, title = self._chapter(brief)
        return {
            "chapter_index": index,
            "slides": [
                {
                    "slide_index": 1,
                    "title": f"{title}: Overview",
                    "key_points": ["Why this matters", "Where it fits in the course"],
                },
                {
                    "slide_index": 2,
                    "title": f"{title}: Worked Example",
                    "key_points": ["Step-by-step walkthrough", "Reading the output"],
                },
                {
                    "slide_index": 3,
                    "title": f"{title}: Practice and Pitfalls",
                    "key_points": ["Common mistakes", "Stability conditions"],
                },
            ],
        }

    def _slide_contents(self, brief: str) -> dict:
        index, title = self._chapter(brief)
        return {
            "chapter_index": index,
            "contents": [
                {
                    "slide_index": 1,
                    "body": (
                        f"{title} anchors this part of the course.\n\n"
                        "- Connects earlier foundations to applied work\n"
                        "- Sets up the worked example on the next slide"
                    ),
                    "speaker_notes_draft": "Set expectations and recap the previous chapter.",
                },
                {
                    "slide_index": 2,
                    "body": (
                        "A minimal end-to-end example:\n\n"
                        "```python\n"
                        "for row in load_rows():\n"
                        "    result = transform(row)\n"
                        "    print(result)\n"
                        "```\n\n"
                        "Walk the loop once by hand before running it."
                    ),
                    "speaker_notes_draft": "Run the loop live; narrate each line.",
                },
                {
                    "slide_index": 3,
                    "body": (
                        "Convergence requires the damping factor γ ≤ 1 throughout.\n\n"
                        "- Check inputs before tuning parameters\n"
                        "- Prefer the simplest configuration that works"
                    ),
                    "speaker_notes_draft": "Emphasize the stability condition.",
                },
            ],
        }

    def _slide_script(self, brief: str) -> dict:
        index, title = self._chapter(brief)
        cues = ["Advance after the agenda.", "Advance once the output is shown.", "Close the chapter."]
        return {
            "chapter_index": index,
            "per_slide": [
                {
                    "slide_index": i,
                    "script": (
                        f"Slide {i} of {title}: talk through each bullet, pause for "
                        "questions, and tie the point back to the chapter goal."
                    ),
                    "transition_cue": cues[(i - 1) % len(cues)],
                }
                for i in (1, 2, 3)
            ],
        }

    def _assessment_pack(self, brief: str) -> dict:
        index, title = self._chapter(brief)
        mcqs = []
        for i in (1, 2, 3):
            mcqs.append(
                {
                    "stem": f"Which statement about {title} (checkpoint {i}) is correct?",
                    "options": [
                        "It never requires validation.",
                        "It is covered by this chapter's worked example.",
                        "It only applies to graduate courses.",
                        "It replaces the course project.",
                    ],
                    "correct_index": 1,
                    "explanation": "The worked example demonstrates exactly this case.",
                }
            )
        return {
            "chapter_index": index,
            "mcqs": mcqs,
            "activities": [
                f"Reproduce the worked example from {title} with your own data.",
                "Pair up and explain the pitfall slide to each other.",
            ],
            "discussion_questions": [
                f"Where would {title} break down in a real deployment?",
                "Which assumption from this chapter is most fragile?",
            ],
            "rubric_notes": "Full credit requires a working artifact plus a short rationale.",
        }

    def _pilot_issues(self, brief: str) -> dict:
        match = _ASSIGNED.search(brief)
        chapter = int(match.group(1)) if match else 1
        return {
            "chapter_index": chapter,
            "issues": [
                {
                    "category": "missing_prerequisite",
                    "detail": (
                        f"Chapter {chapter} assumes comfort with the damping factor "
                        "before it is defined; add a one-slide refresher."
                    ),
                }
            ],
        }

    def _artifact_for_schema(self, schema_id: str, brief: str) -> str:
        producers = {
            "learning_objectives": self._objectives,
            "learner_profile": self._learner_profile,
            "resource_plan": self._resource_plan,
            "syllabus": self._syllabus,
            "chapter_list": self._chapter_list,
            "slide_plan": self._slide_plan,
            "assessment_plan": self._assessment_plan,
            "slide_outline": self._slide_outline,
            "slide_contents": self._slide_contents,
            "slide_script": self._slide_script,
            "assessment_pack": self._assessment_pack,
            "pilot_issues": self._pilot_issues,
        }
        if schema_id not in producers:
            return "I do not know that document kind."
        return "Here is the corrected document.\n\n" + _fenced(producers[schema_id](brief))

    # --- review markdown -----------------------------------------------------

    def _validation_review(self, brief: str, rating: int, persona: str) -> str:
        course = self._course(brief)
        return "\n".join(
            [
                "## Overall Assessment",
                f"The {course} package is coherent and classroom-ready with light edits ({persona} view).",
                "",
                "## Strengths",
                "- Objectives, syllabus, and materials tell one consistent story.",
                "- Worked examples make the abstract content concrete.",
                "",
                "## Areas for Improvement",
                "- Add more varied practice items in later chapters.",
                "- Spell out prerequisites before the first technical slide.",
                "",
                "## Specific Recommendations",
                "- Insert a prerequisite refresher slide in chapter 1.",
                "- Tighten slide titles to one line each.",
                "",
                f"Rating: {rating}/5",
            ]
        )

    def _rubric_review(self, brief: str) -> str:
        lines: list[str] = []
        current_kind = ""
        for line in brief.splitlines():
            section = re.match(r"^## Materials: (\w\w) \((.+)\)$", line)
            if section:
                current_kind = section.group(1)
                lines.append(f"## {current_kind}")
                continue
            metric = re.match(r"^- ([A-Za-z ]+): ", line)
            if metric and current_kind:
                name = metric.group(1).strip()
                score = (len(name) + len(current_kind)) % 3 + 3
                lines.append(f"{name}: {score}/5")
        if not lines:
            return "No metrics were requested."
        lines.append("")
        lines.append("Comments: scores reflect revision effort only.")
        return "\n".join(lines)

    # --- dispatch --------------------------------------------------------

    def _dispatch(self, kind: DeliberationKind, role: AgentRole, brief: str) -> str:
        course = self._course(brief)
        prose = {
            (K.OBJECTIVES_DEFINITION, AgentRole.TEACHING_FACULTY): (
                f"For {course} I propose objectives spanning understanding, application, "
                "evaluation, and design, so assessment can target each level."
            ),
            (K.AUDIENCE_ANALYSIS, AgentRole.TEACHING_FACULTY): (
                f"Enrollment in {course} draws from several programs; I expect gaps in "
                "math preparation and uneven tooling experience."
            ),
            (K.RESOURCE_ASSESSMENT, AgentRole.TEACHING_FACULTY): (
                f"{course} needs a projector-equipped room and lab time; staffing is one "
                "instructor plus a part-time assistant."
            ),
            (K.SYLLABUS_DESIGN, AgentRole.TEACHING_FACULTY): (
                f"Draft plan for {course}: foundations first, core methods in the middle "
                "weeks, applications and the project at the end."
            ),
            (K.SLIDE_PLANNING, AgentRole.TEACHING_FACULTY): (
                "Each topic should open with motivation, then a worked example, then "
                "practice; keep one idea per slide."
            ),
            (K.SLIDE_PLANNING, AgentRole.INSTRUCTIONAL_DESIGNER): (
                "I will structure every chapter as overview, example, practice, so "
                "cognitive load stays flat across the course."
            ),
            (K.ASSESSMENT_PLANNING, AgentRole.TEACHING_FACULTY): (
                f"For {course} I want a staged project with a proposal, a progress "
                "report, and a final submission instead of a heavy exam."
            ),
            (K.MATERIALS_SLIDES, AgentRole.TEACHING_ASSISTANT): (
                "Formatted the deck as Beamer frames; code goes in verbatim blocks and "
                "special characters are escaped.\n\n```latex\n\\begin{frame}{Preview}\n"
                "Content is assembled downstream from the outline and bodies.\n"
                "\\end{frame}\n```"
            ),
            (K.MATERIALS_SCRIPT, AgentRole.INSTRUCTIONAL_DESIGNER): (
                "Pacing plan: one minute per bullet, an engagement question on every "
                "second slide, explicit frame-advance cues."
            ),
            (K.MATERIALS_SCRIPT, AgentRole.TEACHING_FACULTY): (
                "Talking points: stress why the method works, demonstrate the example "
                "end to end, and flag the stability caveat."
            ),
            (K.MATERIALS_ASSESSMENTS, AgentRole.INSTRUCTIONAL_DESIGNER): (
                "Map each item to an objective and a Bloom level; mix recall checks "
                "with one applied task per chapter."
            ),
            (K.MATERIALS_ASSESSMENTS, AgentRole.TEACHING_FACULTY): (
                "Target the worked example and the pitfall discussion; ask students to "
                "predict, then verify."
            ),
        }
        if (kind, role) in prose:
            return prose[(kind, role)]

        artifact = {
            (K.OBJECTIVES_DEFINITION, AgentRole.INSTRUCTIONAL_DESIGNER): (
                "The proposed objectives align with accreditation expectations; here is "
                "the consolidated set.",
                self._objectives,
            ),
            (K.AUDIENCE_ANALYSIS, AgentRole.COURSE_COORDINATOR): (
                "Institutional records support this learner profile.",
                self._learner_profile,
            ),
            (K.RESOURCE_ASSESSMENT, AgentRole.INSTRUCTIONAL_DESIGNER): (
                "Platform review complete; the plan below is feasible.",
                self._resource_plan,
            ),
            (K.SYLLABUS_DESIGN, AgentRole.INSTRUCTIONAL_DESIGNER): (
                "Reviewed for policy alignment; final weekly plan follows.",
                self._syllabus,
            ),
            (K.SYLLABUS_PROCESSING, AgentRole.INSTRUCTIONAL_DESIGNER): (
                "Partitioned the syllabus into chapters.",
                self._chapter_list,
            ),
            (K.SLIDE_PLANNING, AgentRole.TEACHING_ASSISTANT): (
                "Slide plan captured per chapter.",
                self._slide_plan,
            ),
            (K.ASSESSMENT_PLANNING, AgentRole.INSTRUCTIONAL_DESIGNER): (
                "The strategy satisfies competency-based guidelines.",
                self._assessment_plan,
            ),
            (K.MATERIALS_SLIDES, AgentRole.INSTRUCTIONAL_DESIGNER): (
                "Outline below.",
                self._slide_outline,
            ),
            (K.MATERIALS_SLIDES, AgentRole.TEACHING_FACULTY): (
                "Per-slide bodies below.",
                self._slide_contents,
            ),
            (K.MATERIALS_SCRIPT, AgentRole.TEACHING_ASSISTANT): (
                "Presenter script below.",
                self._slide_script,
            ),
            (K.MATERIALS_ASSESSMENTS, AgentRole.TEACHING_ASSISTANT): (
                "Assessment pack below.",
                self._assessment_pack,
            ),
            (K.PILOT_TESTING, AgentRole.TEST_STUDENT): (
                "Walked the assigned chapter; issues below.",
                self._pilot_issues,
            ),
        }
        if (kind, role) in artifact:
            lead, producer = artifact[(kind, role)]
            return lead + "\n\n" + _fenced(producer(brief))

        if kind is K.VALIDATION_CHAIR:
            return self._validation_review(brief, rating=4, persona="program chair")
        if kind is K.VALIDATION_STUDENT:
            return self._validation_review(brief, rating=3, persona="student")
        if kind is K.RUBRIC_REVIEW:
            return self._rubric_review(brief)
        return f"Acknowledged; continuing work on {course}."


def mock_transport(brain: Optional[MockBrain] = None) -> httpx.MockTransport:
    """In-process transport for wiring a gateway straight to the brain."""
    brain = brain or MockBrain()

    def handler(request: httpx.Request) -> httpx.Response:
        if request.url.path.endswith("/chat/completions"):
            body = json.loads(request.content.decode("utf-8"))
            return httpx.Response(200, json=brain.handle_body(body))
        if request.url.path.endswith("/healthz"):
            return httpx.Response(200, json={"status": "ok"})
        return httpx.Response(404, json={"error": "unknown path"})

    return httpx.MockTransport(handler)


def build_app():
    """FastAPI app exposing the brain over HTTP."""
    from fastapi import FastAPI

    app = FastAPI(title="courseforge mock backend")
    brain = MockBrain()

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/v1/chat/completions")
    async def completions(request: Request) -> dict:
        body = await request.json()
        return brain.handle_body(body)

    return app


def main(argv: Optional[list[str]] = None) -> None:
    import uvicorn

    parser = argparse.ArgumentParser(description="Run the deterministic mock backend")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8089)
    args = parser.parse_args(argv)
    uvicorn.run(build_app(), host=args.host, port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
