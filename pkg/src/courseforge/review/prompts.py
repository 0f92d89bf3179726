"""Build reviewer prompts over a run's stored materials.

Three personas: the program-chair and test-student reviewers used during
validation, and a rubric reviewer that rates every requested metric on
the anchored 1-5 scale. Prompts embed metric names, anchor texts, and
the shared evaluation form.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from courseforge.agents.gateway import ChatMessage
from courseforge.agents.prompts import EVALUATION_FORM, DeliberationKind, system_prompt
from courseforge.agents.prompts import CASTS
from courseforge.errors import CourseforgeError
from courseforge.pipeline.state import RunPaths
from courseforge.review.rubric import LIKERT_ANCHORS, RUBRIC, OutputKind
from courseforge.util import read_json


class MissingMaterial(CourseforgeError):
    """Requested materials are absent from the run directory."""


PERSONA_KINDS = {
    "ProgramChair": DeliberationKind.VALIDATION_CHAIR,
    "TestStudent": DeliberationKind.VALIDATION_STUDENT,
    "RubricReviewer": DeliberationKind.RUBRIC_REVIEW,
}


def _material_excerpt(kind: OutputKind, paths: RunPaths, budget: int = 4000) -> str:
    art = paths.artifacts_dir

    def many(directory: str) -> str:
        files = sorted((art / directory).glob("chapter_*.json"))
        if not files:
            raise MissingMaterial(f"no {directory} materials in run {paths.run_id}")
        return json.dumps([read_json(f) for f in files], indent=2, sort_keys=True)

    if kind is OutputKind.LO:
        source = art / "objectives.json"
    elif kind is OutputKind.SY:
        source = art / "syllabus.json"
    elif kind is OutputKind.AS:
        return many("assessments")[:budget]
    elif kind is OutputKind.SC:
        return many("scripts")[:budget]
    elif kind is OutputKind.SL:
        files = sorted((art / "decks").glob("chapter_*.json"))
        if not files:
            raise MissingMaterial(f"no deck materials in run {paths.run_id}")
        decks = []
        for f in files:
            doc = read_json(f)
            doc["tex_source"] = doc["tex_source"][:1200]
            decks.append(doc)
        return json.dumps(decks, indent=2, sort_keys=True)[:budget]
    else:  # IP: the package as a whole
        source = art / "manifest.json"
    if not source.exists():
        raise MissingMaterial(f"missing {source.name} in run {paths.run_id}")
    return json.dumps(read_json(source), indent=2, sort_keys=True)[:budget]


def build_review_prompt(
    kinds: Sequence[OutputKind],
    paths: RunPaths,
    persona: str = "RubricReviewer",
) -> list[ChatMessage]:
    """Compose [system, user] messages asking for anchored 1-5 ratings."""
    if not kinds:
        raise MissingMaterial("no output kinds requested for review")
    if persona not in PERSONA_KINDS:
        raise CourseforgeError(
            f"unknown persona {persona!r}; valid: {sorted(PERSONA_KINDS)}"
        )
    kind = PERSONA_KINDS[persona]
    role = CASTS[kind][0]

    sections: list[str] = ["Review the attached course materials using the fixed rubric below."]
    for output_kind in kinds:
        sections.append(f"## Materials: {output_kind.value} ({output_kind.display_name})")
        for metric in RUBRIC[output_kind]:
            sections.append(f"- {metric.metric_name}: {metric.description}")
        sections.append("```json\n" + _material_excerpt(output_kind, paths) + "\n```")

    anchors = "\n".join(f"{score}: {text}" for score, text in sorted(LIKERT_ANCHORS.items(), reverse=True))
    sections.append("Rating scale (revision effort):\n" + anchors)
    sections.append(
        "Rate each metric above with an integer 1-5 as `Metric: n/5` under a "
        "heading for its material kind."
    )
    sections.append(EVALUATION_FORM)

    return [
        ChatMessage(role_label="system", content=system_prompt(kind, role)),
        ChatMessage(role_label="user", content="\n\n".join(sections)),
    ]
