"""Briefs and context assembly for every deliberation the pipeline runs.

Briefs are deterministic text: course identity lines, the ask, and an
output contract naming the schema the final block must satisfy. Context
documents ride behind the brief as labeled fenced blocks, catalog first
(in catalog-aware modes), then upstream artifacts in dependency order,
then any suggestion blocks appended last.
"""

from __future__ import annotations

from typing import Any, Optional

from courseforge.agents.deliberation import render_context_block, render_suggestion_block
from courseforge.agents.prompts import EVALUATION_FORM
from courseforge.catalog import EducatorCatalog
from courseforge.model import Chapter, CourseSpec


def course_header(course: CourseSpec, subtask_title: str) -> str:
    lines = [f"Subtask: {subtask_title}", f"Course: {course.course_title}", f"Level: {course.level.value}"]
    if course.topic_hint:
        lines.append(f"Topic hint: {course.topic_hint}")
    return "\n".join(lines)


def output_contract(*schema_ids: str) -> str:
    lines = [
        f"Output contract: conclude with a fenced json block matching the `{schema_id}` schema."
        for schema_id in schema_ids
    ]
    return "\n".join(lines)


def brief_objectives(course: CourseSpec) -> str:
    return "\n\n".join(
        [
            course_header(course, "Objectives Definition"),
            "Draft competency-aligned course objectives and refine them together "
            "until they are measurable and realistic for this audience.",
            output_contract("learning_objectives"),
        ]
    )


def brief_audience(course: CourseSpec) -> str:
    return "\n\n".join(
        [
            course_header(course, "Audience Analysis"),
            "Build a learner profile for this course covering student backgrounds, "
            "prior knowledge, and likely challenges.",
            output_contract("learner_profile"),
        ]
    )


def brief_resources(course: CourseSpec) -> str:
    return "\n\n".join(
        [
            course_header(course, "Resource Assessment"),
            "Assess teaching needs and institutional constraints, then define "
            "feasible instructional strategies for delivering this course.",
            output_contract("resource_plan"),
        ]
    )


def brief_syllabus(course: CourseSpec) -> str:
    return "\n\n".join(
        [
            course_header(course, "Syllabus Design"),
            "Develop the full weekly syllabus: topics, readings, and assignments "
            "per week, plus the grading policy and course policies. Choose a week "
            "count that fits the course format described above.",
            output_contract("syllabus"),
        ]
    )


def brief_syllabus_processing(course: CourseSpec, retry: bool = False) -> str:
    ask = (
        "Partition the attached weekly syllabus into ordered chapters for content "
        "development. Merge adjacent weeks only when they continue one topic arc; "
        "every week must appear in exactly one chapter."
    )
    if retry:
        ask += (
            "\n\nYour previous partition left weeks uncovered. Re-partition so the "
            "chapters cover every syllabus week exactly once."
        )
    return "\n\n".join(
        [
            course_header(course, "Syllabus Processing"),
            ask,
            output_contract("chapter_list"),
        ]
    )


def brief_slide_planning(course: CourseSpec) -> str:
    return "\n\n".join(
        [
            course_header(course, "Slide Planning"),
            "For each chapter, agree the key concepts and the instructional flow "
            "that the slide decks will follow.",
            output_contract("slide_plan"),
        ]
    )


def brief_assessment_planning(course: CourseSpec) -> str:
    return "\n\n".join(
        [
            course_header(course, "Assessment Planning"),
            "Define the assessment strategy: project milestones, formative "
            "feedback mechanisms, and grading rubric notes aligned with the "
            "objectives.",
            output_contract("assessment_plan"),
        ]
    )


def _chapter_lines(chapter: Chapter) -> str:
    return f"Chapter {chapter.chapter_index}: {chapter.title}\n{chapter.description}"


def brief_materials_slides(course: CourseSpec, chapter: Chapter, slide_budget: int) -> str:
    return "\n\n".join(
        [
            course_header(course, "Materials Generation - Slides"),
            _chapter_lines(chapter),
            f"Slide budget: {slide_budget}",
            "Produce the slide outline for this chapter (stay within the slide "
            "budget), then clear per-slide educational content, then the Beamer "
            "formatting pass.",
            output_contract("slide_outline", "slide_contents"),
        ]
    )


def brief_materials_script(course: CourseSpec, chapter: Chapter) -> str:
    return "\n\n".join(
        [
            course_header(course, "Materials Generation - Script"),
            _chapter_lines(chapter),
            "Write the presenter-ready speaking script for every slide in this "
            "chapter, with clear transition cues between frames.",
            output_contract("slide_script"),
        ]
    )


def brief_materials_assessments(course: CourseSpec, chapter: Chapter) -> str:
    return "\n\n".join(
        [
            course_header(course, "Materials Generation - Assessments"),
            _chapter_lines(chapter),
            "Produce the chapter assessment pack: 3-5 multiple-choice questions "
            "with four options and exactly one correct answer each, practical "
            "activities, and discussion questions.",
            output_contract("assessment_pack"),
        ]
    )


def brief_validation(course: CourseSpec) -> str:
    return "\n\n".join(
        [
            course_header(course, "Validation"),
            "Review all attached course materials.",
            EVALUATION_FORM,
        ]
    )


def brief_pilot(course: CourseSpec, chapter_index: int) -> str:
    return "\n\n".join(
        [
            course_header(course, "Pilot Testing"),
            f"Assigned chapter: {chapter_index}",
            "Work through the assigned chapter's deck and script as a student "
            "and report every issue you hit.",
            output_contract("pilot_issues"),
        ]
    )


def assemble_blocks(
    catalog: Optional[EducatorCatalog],
    labeled_documents: list[tuple[str, Any]],
    suggestions: list[str] = (),
) -> list[str]:
    """Catalog first, then artifacts (newest last), then suggestions."""
    blocks: list[str] = []
    if catalog is not None:
        blocks.append(catalog.prompt_block())
    for label, document in labeled_documents:
        blocks.append(render_context_block(label, document))
    for i, suggestion in enumerate(suggestions, start=1):
        blocks.append(render_suggestion_block(i, suggestion))
    return blocks
