from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from courseforge.chapterize import CoverageGap
from courseforge.errors import InvalidDocument
from courseforge.model import (
    AssessmentPack,
    Chapter,
    CompileStatus,
    CourseSpec,
    LearningObjectives,
    Mcq,
    ModeId,
    SlideDeckSource,
    SlideOutline,
    SlideScript,
    Syllabus,
    validate_chapters,
)


def make_syllabus(weeks: int) -> Syllabus:
    return Syllabus.from_dict(
        {
            "weekly_entries": [
                {"week_index": i, "topic": f"Topic {i}"} for i in range(1, weeks + 1)
            ]
        }
    )


def test_course_spec_requires_title():
    with pytest.raises(InvalidDocument):
        CourseSpec(course_title="   ").validate()


def test_mode_parse_rejects_unknown():
    with pytest.raises(InvalidDocument, match="autonomous"):
        ModeId.parse("turbo")


def test_objectives_fill_bloom_verb_from_leading_word():
    doc = LearningObjectives.from_dict(
        {"objectives": [{"statement": "Explain the basics."}]}
    )
    assert doc.objectives[0].bloom_verb == "Explain"


def test_objectives_reject_empty():
    with pytest.raises(InvalidDocument):
        LearningObjectives.from_dict({"objectives": []})


def test_syllabus_week_indices_must_start_at_one():
    with pytest.raises(InvalidDocument):
        Syllabus.from_dict({"weekly_entries": [{"week_index": 2, "topic": "x"}]})


def test_chapter_coverage_gap_detected():
    syllabus = make_syllabus(3)
    chapters = [Chapter(1, "a", "", (1, 2))]
    with pytest.raises(CoverageGap):
        validate_chapters(chapters, syllabus)


def test_chapter_double_assignment_rejected():
    syllabus = make_syllabus(2)
    chapters = [Chapter(1, "a", "", (1, 2)), Chapter(2, "b", "", (2,))]
    with pytest.raises(InvalidDocument):
        validate_chapters(chapters, syllabus)


def test_chapter_order_must_follow_weeks():
    syllabus = make_syllabus(2)
    chapters = [Chapter(1, "a", "", (2,)), Chapter(2, "b", "", (1,))]
    with pytest.raises(InvalidDocument):
        validate_chapters(chapters, syllabus)


def test_deck_success_requires_pdf():
    with pytest.raises(InvalidDocument):
        SlideDeckSource(
            chapter_index=1, tex_source="x", sanitized=True,
            compile_status=CompileStatus.SUCCESS,
        ).validate()


def test_deck_compile_requires_sanitized():
    with pytest.raises(InvalidDocument):
        SlideDeckSource(
            chapter_index=1, tex_source="x", sanitized=False,
            compile_status=CompileStatus.FAILED,
        ).validate()


def test_outline_budget_enforced():
    doc = {
        "chapter_index": 1,
        "slides": [
            {"slide_index": i, "title": f"s{i}", "key_points": []} for i in (1, 2, 3)
        ],
    }
    SlideOutline.from_dict(doc, slide_budget=3)
    with pytest.raises(InvalidDocument):
        SlideOutline.from_dict(doc, slide_budget=2)


def test_script_must_cover_outline_indices():
    outline = SlideOutline.from_dict(
        {"chapter_index": 1, "slides": [
            {"slide_index": 1, "title": "a"}, {"slide_index": 2, "title": "b"}]},
    )
    with pytest.raises(InvalidDocument):
        SlideScript.from_dict(
            {"chapter_index": 1, "per_slide": [{"slide_index": 1, "script": "x"}]},
            outline=outline,
        )


def test_assessment_pack_mcq_bounds():
    def pack(n):
        return {
            "chapter_index": 1,
            "mcqs": [
                {"stem": f"q{i}", "options": ["a", "b", "c", "d"], "correct_index": 0}
                for i in range(n)
            ],
        }

    AssessmentPack.from_dict(pack(3))
    AssessmentPack.from_dict(pack(5))
    for bad in (2, 6):
        with pytest.raises(InvalidDocument):
            AssessmentPack.from_dict(pack(bad))


def test_mcq_exactly_four_options():
    with pytest.raises(InvalidDocument):
        AssessmentPack(
            chapter_index=1,
            mcqs=(
                Mcq("q", ("a", "b", "c"), 0),  # type: ignore[arg-type]
                Mcq("q", ("a", "b", "c", "d"), 0),
                Mcq("q", ("a", "b", "c", "d"), 0),
            ),
        ).validate()


# --- serialization round-trips ------------------------------------------------

text = st.text(st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=30).map(
    lambda s: s.strip() or "x"
)


@given(
    topics=st.lists(text, min_size=1, max_size=8),
    grading=st.text(max_size=40),
)
def test_syllabus_round_trip(topics, grading):
    syllabus = Syllabus.from_dict(
        {
            "weekly_entries": [
                {"week_index": i + 1, "topic": topic} for i, topic in enumerate(topics)
            ],
            "grading_policy": grading,
        }
    )
    assert Syllabus.from_dict(syllabus.to_dict()) == syllabus


@given(statements=st.lists(text, min_size=1, max_size=6))
def test_objectives_round_trip(statements):
    doc = LearningObjectives.from_dict(
        {"objectives": [{"statement": s} for s in statements]}
    )
    assert LearningObjectives.from_dict(doc.to_dict()) == doc


def test_spec_round_trip(course):
    assert CourseSpec.from_dict(course.to_dict()) == course
