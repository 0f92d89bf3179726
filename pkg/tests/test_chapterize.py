from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from courseforge.chapterize import CoverageGap, EmptySyllabus, chapterize
from courseforge.model import Syllabus, validate_chapters


def make_syllabus(topics: list[str]) -> Syllabus:
    return Syllabus.from_dict(
        {
            "weekly_entries": [
                {"week_index": i + 1, "topic": topic} for i, topic in enumerate(topics)
            ]
        }
    )


def test_identity_partition_three_weeks():
    chapters = chapterize(make_syllabus(["a", "b", "c"]), target_chapter_count=3)
    assert [c.source_week_indices for c in chapters] == [(1,), (2,), (3,)]


def test_default_partition_is_one_chapter_per_week():
    chapters = chapterize(make_syllabus(["a", "b"]))
    assert len(chapters) == 2


def test_fifteen_week_project_merge():
    topics = [f"unit {i}" for i in range(1, 14)] + ["project", "project"]
    syllabus = make_syllabus(topics)

    def proposer(syl: Syllabus, retry: bool) -> list[dict]:
        chapters = []
        for entry in syl.weekly_entries:
            if chapters and chapters[-1]["title"] == entry.topic:
                chapters[-1]["source_week_indices"].append(entry.week_index)
            else:
                chapters.append(
                    {
                        "chapter_index": len(chapters) + 1,
                        "title": entry.topic,
                        "description": "",
                        "source_week_indices": [entry.week_index],
                    }
                )
        return chapters

    chapters = chapterize(syllabus, proposer=proposer)
    assert len(chapters) == 14
    assert chapters[-1].source_week_indices == (14, 15)
    covered = set()
    for chapter in chapters:
        covered |= set(chapter.source_week_indices)
    assert covered == set(range(1, 16))


def test_coverage_gap_triggers_single_retry():
    syllabus = make_syllabus(["a", "b", "c"])
    calls = []

    def proposer(syl: Syllabus, retry: bool) -> list[dict]:
        calls.append(retry)
        weeks = [[1], [2]] if not retry else [[1], [2], [3]]
        return [
            {"chapter_index": i + 1, "title": f"c{i}", "source_week_indices": w}
            for i, w in enumerate(weeks)
        ]

    chapters = chapterize(syllabus, proposer=proposer)
    assert calls == [False, True]
    assert len(chapters) == 3


def test_coverage_gap_after_retry_propagates():
    syllabus = make_syllabus(["a", "b"])

    def proposer(syl: Syllabus, retry: bool) -> list[dict]:
        return [{"chapter_index": 1, "title": "c", "source_week_indices": [1]}]

    with pytest.raises(CoverageGap):
        chapterize(syllabus, proposer=proposer)


def test_empty_syllabus_rejected():
    syllabus = make_syllabus(["a"])
    object.__setattr__(syllabus, "weekly_entries", ())
    with pytest.raises(EmptySyllabus):
        chapterize(syllabus)


@given(
    weeks=st.integers(min_value=1, max_value=20),
    data=st.data(),
)
def test_contiguous_partition_always_covers(weeks, data):
    count = data.draw(st.integers(min_value=1, max_value=weeks))
    syllabus = make_syllabus([f"t{i}" for i in range(weeks)])
    chapters = chapterize(syllabus, target_chapter_count=count)
    validate_chapters(chapters, syllabus)
    covered = [w for c in chapters for w in c.source_week_indices]
    assert covered == list(range(1, weeks + 1))
    assert len(chapters) == count
