"""Partition a syllabus's weekly entries into chapters.

Default granularity is one chapter per week. A processor agent may propose
merges (e.g. folding consecutive project weeks together); its proposal is
validated by set algebra and retried once on a coverage gap before failing.
"""

from __future__ import annotations

from typing import Callable, Optional

from courseforge.errors import CourseforgeError
from courseforge.model import Chapter, Syllabus, validate_chapters


class EmptySyllabus(CourseforgeError):
    pass


class CoverageGap(CourseforgeError):
    """Some syllabus week is mapped to no chapter."""


# A proposer returns raw chapter dicts for a syllabus; `retry` flags the
# second (post-gap) attempt so an agent-backed proposer can rephrase.
Proposer = Callable[[Syllabus, bool], list[dict]]


def identity_partition(syllabus: Syllabus) -> list[Chapter]:
    return [
        Chapter(
            chapter_index=i + 1,
            title=entry.topic,
            description=f"Week {entry.week_index}: {entry.topic}",
            source_week_indices=(entry.week_index,),
        )
        for i, entry in enumerate(syllabus.weekly_entries)
    ]


def contiguous_partition(syllabus: Syllabus, chapter_count: int) -> list[Chapter]:
    weeks = [e.week_index for e in syllabus.weekly_entries]
    if not 1 <= chapter_count <= len(weeks):
        raise CoverageGap(
            f"cannot split {len(weeks)} weeks into {chapter_count} chapters"
        )
    base, extra = divmod(len(weeks), chapter_count)
    chapters: list[Chapter] = []
    cursor = 0
    by_week = {e.week_index: e for e in syllabus.weekly_entries}
    for i in range(chapter_count):
        size = base + (1 if i < extra else 0)
        group = weeks[cursor : cursor + size]
        cursor += size
        title = by_week[group[0]].topic
        chapters.append(
            Chapter(
                chapter_index=i + 1,
                title=title,
                description="Covers weeks " + ", ".join(str(w) for w in group),
                source_week_indices=tuple(group),
            )
        )
    return chapters


def chapterize(
    syllabus: Syllabus,
    target_chapter_count: Optional[int] = None,
    proposer: Optional[Proposer] = None,
) -> list[Chapter]:
    """Return validated chapters covering every syllabus week exactly once.

    With a target count, weeks are split contiguously. With a proposer (the
    agent-backed processor), its proposal is validated; a CoverageGap earns
    one structured retry before propagating. With neither, the partition is
    one chapter per week.
    """
    if not syllabus.weekly_entries:
        raise EmptySyllabus("syllabus has no weekly entries")
    if target_chapter_count is not None:
        return validate_chapters(contiguous_partition(syllabus, target_chapter_count), syllabus)
    if proposer is None:
        return validate_chapters(identity_partition(syllabus), syllabus)

    last_gap: Optional[CoverageGap] = None
    for retry in (False, True):
        raw = proposer(syllabus, retry)
        chapters = [Chapter.from_dict(c) for c in raw]
        try:
            return validate_chapters(chapters, syllabus)
        except CoverageGap as gap:
            last_gap = gap
    raise last_gap  # type: ignore[misc]
