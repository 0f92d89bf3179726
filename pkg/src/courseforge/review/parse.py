"""Tolerant parsing of reviewer markdown into score sheets and reports.

Reviewers are language models; their markdown drifts. The parser accepts
heading variants, bold markers, bullet and table layouts, and "n/5"
suffixes. A rating outside 1-5 or not an integer is refused (the cell is
marked missing with the raw text retained), never coerced.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from courseforge.errors import CourseforgeError
from courseforge.review.rubric import RUBRIC, OutputKind
from courseforge.review.sheets import Reviewer, ScoreSheet


class NoRatingsFound(CourseforgeError):
    """The text contains no recognizable rating at all."""


_KIND_ALIASES: dict[OutputKind, tuple[str, ...]] = {
    kind: (kind.value, kind.display_name) for kind in OutputKind
}
_KIND_ALIASES[OutputKind.IP] += ("Overall Instructional Package", "Overall Package")
_KIND_ALIASES[OutputKind.SL] += ("Slides",)


def _section_kind(line: str) -> Optional[OutputKind]:
    """Detect a kind section header: a short line naming one output kind."""
    stripped = line.strip().strip("#*:").strip()
    if not stripped or len(stripped.split()) > 6:
        return None
    lowered = stripped.lower()
    for kind, aliases in _KIND_ALIASES.items():
        for alias in aliases:
            al = alias.lower()
            if lowered == al or lowered.startswith(al + " (") or lowered.endswith(f"({kind.value.lower()})"):
                return kind
    return None


def _metric_line_pattern(metric: str) -> re.Pattern:
    return re.compile(
        r"^[\s\-\*\d\.\)\|]*\**" + re.escape(metric) + r"\**\s*(?:\(.*?\))?"
        r"\s*(?:rating|score)?\s*[:\-–—=\|]\s*(.+?)\s*\|?\s*$",
        re.IGNORECASE,
    )


_VALUE_TOKEN = re.compile(r"^\**\s*(\d+(?:\.\d+)?)\s*(?:/\s*5)?\**\s*(?:–|—|-|,|;|\.|$)")


def _extract_value(text: str) -> Optional[str]:
    match = _VALUE_TOKEN.match(text.strip())
    return match.group(1) if match else None


def parse_review(markdown: str, reviewer: Optional[Reviewer] = None) -> ScoreSheet:
    """Extract per-metric 1-5 ratings from reviewer markdown.

    Metric lines are attributed to the output kind of the enclosing section
    header; without sections, a metric name unique to one kind still lands.
    Raises NoRatingsFound when nothing in the text looks like a rating.
    """
    if not markdown.strip():
        raise NoRatingsFound("empty review text")
    sheet = ScoreSheet(reviewer=reviewer or Reviewer(kind="automated", ident="unknown"))

    metric_owners: dict[str, list[OutputKind]] = {}
    for kind in OutputKind:
        for metric in RUBRIC[kind]:
            metric_owners.setdefault(metric.metric_name.lower(), []).append(kind)

    current_kind: Optional[OutputKind] = None
    matched_any = False
    comments: list[str] = []

    for line in markdown.splitlines():
        kind_header = _section_kind(line)
        if kind_header is not None:
            current_kind = kind_header
            continue
        hit = False
        for metric_lower, owners in metric_owners.items():
            if current_kind is not None and current_kind in owners:
                target: Optional[OutputKind] = current_kind
            elif current_kind is None and len(owners) == 1:
                target = owners[0]
            else:
                continue
            metric_name = next(
                m.metric_name for m in RUBRIC[target] if m.metric_name.lower() == metric_lower
            )
            match = _metric_line_pattern(metric_name).match(line)
            if not match:
                continue
            matched_any = True
            hit = True
            token = _extract_value(match.group(1))
            if token is not None and token.isdigit() and 1 <= int(token) <= 5:
                sheet.set_score(target, metric_name, int(token))
            else:
                sheet.mark_missing(target, metric_name, line.strip())
            break
        if not hit and line.strip():
            comments.append(line.strip())

    if not matched_any:
        raise NoRatingsFound("no metric ratings recognized in review text")
    sheet.free_comments = "\n".join(comments)
    return sheet


@dataclass(frozen=True)
class ReviewReport:
    """One validation reviewer's form: overall rating plus feedback sections."""

    persona: str
    rating: Optional[int]
    overall_assessment: str = ""
    strengths: str = ""
    improvements: str = ""
    recommendations: str = ""
    raw: str = ""

    def to_dict(self) -> dict:
        return {
            "persona": self.persona,
            "rating": self.rating,
            "overall_assessment": self.overall_assessment,
            "strengths": self.strengths,
            "improvements": self.improvements,
            "recommendations": self.recommendations,
        }


_RATING_LINE = re.compile(
    r"(?:overall\s+)?rating\s*[:\-–=]?\s*\**\s*(\d+(?:\.\d+)?)\s*(?:/\s*5)?",
    re.IGNORECASE,
)

_REPORT_SECTIONS = {
    "overall_assessment": ("overall assessment",),
    "strengths": ("strengths",),
    "improvements": ("areas for improvement", "improvements", "weaknesses"),
    "recommendations": ("specific recommendations", "recommendations"),
}


def parse_review_report(markdown: str, persona: str) -> ReviewReport:
    """Parse the evaluation form used by validation reviewers."""
    if not markdown.strip():
        raise NoRatingsFound("empty review text")
    rating: Optional[int] = None
    for match in _RATING_LINE.finditer(markdown):
        token = match.group(1)
        if token.isdigit() and 1 <= int(token) <= 5:
            rating = int(token)
            break
    if rating is None:
        raise NoRatingsFound("no overall 1-5 rating found in review")

    sections = {name: "" for name in _REPORT_SECTIONS}
    current: Optional[str] = None
    for line in markdown.splitlines():
        header = line.strip().strip("#*:").strip().lower()
        matched_section = None
        for name, aliases in _REPORT_SECTIONS.items():
            if header in aliases:
                matched_section = name
                break
        if matched_section:
            current = matched_section
            continue
        if current and line.strip() and not _RATING_LINE.search(line):
            sections[current] = (sections[current] + "\n" + line.strip()).strip()

    return ReviewReport(persona=persona, rating=rating, raw=markdown, **sections)
