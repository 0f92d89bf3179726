"""The adapted quality rubric: metrics per output kind and Likert anchors.

The metric catalog is a closed, byte-stable set of 19 (kind, metric) pairs.
Ratings are integers on a 1-5 scale anchored to revision effort.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from courseforge.errors import InvalidDocument


class OutputKind(str, Enum):
    """The six evaluated output kinds of an instructional package."""

    LO = "LO"
    SY = "SY"
    AS = "AS"
    SL = "SL"
    SC = "SC"
    IP = "IP"

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]


_DISPLAY_NAMES = {
    OutputKind.LO: "Learning Objectives",
    OutputKind.SY: "Syllabus",
    OutputKind.AS: "Assessments",
    OutputKind.SL: "Final Slides",
    OutputKind.SC: "Slide Scripts",
    OutputKind.IP: "Instructional Package",
}


@dataclass(frozen=True)
class RubricMetric:
    kind: OutputKind
    metric_name: str
    description: str
    qm_mapping: str


def _m(kind: OutputKind, name: str, description: str, qm: str) -> RubricMetric:
    return RubricMetric(kind=kind, metric_name=name, description=description, qm_mapping=qm)


RUBRIC: dict[OutputKind, tuple[RubricMetric, ...]] = {
    OutputKind.LO: (
        _m(OutputKind.LO, "Clarity",
           "Objectives are stated clearly and use learner-friendly language.", "2.3, 2.4"),
        _m(OutputKind.LO, "Measurability",
           "Objectives include measurable verbs that allow for assessment.", "2.1, 2.2"),
        _m(OutputKind.LO, "Appropriateness",
           "Objectives match the course level and are realistic for learners.", "2.2, 2.5"),
    ),
    OutputKind.SY: (
        _m(OutputKind.SY, "Structure",
           "The syllabus clearly presents the course purpose and structure.", "1.2, 1.1, 1.3"),
        _m(OutputKind.SY, "Coverage",
           "The syllabus includes a complete and specific list of objectives.", "2.2"),
        _m(OutputKind.SY, "Accessibility",
           "Technology, skills, and background requirements are clearly listed.", "1.5, 1.6, 1.7"),
        _m(OutputKind.SY, "Transparency of Policies",
           "Academic policies are presented clearly and accessibly.", "1.4"),
    ),
    OutputKind.SL: (
        _m(OutputKind.SL, "Alignment",
           "Slides support the achievement of learning objectives.", "4.1"),
        _m(OutputKind.SL, "Appropriateness",
           "Content matches learner needs and course level.", "Extended from 4.2, 4.3"),
        _m(OutputKind.SL, "Accuracy",
           "Content is factually correct and up to date.", "4.4"),
    ),
    OutputKind.SC: (
        _m(OutputKind.SC, "Alignment",
           "Script content matches and expands on the slides.", "4.1"),
        _m(OutputKind.SC, "Coherence",
           "Scripts follow a logical flow and are easy to follow.", "Extended from 4.2"),
        _m(OutputKind.SC, "Engagement",
           "Scripts include examples or prompts to engage learners.", "Extended from 4.2"),
    ),
    OutputKind.AS: (
        _m(OutputKind.AS, "Alignment",
           "Assessments directly reflect the stated learning objectives.", "3.1"),
        _m(OutputKind.AS, "Clarity",
           "Instructions, grading criteria, and expectations are clearly explained.", "3.2, 3.3, 3.6"),
        _m(OutputKind.AS, "Variety",
           "Assessments use different formats to support diverse learners.", "3.4"),
    ),
    OutputKind.IP: (
        _m(OutputKind.IP, "Coherence",
           "Materials work together as a unified, logically connected set.", "General across 1-6"),
        _m(OutputKind.IP, "Alignment",
           "All materials align with the course learning objectives.", "1.1, 2.1, 3.1, 4.1"),
        _m(OutputKind.IP, "Usability",
           "Materials are easy to access, navigate, and use.", "6.1, 6.2, 6.3, 8.1, 8.2"),
    ),
}

LIKERT_ANCHORS: dict[int, str] = {
    5: "Minimal edits required; ready to use.",
    4: "Minor revisions needed; content is mostly solid.",
    3: "Moderate revisions needed in structure or clarity.",
    2: "Major restructuring or rewriting required.",
    1: "Complete redevelopment needed; not usable as-is.",
}


@dataclass(frozen=True)
class Score:
    """One 1-5 rating with its fixed anchor text."""

    value: int
    anchor_text: str = ""

    def __post_init__(self) -> None:
        if not 1 <= self.value <= 5:
            raise InvalidDocument(f"score must be in [1, 5], got {self.value}")
        if not self.anchor_text:
            object.__setattr__(self, "anchor_text", LIKERT_ANCHORS[self.value])


def metric_names(kind: OutputKind) -> list[str]:
    return [m.metric_name for m in RUBRIC[kind]]


def all_metric_pairs() -> list[tuple[OutputKind, str]]:
    return [(kind, m.metric_name) for kind in OutputKind for m in RUBRIC[kind]]
