from __future__ import annotations

import pytest

from courseforge.errors import InvalidDocument
from courseforge.review.rubric import (
    LIKERT_ANCHORS,
    RUBRIC,
    OutputKind,
    Score,
    all_metric_pairs,
    metric_names,
)

EXPECTED_METRICS = {
    OutputKind.LO: ["Clarity", "Measurability", "Appropriateness"],
    OutputKind.SY: ["Structure", "Coverage", "Accessibility", "Transparency of Policies"],
    OutputKind.SL: ["Alignment", "Appropriateness", "Accuracy"],
    OutputKind.SC: ["Alignment", "Coherence", "Engagement"],
    OutputKind.AS: ["Alignment", "Clarity", "Variety"],
    OutputKind.IP: ["Coherence", "Alignment", "Usability"],
}


def test_metric_catalog_matches_fixed_table():
    for kind, expected in EXPECTED_METRICS.items():
        assert metric_names(kind) == expected


def test_exactly_nineteen_kind_metric_pairs():
    pairs = all_metric_pairs()
    assert len(pairs) == 19
    assert len(set(pairs)) == 19


def test_catalog_is_byte_stable():
    snapshot = [
        (m.kind.value, m.metric_name, m.description, m.qm_mapping)
        for kind in OutputKind
        for m in RUBRIC[kind]
    ]
    again = [
        (m.kind.value, m.metric_name, m.description, m.qm_mapping)
        for kind in OutputKind
        for m in RUBRIC[kind]
    ]
    assert snapshot == again
    assert RUBRIC[OutputKind.LO][0].qm_mapping == "2.3, 2.4"


def test_likert_anchors_fixed():
    assert LIKERT_ANCHORS[5] == "Minimal edits required; ready to use."
    assert LIKERT_ANCHORS[4] == "Minor revisions needed; content is mostly solid."
    assert LIKERT_ANCHORS[3] == "Moderate revisions needed in structure or clarity."
    assert LIKERT_ANCHORS[2] == "Major restructuring or rewriting required."
    assert LIKERT_ANCHORS[1] == "Complete redevelopment needed; not usable as-is."


def test_score_range_and_anchor():
    assert Score(5).anchor_text == LIKERT_ANCHORS[5]
    assert Score(3, anchor_text="custom").anchor_text == "custom"
    for bad in (0, 6):
        with pytest.raises(InvalidDocument):
            Score(bad)
