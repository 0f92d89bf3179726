"""Rubric-based scoring: metric catalog, review parsing, aggregation, stats."""

from courseforge.review.rubric import (
    LIKERT_ANCHORS,
    RUBRIC,
    OutputKind,
    RubricMetric,
    Score,
)

__all__ = ["LIKERT_ANCHORS", "RUBRIC", "OutputKind", "RubricMetric", "Score"]
