"""Aggregation over score sheets and the descriptive spread comparison.

Means are computed exactly with fractions so that two-decimal reporting
(rounded half up) matches hand arithmetic; floats appear only at the
formatting boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from courseforge.errors import InvalidDocument
from courseforge.review.rubric import RUBRIC, OutputKind
from courseforge.review.sheets import ScoreSheet

Number = Union[int, float, str, Decimal, Fraction]


def _fraction(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Decimal)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(Decimal(value))
    return Fraction(Decimal(str(value)))


def format_score(value: Optional[Number], places: int = 2) -> str:
    """Render a mean with fixed decimals, rounding half up (3.485 -> 3.49)."""
    if value is None:
        return "-"
    frac = _fraction(value)
    quantum = Decimal(1).scaleb(-places)
    exact = Decimal(frac.numerator) / Decimal(frac.denominator)
    return str(exact.quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class AggregateResult:
    metric_means: dict[tuple[OutputKind, str], Optional[Fraction]]
    kind_means: dict[OutputKind, Optional[Fraction]]
    kind_stddevs: dict[OutputKind, Optional[float]]
    overall: Optional[Fraction]
    all_missing_kinds: tuple[OutputKind, ...]


def aggregate(sheets: Sequence[ScoreSheet]) -> AggregateResult:
    """Pool sheets: metric mean over non-missing cells, kind mean over its
    metric means, overall mean over kind means. Kinds with every cell
    missing are reported, not silently dropped."""
    if not sheets:
        raise InvalidDocument("aggregate needs at least one score sheet")

    metric_means: dict[tuple[OutputKind, str], Optional[Fraction]] = {}
    kind_means: dict[OutputKind, Optional[Fraction]] = {}
    kind_stddevs: dict[OutputKind, Optional[float]] = {}
    all_missing: list[OutputKind] = []

    for kind in OutputKind:
        means_for_kind: list[Fraction] = []
        pooled_values: list[int] = []
        for metric in RUBRIC[kind]:
            values = [
                cell.score.value
                for sheet in sheets
                for cell in [sheet.cells[(kind, metric.metric_name)]]
                if cell.score is not None
            ]
            if values:
                mean = Fraction(sum(values), len(values))
                metric_means[(kind, metric.metric_name)] = mean
                means_for_kind.append(mean)
                pooled_values.extend(values)
            else:
                metric_means[(kind, metric.metric_name)] = None
        if means_for_kind:
            kind_means[kind] = sum(means_for_kind, Fraction(0)) / len(means_for_kind)
            kind_stddevs[kind] = _population_stddev(pooled_values)
        else:
            kind_means[kind] = None
            kind_stddevs[kind] = None
            all_missing.append(kind)

    present = [m for m in kind_means.values() if m is not None]
    overall = sum(present, Fraction(0)) / len(present) if present else None
    return AggregateResult(
        metric_means=metric_means,
        kind_means=kind_means,
        kind_stddevs=kind_stddevs,
        overall=overall,
        all_missing_kinds=tuple(all_missing),
    )


def overall_from_kind_means(means: Iterable[Number]) -> Fraction:
    """Exact mean of pre-aggregated per-kind means (for imported summaries)."""
    values = [_fraction(m) for m in means]
    if not values:
        raise InvalidDocument("need at least one kind mean")
    return sum(values, Fraction(0)) / len(values)


def _population_stddev(values: Sequence[float]) -> float:
    if not values:
        return 0.0
    mean = sum(values) / len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


@dataclass(frozen=True)
class DistributionSummary:
    mean: float
    stddev: float
    min: float
    max: float


def compare_distributions(
    automated: Sequence[float], human: Sequence[float]
) -> dict:
    """Descriptive spread comparison between two score populations.

    `spread_ratio` is stddev(automated) / stddev(human); infinity when the
    second population is constant but the first is not.
    """
    if not automated or not human:
        raise InvalidDocument("both score lists must be non-empty")

    def summarize(values: Sequence[float]) -> DistributionSummary:
        return DistributionSummary(
            mean=sum(values) / len(values),
            stddev=_population_stddev(values),
            min=min(values),
            max=max(values),
        )

    auto_summary = summarize(automated)
    human_summary = summarize(human)
    if human_summary.stddev == 0:
        ratio = 0.0 if auto_summary.stddev == 0 else math.inf
    else:
        ratio = auto_summary.stddev / human_summary.stddev
    return {
        "automated": auto_summary,
        "human": human_summary,
        "spread_ratio": ratio,
    }


def render_kind_table(results: dict[str, AggregateResult]) -> str:
    """Markdown table: one row per output kind, one column per result label."""
    labels = list(results)
    lines = ["| Kind | " + " | ".join(labels) + " |",
             "|------|" + "|".join(["------"] * len(labels)) + "|"]
    for kind in OutputKind:
        cells = [format_score(results[label].kind_means[kind]) for label in labels]
        lines.append(f"| {kind.value} | " + " | ".join(cells) + " |")
    lines.append(
        "| Avg | " + " | ".join(format_score(results[label].overall) for label in labels) + " |"
    )
    return "\n".join(lines) + "\n"
