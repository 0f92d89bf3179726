"""Per-kind generation success accounting.

Final slides are the only compile-bearing kind; the other material kinds
count as successful when their artifact passes schema validation. Rates
are reported to two decimals with an average over the five material kinds.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

from courseforge.errors import InvalidDocument
from courseforge.review.rubric import OutputKind

# column order for the success table; IP is a bundle, not a generated kind
REPORT_KINDS: tuple[OutputKind, ...] = (
    OutputKind.LO,
    OutputKind.SY,
    OutputKind.SL,
    OutputKind.SC,
    OutputKind.AS,
)


def _percent(successes: int, total: int) -> Decimal:
    if total <= 0:
        raise InvalidDocument("success counts need a positive total")
    if not 0 <= successes <= total:
        raise InvalidDocument(f"successes {successes} outside [0, {total}]")
    return (Decimal(successes) * 100 / Decimal(total)).quantize(
        Decimal("0.01"), rounding=ROUND_HALF_UP
    )


@dataclass(frozen=True)
class SuccessRow:
    label: str
    rates: dict[OutputKind, Decimal]
    average: Decimal

    def formatted(self, kind: OutputKind) -> str:
        return f"{self.rates[kind]}%"

    @property
    def formatted_average(self) -> str:
        return f"{self.average}%"


def success_report(
    counts: Mapping[OutputKind, tuple[int, int]], label: str = ""
) -> SuccessRow:
    """Fold (successes, total) counts per kind into one table row."""
    if not counts:
        raise InvalidDocument("need counts for at least one kind")
    rates: dict[OutputKind, Decimal] = {}
    for kind in REPORT_KINDS:
        if kind not in counts:
            raise InvalidDocument(f"missing counts for kind {kind.value}")
        successes, total = counts[kind]
        rates[kind] = _percent(successes, total)
    average = (sum(rates.values()) / len(rates)).quantize(
        Decimal("0.01"), rounding=ROUND_HALF_UP
    )
    return SuccessRow(label=label, rates=rates, average=average)


def render_success_table(rows: Sequence[SuccessRow]) -> str:
    header = "| Model | " + " | ".join(k.value for k in REPORT_KINDS) + " | Avg |"
    divider = "|" + "---|" * (len(REPORT_KINDS) + 2)
    lines = [header, divider]
    for row in rows:
        cells = [row.formatted(kind) for kind in REPORT_KINDS]
        lines.append(f"| {row.label} | " + " | ".join(cells) + f" | {row.formatted_average} |")
    return "\n".join(lines) + "\n"
