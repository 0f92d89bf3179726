"""Score sheets: one reviewer's ratings across the rubric, plus CSV I/O."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from courseforge.errors import InvalidDocument
from courseforge.review.rubric import RUBRIC, OutputKind, Score, all_metric_pairs


@dataclass(frozen=True)
class Reviewer:
    """Either an automated reviewer (model name) or a human (evaluator id)."""

    kind: str  # "automated" | "human"
    ident: str

    def __post_init__(self) -> None:
        if self.kind not in ("automated", "human"):
            raise InvalidDocument(f"reviewer kind must be automated or human, got {self.kind!r}")

    def label(self) -> str:
        return f"{self.kind}:{self.ident}"


@dataclass
class Cell:
    """One (kind, metric) rating; `score` is None when explicitly missing."""

    score: Optional[Score] = None
    raw: str = ""

    @property
    def missing(self) -> bool:
        return self.score is None


@dataclass
class ScoreSheet:
    """All 19 rubric cells for one reviewer; unset cells are marked missing."""

    reviewer: Reviewer
    cells: dict[tuple[OutputKind, str], Cell] = field(default_factory=dict)
    free_comments: str = ""

    def __post_init__(self) -> None:
        for pair in all_metric_pairs():
            self.cells.setdefault(pair, Cell())

    def set_score(self, kind: OutputKind, metric: str, value: int) -> None:
        if (kind, metric) not in self.cells:
            raise InvalidDocument(f"no rubric metric {metric!r} for kind {kind.value}")
        self.cells[(kind, metric)] = Cell(score=Score(value))

    def mark_missing(self, kind: OutputKind, metric: str, raw: str) -> None:
        if (kind, metric) not in self.cells:
            raise InvalidDocument(f"no rubric metric {metric!r} for kind {kind.value}")
        self.cells[(kind, metric)] = Cell(score=None, raw=raw)

    def kind_values(self, kind: OutputKind) -> list[int]:
        return [
            cell.score.value
            for (k, _), cell in self.cells.items()
            if k is kind and cell.score is not None
        ]

    def to_dict(self) -> dict:
        return {
            "reviewer": {"kind": self.reviewer.kind, "ident": self.reviewer.ident},
            "cells": [
                {
                    "kind": kind.value,
                    "metric": metric,
                    "value": cell.score.value if cell.score else None,
                    "raw": cell.raw,
                }
                for (kind, metric), cell in sorted(
                    self.cells.items(), key=lambda item: (item[0][0].value, item[0][1])
                )
            ],
            "free_comments": self.free_comments,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScoreSheet":
        sheet = cls(
            reviewer=Reviewer(kind=data["reviewer"]["kind"], ident=data["reviewer"]["ident"]),
            free_comments=data.get("free_comments", ""),
        )
        for cell in data.get("cells", []):
            kind = OutputKind(cell["kind"])
            if cell.get("value") is not None:
                sheet.set_score(kind, cell["metric"], int(cell["value"]))
            elif cell.get("raw"):
                sheet.mark_missing(kind, cell["metric"], cell["raw"])
        return sheet


CSV_FIELDS = ["evaluator_id", "kind", "metric", "value"]


def import_human_scores(path: Path) -> list[ScoreSheet]:
    """Read human ratings from CSV (evaluator_id, kind, metric, value)."""
    sheets: dict[str, ScoreSheet] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        missing = set(CSV_FIELDS) - set(reader.fieldnames or [])
        if missing:
            raise InvalidDocument(f"score CSV is missing columns: {sorted(missing)}")
        for row in reader:
            evaluator = row["evaluator_id"].strip()
            sheet = sheets.setdefault(
                evaluator, ScoreSheet(reviewer=Reviewer(kind="human", ident=evaluator))
            )
            kind = OutputKind(row["kind"].strip().upper())
            sheet.set_score(kind, row["metric"].strip(), int(row["value"]))
    if not sheets:
        raise InvalidDocument("score CSV contains no rows")
    return [sheets[key] for key in sorted(sheets)]


def export_sheets_csv(sheets: Iterable[ScoreSheet], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_FIELDS)
        for sheet in sheets:
            for (kind, metric), cell in sorted(
                sheet.cells.items(), key=lambda item: (item[0][0].value, item[0][1])
            ):
                if cell.score is not None:
                    writer.writerow([sheet.reviewer.ident, kind.value, metric, cell.score.value])
