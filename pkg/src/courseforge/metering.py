"""Token, wall-time, human-time, and cost accounting for one run.

Usage records append to a line-delimited JSON log inside the run
directory; appends are locked and flushed so records survive a crash of
the step that produced them. Prices are configuration, never constants:
a cost figure is only meaningful against the supplied rate table.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Optional

import yaml

from courseforge.errors import CourseforgeError, InvalidDocument


class RunClosed(CourseforgeError):
    """The run's usage log was closed; no further records are accepted."""


@dataclass(frozen=True)
class UsageRecord:
    """One gateway call's accounting, token counts verbatim from the backend."""

    call_id: str
    subtask: str
    prompt_tokens: int
    completion_tokens: int
    wall_time_seconds: float
    model_name: str

    def __post_init__(self) -> None:
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise InvalidDocument("token counts must be non-negative")

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    def to_dict(self) -> dict:
        return {
            "call_id": self.call_id,
            "subtask": self.subtask,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "wall_time_seconds": self.wall_time_seconds,
            "model_name": self.model_name,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "UsageRecord":
        return cls(
            call_id=data["call_id"],
            subtask=data["subtask"],
            prompt_tokens=int(data["prompt_tokens"]),
            completion_tokens=int(data["completion_tokens"]),
            wall_time_seconds=float(data["wall_time_seconds"]),
            model_name=data["model_name"],
        )

    @classmethod
    def fresh(cls, subtask: str, prompt_tokens: int, completion_tokens: int,
              wall_time_seconds: float, model_name: str) -> "UsageRecord":
        return cls(
            call_id=uuid.uuid4().hex,
            subtask=subtask,
            prompt_tokens=prompt_tokens,
            completion_tokens=completion_tokens,
            wall_time_seconds=wall_time_seconds,
            model_name=model_name,
        )


@dataclass(frozen=True)
class HumanTimeEntry:
    """One human interaction interval (a pause wait, usually).

    `interrupted` marks intervals spanning an abandonment, whose wall time
    overstates actual attention; they count toward the maximum only.
    """

    event_id: str
    started_at: str
    ended_at: str
    interrupted: bool = False

    def seconds(self) -> float:
        start = datetime.fromisoformat(self.started_at)
        end = datetime.fromisoformat(self.ended_at)
        delta = (end - start).total_seconds()
        if delta < 0:
            raise InvalidDocument("ended_at must not precede started_at")
        return delta


@dataclass(frozen=True)
class CostTable:
    """USD per 1M tokens, per model; user-supplied configuration."""

    rates: dict[str, tuple[Decimal, Decimal]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for model, (prompt_rate, completion_rate) in self.rates.items():
            if prompt_rate < 0 or completion_rate < 0:
                raise InvalidDocument(f"negative rate for model {model!r}")

    def rate_for(self, model_name: str) -> tuple[Decimal, Decimal]:
        if model_name in self.rates:
            return self.rates[model_name]
        if "default" in self.rates:
            return self.rates["default"]
        return (Decimal(0), Decimal(0))

    def cost_of(self, record: UsageRecord) -> Decimal:
        prompt_rate, completion_rate = self.rate_for(record.model_name)
        return (
            record.prompt_tokens * prompt_rate
            + record.completion_tokens * completion_rate
        ) / Decimal(1_000_000)

    def scaled(self, factor: Decimal) -> "CostTable":
        return CostTable(
            rates={
                model: (p * factor, c * factor) for model, (p, c) in self.rates.items()
            }
        )

    @classmethod
    def zero(cls) -> "CostTable":
        return cls(rates={})

    @classmethod
    def from_file(cls, path: Path) -> "CostTable":
        text = path.read_text(encoding="utf-8")
        raw = yaml.safe_load(text) if path.suffix.lower() in (".yaml", ".yml") else json.loads(text)
        rates = {}
        for model, entry in (raw or {}).items():
            rates[model] = (
                Decimal(str(entry["prompt_rate"])),
                Decimal(str(entry["completion_rate"])),
            )
        return cls(rates=rates)


class UsageLog:
    """Append-only usage recorder; safe under concurrent writers."""

    FILENAME = "usage.ndjson"

    def __init__(self, run_dir: Path):
        self.path = Path(run_dir) / self.FILENAME
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._closed = self._read_closed()

    def _read_closed(self) -> bool:
        if not self.path.exists():
            return False
        closed = False
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            event = json.loads(line).get("event")
            if event == "closed":
                closed = True
            elif event == "reopened":
                closed = False
        return closed

    def _append(self, payload: dict) -> None:
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(payload, sort_keys=True) + "\n")
            handle.flush()

    def record(self, usage: UsageRecord) -> None:
        with self._lock:
            if self._closed:
                raise RunClosed("usage log is closed for this run")
            self._append(usage.to_dict())

    def close(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._append({"event": "closed"})
            self._closed = True

    def reopen(self) -> None:
        """Accept records again (used by post-completion feedback reruns)."""
        with self._lock:
            if not self._closed:
                return
            self._append({"event": "reopened"})
            self._closed = False

    def records(self) -> list[UsageRecord]:
        if not self.path.exists():
            return []
        out = []
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            data = json.loads(line)
            if "event" in data:
                continue
            out.append(UsageRecord.from_dict(data))
        return out


@dataclass(frozen=True)
class RunReport:
    """Run-level accounting shaped like the four headline metrics."""

    run_id: str
    token_total: int
    prompt_tokens: int
    completion_tokens: int
    inference_seconds: float
    pipeline_seconds: Optional[float]
    human_seconds_min: float
    human_seconds_max: float
    cost_usd: Decimal
    per_subtask: dict[str, dict]
    human_time_estimated: bool = False

    @property
    def token_total_millions(self) -> float:
        return self.token_total / 1_000_000

    @property
    def inference_hours(self) -> float:
        return self.inference_seconds / 3600

    def human_minutes_range(self) -> tuple[float, float]:
        return (self.human_seconds_min / 60, self.human_seconds_max / 60)

    def to_dict(self) -> dict:
        low, high = self.human_minutes_range()
        return {
            "run_id": self.run_id,
            "token_total": self.token_total,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "token_total_millions": self.token_total_millions,
            "inference_seconds": self.inference_seconds,
            "inference_hours": self.inference_hours,
            "pipeline_seconds": self.pipeline_seconds,
            "human_minutes_min": low,
            "human_minutes_max": high,
            "human_time_estimated": self.human_time_estimated,
            "cost_usd": str(self.cost_usd),
            "per_subtask": self.per_subtask,
        }


def build_report(
    run_id: str,
    records: Iterable[UsageRecord],
    costs: CostTable,
    human_entries: Iterable[HumanTimeEntry] = (),
    pipeline_seconds: Optional[float] = None,
) -> RunReport:
    """Fold usage records into totals; sums are exact integer arithmetic."""
    prompt = completion = 0
    inference = 0.0
    cost = Decimal(0)
    per_subtask: dict[str, dict] = {}
    for record in records:
        prompt += record.prompt_tokens
        completion += record.completion_tokens
        inference += record.wall_time_seconds
        cost += costs.cost_of(record)
        bucket = per_subtask.setdefault(
            record.subtask,
            {"calls": 0, "prompt_tokens": 0, "completion_tokens": 0, "wall_time_seconds": 0.0},
        )
        bucket["calls"] += 1
        bucket["prompt_tokens"] += record.prompt_tokens
        bucket["completion_tokens"] += record.completion_tokens
        bucket["wall_time_seconds"] += record.wall_time_seconds

    human_min = human_max = 0.0
    for entry in human_entries:
        seconds = entry.seconds()
        human_max += seconds
        if not entry.interrupted:
            human_min += seconds

    return RunReport(
        run_id=run_id,
        token_total=prompt + completion,
        prompt_tokens=prompt,
        completion_tokens=completion,
        inference_seconds=inference,
        pipeline_seconds=pipeline_seconds,
        human_seconds_min=human_min,
        human_seconds_max=human_max,
        cost_usd=cost,
        per_subtask=per_subtask,
    )


def format_human_minutes(report: RunReport) -> str:
    low, high = report.human_minutes_range()
    if abs(high - low) < 1e-9:
        return f"{low:.0f}"
    return f"{low:.0f}-{high:.0f}"


def render_markdown(report: RunReport) -> str:
    """Markdown table mirroring the headline runtime/cost metrics."""
    suffix = " (measured)" if not report.human_time_estimated else " (estimated)"
    rows = [
        ("Token Usage (millions)", f"{report.token_total_millions:.2f}"),
        ("Inference Time (hrs)", f"{report.inference_hours:.2f}"),
        ("Human Time (mins)" + suffix, format_human_minutes(report)),
        ("Compute Cost (USD)", f"{report.cost_usd:.2f}"),
    ]
    lines = ["| Metric | Value |", "|--------|-------|"]
    lines += [f"| {name} | {value} |" for name, value in rows]
    if report.pipeline_seconds is not None:
        lines.append(f"| Pipeline Elapsed (hrs) | {report.pipeline_seconds / 3600:.2f} |")
    return "\n".join(lines) + "\n"


def render_csv(report: RunReport) -> str:
    lines = ["metric,value"]
    lines.append(f"token_total_millions,{report.token_total_millions:.6f}")
    lines.append(f"inference_hours,{report.inference_hours:.6f}")
    lines.append(f"human_minutes,{format_human_minutes(report)}")
    lines.append(f"cost_usd,{report.cost_usd}")
    for subtask, bucket in sorted(report.per_subtask.items()):
        lines.append(
            f"subtask.{subtask},"
            f"{bucket['prompt_tokens'] + bucket['completion_tokens']}"
        )
    return "\n".join(lines) + "\n"
