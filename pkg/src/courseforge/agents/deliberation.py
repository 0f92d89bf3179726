"""Run multi-agent deliberations and extract their structured artifacts.

One round means each cast member speaks once in listed order, seeing
everything said so far. The first user message carries the brief and the
serialized context documents as labeled fenced blocks (newest last);
rerun suggestions are appended after them, so an original context is
always a strict byte prefix of its rerun.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Optional

from courseforge.agents.gateway import ChatGateway, ChatMessage, SamplingParams
from courseforge.agents.prompts import (
    CASTS,
    AgentRole,
    DeliberationKind,
    system_prompt,
)
from courseforge.errors import CourseforgeError
from courseforge.schemas import validate_document


class CastMismatch(CourseforgeError):
    """Participants differ from the deliberation's defined cast."""


class ExtractionFailed(CourseforgeError):
    """No schema-valid block was found, even after the repair turn."""


class SchemaViolation(CourseforgeError):
    pass


@dataclass
class DeliberationTranscript:
    """Ordered messages of one deliberation plus extraction bookkeeping."""

    subtask_id: str
    kind: DeliberationKind
    messages: list[ChatMessage] = field(default_factory=list)
    rounds_executed: int = 0
    repair_turns: int = 0
    extracted: dict[str, Any] = field(default_factory=dict)
    extraction_errors: list[str] = field(default_factory=list)
    usage_call_ids: list[str] = field(default_factory=list)

    @property
    def assistant_messages(self) -> list[ChatMessage]:
        return [m for m in self.messages if m.role_label == "assistant"]

    @property
    def extracted_artifact(self) -> Optional[Any]:
        if len(self.extracted) == 1:
            return next(iter(self.extracted.values()))
        return None

    def to_dict(self) -> dict:
        return {
            "subtask_id": self.subtask_id,
            "kind": self.kind.value,
            "messages": [m.to_dict() for m in self.messages],
            "rounds_executed": self.rounds_executed,
            "repair_turns": self.repair_turns,
            "extracted": self.extracted,
            "extraction_errors": self.extraction_errors,
            "usage_call_ids": self.usage_call_ids,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DeliberationTranscript":
        return cls(
            subtask_id=data["subtask_id"],
            kind=DeliberationKind(data["kind"]),
            messages=[ChatMessage.from_dict(m) for m in data["messages"]],
            rounds_executed=data["rounds_executed"],
            repair_turns=data.get("repair_turns", 0),
            extracted=data.get("extracted", {}),
            extraction_errors=data.get("extraction_errors", []),
            usage_call_ids=data.get("usage_call_ids", []),
        )


def render_context_block(label: str, document: Any) -> str:
    """Serialize one context document as a labeled fenced block."""
    body = json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False)
    return f"### Context: {label}\n```json\n{body}\n```"


def render_suggestion_block(index: int, suggestion: str) -> str:
    return f"### Suggestion {index}\n{suggestion}"


def compose_first_message(brief: str, blocks: list[str]) -> str:
    parts = [brief.rstrip()]
    parts.extend(blocks)
    return "\n\n".join(parts)


def build_wire_messages(
    transcript: DeliberationTranscript, speaker: AgentRole
) -> list[ChatMessage]:
    """Project the shared transcript into one agent's point of view.

    The agent's own prior turns stay assistant-role; everyone else's are
    replayed as user messages tagged with the speaker's name.
    """
    wire = [ChatMessage(role_label="system", content=system_prompt(transcript.kind, speaker))]
    for message in transcript.messages:
        if message.role_label == "user":
            wire.append(ChatMessage(role_label="user", content=message.content))
        elif message.speaker is speaker:
            wire.append(ChatMessage(role_label="assistant", content=message.content))
        else:
            name = message.speaker.display_name if message.speaker else "Participant"
            wire.append(
                ChatMessage(role_label="user", content=f"[{name}] {message.content}")
            )
    return wire


def run_deliberation(
    gateway: ChatGateway,
    kind: DeliberationKind,
    participants: tuple[AgentRole, ...],
    brief: str,
    context_blocks: list[str],
    rounds: int = 1,
    params: SamplingParams = SamplingParams(),
    subtask_label: str = "",
) -> DeliberationTranscript:
    """Execute `rounds` full rotations of the cast and record every turn."""
    expected = CASTS[kind]
    if tuple(participants) != expected:
        raise CastMismatch(
            f"{kind.value} expects cast {[r.value for r in expected]}, "
            f"got {[r.value for r in participants]}"
        )
    if rounds < 1:
        raise CourseforgeError("rounds must be >= 1")

    transcript = DeliberationTranscript(
        subtask_id=subtask_label or kind.value, kind=kind
    )
    transcript.messages.append(
        ChatMessage(role_label="user", content=compose_first_message(brief, context_blocks))
    )
    for _ in range(rounds):
        for speaker in participants:
            wire = build_wire_messages(transcript, speaker)
            reply = gateway.complete(
                wire, params, subtask=transcript.subtask_id
            )
            transcript.messages.append(
                ChatMessage(role_label="assistant", content=reply.content, speaker=speaker)
            )
            transcript.usage_call_ids.append(reply.usage.call_id)
        transcript.rounds_executed += 1
    return transcript


_FENCED = re.compile(r"```(?:json)?[ \t]*\n(.*?)\n[ \t]*```", re.DOTALL)


def candidate_blocks(text: str) -> list[str]:
    """Fenced blocks first (last wins), then a bare top-level JSON object."""
    blocks = [m.group(1).strip() for m in _FENCED.finditer(text)]
    blocks.reverse()
    if not blocks:
        start, end = text.find("{"), text.rfind("}")
        if 0 <= start < end:
            blocks.append(text[start : end + 1])
    return blocks


def scan_for_document(
    transcript: DeliberationTranscript, schema_id: str
) -> tuple[Optional[Any], list[str]]:
    """Scan assistant messages last-to-first for a block matching the schema."""
    errors: list[str] = []
    for message in reversed(transcript.assistant_messages):
        for block in candidate_blocks(message.content):
            try:
                document = json.loads(block)
            except json.JSONDecodeError as exc:
                errors.append(f"unparseable block: {exc}")
                continue
            failures = validate_document(schema_id, document)
            if not failures:
                return document, []
            errors.extend(failures)
    return None, errors


def extract_structured(
    transcript: DeliberationTranscript,
    schema_id: str,
    gateway: Optional[ChatGateway] = None,
    params: SamplingParams = SamplingParams(),
) -> Any:
    """Extract and validate the artifact for `schema_id`.

    On failure, when a gateway is supplied, one repair turn is issued to
    the agent that should have produced the block; a second failure is
    final. Validation details are retained on the transcript either way.
    """
    if not transcript.assistant_messages:
        raise ExtractionFailed("transcript has no assistant messages")

    document, errors = scan_for_document(transcript, schema_id)
    if document is not None:
        transcript.extracted[schema_id] = document
        return document
    transcript.extraction_errors.extend(f"{schema_id}: {e}" for e in errors)

    if gateway is not None:
        speaker = transcript.assistant_messages[-1].speaker or CASTS[transcript.kind][-1]
        detail = "; ".join(errors[:5]) or "no structured block found"
        repair_request = (
            f"your output failed validation: {detail}; re-emit the full corrected "
            f"`{schema_id}` document as a fenced json block"
        )
        transcript.messages.append(ChatMessage(role_label="user", content=repair_request))
        wire = build_wire_messages(transcript, speaker)
        reply = gateway.complete(wire, params, subtask=transcript.subtask_id)
        transcript.messages.append(
            ChatMessage(role_label="assistant", content=reply.content, speaker=speaker)
        )
        transcript.usage_call_ids.append(reply.usage.call_id)
        transcript.repair_turns += 1

        document, errors = scan_for_document(transcript, schema_id)
        if document is not None:
            transcript.extracted[schema_id] = document
            return document
        transcript.extraction_errors.extend(f"{schema_id} (after repair): {e}" for e in errors)

    raise ExtractionFailed(
        f"no valid `{schema_id}` block in transcript {transcript.subtask_id}"
    )
