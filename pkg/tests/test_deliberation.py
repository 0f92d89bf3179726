from __future__ import annotations

import json

import httpx
import pytest

from courseforge.agents.deliberation import (
    CastMismatch,
    DeliberationTranscript,
    ExtractionFailed,
    build_wire_messages,
    extract_structured,
    run_deliberation,
)
from courseforge.agents.gateway import ChatGateway, ChatMessage, SamplingParams
from courseforge.agents.mock import mock_transport
from courseforge.agents.prompts import CASTS, PROMPTS, AgentRole, DeliberationKind

K = DeliberationKind


def gateway_for(transport) -> ChatGateway:
    return ChatGateway(
        base_url="http://backend/v1", model_name="m",
        transport=transport, sleeper=lambda s: None,
    )


def scripted_gateway(replies: list[str]):
    bodies = []

    def handler(request: httpx.Request) -> httpx.Response:
        bodies.append(json.loads(request.content.decode()))
        content = replies.pop(0)
        return httpx.Response(
            200,
            json={
                "choices": [{"message": {"content": content}}],
                "usage": {"prompt_tokens": 5, "completion_tokens": 5},
            },
        )

    return gateway_for(httpx.MockTransport(handler)), bodies


def test_two_agent_cast_yields_two_assistant_messages():
    gateway = gateway_for(mock_transport())
    transcript = run_deliberation(
        gateway, K.OBJECTIVES_DEFINITION, CASTS[K.OBJECTIVES_DEFINITION],
        "Course: Algorithms", [], rounds=1,
    )
    assert len(transcript.assistant_messages) == 2
    assert [m.speaker for m in transcript.assistant_messages] == [
        AgentRole.TEACHING_FACULTY, AgentRole.INSTRUCTIONAL_DESIGNER,
    ]


def test_single_participant_cast_yields_one_message():
    gateway = gateway_for(mock_transport())
    transcript = run_deliberation(
        gateway, K.SYLLABUS_PROCESSING, CASTS[K.SYLLABUS_PROCESSING],
        "Course: Algorithms", [], rounds=1,
    )
    assert len(transcript.assistant_messages) == 1


def test_three_agent_cast_two_rounds_is_six_in_rotation():
    gateway = gateway_for(mock_transport())
    transcript = run_deliberation(
        gateway, K.SLIDE_PLANNING, CASTS[K.SLIDE_PLANNING],
        "Course: Algorithms", [], rounds=2,
    )
    speakers = [m.speaker for m in transcript.assistant_messages]
    expected_rotation = list(CASTS[K.SLIDE_PLANNING]) * 2
    assert speakers == expected_rotation
    assert transcript.rounds_executed == 2


def test_cast_mismatch_rejected():
    gateway = gateway_for(mock_transport())
    with pytest.raises(CastMismatch):
        run_deliberation(
            gateway, K.OBJECTIVES_DEFINITION,
            (AgentRole.PROGRAM_CHAIR, AgentRole.TEST_STUDENT),
            "Course: Algorithms", [],
        )


def test_emitted_system_prompt_byte_equals_template():
    captured = []

    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content.decode())
        captured.append(body["messages"][0])
        return httpx.Response(
            200,
            json={
                "choices": [{"message": {"content": "ok"}}],
                "usage": {"prompt_tokens": 1, "completion_tokens": 1},
            },
        )

    gateway = gateway_for(httpx.MockTransport(handler))
    for kind in (K.OBJECTIVES_DEFINITION, K.MATERIALS_SLIDES, K.VALIDATION_CHAIR):
        captured.clear()
        run_deliberation(gateway, kind, CASTS[kind], "Course: X", [], rounds=1)
        for system_message, role in zip(captured, CASTS[kind]):
            assert system_message["role"] == "system"
            assert system_message["content"] == PROMPTS[(kind, role)].text


def test_deliberation_is_deterministic_under_mock():
    results = []
    for _ in range(2):
        gateway = gateway_for(mock_transport())
        transcript = run_deliberation(
            gateway, K.SYLLABUS_DESIGN, CASTS[K.SYLLABUS_DESIGN],
            "Course: Data Mining\nTopic hint: 3-week microcourse", [], rounds=1,
        )
        results.append([m.content for m in transcript.messages])
    assert results[0] == results[1]


def test_context_blocks_serialized_into_first_user_message():
    gateway = gateway_for(mock_transport())
    block = '### Context: syllabus\n```json\n{"weeks": 3}\n```'
    transcript = run_deliberation(
        gateway, K.OBJECTIVES_DEFINITION, CASTS[K.OBJECTIVES_DEFINITION],
        "Course: X", [block], rounds=1,
    )
    first = transcript.messages[0]
    assert first.role_label == "user"
    assert first.content.startswith("Course: X")
    assert first.content.endswith(block)


def test_turn_count_law_with_repair():
    outline = {
        "chapter_index": 1,
        "slides": [{"slide_index": 1, "title": "Intro", "key_points": ["a"]}],
    }
    broken = dict(outline)
    broken.pop("slides")
    gateway, _ = scripted_gateway(
        [
            "thinking out loud, no block yet",
            "```json\n" + json.dumps(broken) + "\n```",
            "```json\n" + json.dumps(outline) + "\n```",
        ]
    )
    transcript = run_deliberation(
        gateway, K.SYLLABUS_PROCESSING, CASTS[K.SYLLABUS_PROCESSING],
        "partition it", [], rounds=2,
    )
    document = extract_structured(transcript, "slide_outline", gateway=gateway)
    assert document == outline
    assert transcript.repair_turns == 1
    expected = transcript.rounds_executed * len(CASTS[K.SYLLABUS_PROCESSING]) + transcript.repair_turns
    assert len(transcript.assistant_messages) == expected
    assert transcript.extraction_errors  # the failed attempt kept its details


def test_extraction_ignores_prose_around_block():
    transcript = DeliberationTranscript(subtask_id="t", kind=K.SYLLABUS_PROCESSING)
    payload = {"chapter_index": 1, "slides": [{"slide_index": 1, "title": "T"}]}
    transcript.messages.append(
        ChatMessage(
            role_label="assistant",
            speaker=AgentRole.INSTRUCTIONAL_DESIGNER,
            content="Here you go:\n```json\n" + json.dumps(payload) + "\n```\nDone.",
        )
    )
    assert extract_structured(transcript, "slide_outline") == payload


def test_extraction_prefers_last_valid_block():
    old = {"chapter_index": 1, "slides": [{"slide_index": 1, "title": "old"}]}
    new = {"chapter_index": 1, "slides": [{"slide_index": 1, "title": "new"}]}
    transcript = DeliberationTranscript(subtask_id="t", kind=K.SYLLABUS_PROCESSING)
    for payload in (old, new):
        transcript.messages.append(
            ChatMessage(
                role_label="assistant", speaker=AgentRole.INSTRUCTIONAL_DESIGNER,
                content="```json\n" + json.dumps(payload) + "\n```",
            )
        )
    assert extract_structured(transcript, "slide_outline") == new


def test_extraction_fails_without_gateway_or_block():
    transcript = DeliberationTranscript(subtask_id="t", kind=K.SYLLABUS_PROCESSING)
    transcript.messages.append(
        ChatMessage(role_label="assistant", speaker=AgentRole.INSTRUCTIONAL_DESIGNER, content="prose only")
    )
    with pytest.raises(ExtractionFailed):
        extract_structured(transcript, "slide_outline")


def test_wire_projection_tags_other_speakers():
    transcript = DeliberationTranscript(subtask_id="t", kind=K.OBJECTIVES_DEFINITION)
    transcript.messages.append(ChatMessage(role_label="user", content="brief"))
    transcript.messages.append(
        ChatMessage(role_label="assistant", speaker=AgentRole.TEACHING_FACULTY, content="proposal")
    )
    wire = build_wire_messages(transcript, AgentRole.INSTRUCTIONAL_DESIGNER)
    assert wire[0].role_label == "system"
    assert wire[1].content == "brief"
    assert wire[2].role_label == "user"
    assert wire[2].content == "[Teaching Faculty] proposal"
    wire_self = build_wire_messages(transcript, AgentRole.TEACHING_FACULTY)
    assert wire_self[2].role_label == "assistant"
    assert wire_self[2].content == "proposal"
