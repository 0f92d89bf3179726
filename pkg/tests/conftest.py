from __future__ import annotations

import json
from pathlib import Path

import httpx
import pytest

from courseforge.agents.mock import MockBrain
from courseforge.model import CourseLevel, CourseSpec, ModeId
from courseforge.pipeline.engine import EngineConfig, PipelineEngine

CORPUS_DIR = Path(__file__).parent / "data" / "corpus"


class CapturingTransport(httpx.MockTransport):
    """Mock backend transport that records every request body."""

    def __init__(self):
        self.bodies: list[dict] = []
        brain = MockBrain()

        def handler(request: httpx.Request) -> httpx.Response:
            body = json.loads(request.content.decode("utf-8"))
            self.bodies.append(body)
            return httpx.Response(200, json=brain.handle_body(body))

        super().__init__(handler)

    def first_user_messages(self) -> list[str]:
        out = []
        for body in self.bodies:
            for message in body["messages"]:
                if message["role"] == "user":
                    out.append(message["content"])
                    break
        return out


@pytest.fixture
def capture() -> CapturingTransport:
    return CapturingTransport()


@pytest.fixture
def engine_factory(tmp_path):
    def make(transport=None, **overrides) -> PipelineEngine:
        config = EngineConfig(
            run_root=tmp_path / "runs",
            transport=transport or CapturingTransport(),
            latex_enabled=False,
            sleeper=lambda seconds: None,
            pause_timeout=overrides.pop("pause_timeout", 10.0),
        )
        for key, value in overrides.items():
            setattr(config, key, value)
        return PipelineEngine(config)

    return make


def fixture_course(mode: ModeId = ModeId.AUTONOMOUS) -> CourseSpec:
    return CourseSpec(
        course_title="Data Mining",
        level=CourseLevel.UNDERGRADUATE,
        topic_hint="3-week microcourse",
        mode=mode,
    )


@pytest.fixture
def course():
    return fixture_course()
