"""Chat-completion gateway over any compatible HTTP backend.

The wire shape is the common one: POST {base_url}/chat/completions with
model, messages, and the four sampling fields. Transient transport
failures and 429/5xx responses are retried with bounded exponential
backoff (three attempts total); overflow rejections surface as
ContextOverflow so the caller can shrink its context.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass
from typing import Callable, Optional

import httpx

from courseforge.agents.prompts import AgentRole
from courseforge.errors import CourseforgeError, InvalidDocument
from courseforge.metering import UsageRecord

logger = logging.getLogger(__name__)


class BackendUnavailable(CourseforgeError):
    """The backend kept failing after all retry attempts."""


class ContextOverflow(CourseforgeError):
    """The backend rejected the request as too long; shrink the context."""


@dataclass(frozen=True)
class SamplingParams:
    temperature: float = 1.0
    top_p: float = 1.0
    presence_penalty: float = 0.0
    frequency_penalty: float = 0.0

    def as_payload(self) -> dict:
        return {
            "temperature": self.temperature,
            "top_p": self.top_p,
            "presence_penalty": self.presence_penalty,
            "frequency_penalty": self.frequency_penalty,
        }


@dataclass(frozen=True)
class ChatMessage:
    role_label: str  # system | user | assistant
    content: str
    speaker: Optional[AgentRole] = None

    def __post_init__(self) -> None:
        if self.role_label not in ("system", "user", "assistant"):
            raise InvalidDocument(f"bad role_label {self.role_label!r}")
        if not self.content:
            raise InvalidDocument("message content must be non-empty")

    def to_dict(self) -> dict:
        return {
            "role_label": self.role_label,
            "content": self.content,
            "speaker": self.speaker.value if self.speaker else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChatMessage":
        speaker = data.get("speaker")
        return cls(
            role_label=data["role_label"],
            content=data["content"],
            speaker=AgentRole(speaker) if speaker else None,
        )


@dataclass(frozen=True)
class GatewayReply:
    content: str
    usage: UsageRecord


_RETRYABLE_STATUS = {429, 500, 502, 503, 504}
_OVERFLOW_MARKERS = ("context_length", "maximum context", "too many tokens", "context window")


class ChatGateway:
    """Synchronous client for a chat-completion backend.

    `transport` and `sleeper` exist for tests: the former swaps in an
    in-process backend, the latter removes real backoff sleeps.
    """

    MAX_ATTEMPTS = 3

    def __init__(
        self,
        base_url: str,
        model_name: str,
        api_key_env_name: str = "",
        timeout: float = 120.0,
        transport: Optional[httpx.BaseTransport] = None,
        sleeper: Callable[[float], None] = time.sleep,
        backoff_base: float = 0.5,
        usage_sink: Optional[Callable[[UsageRecord], None]] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model_name = model_name
        self.api_key_env_name = api_key_env_name
        self._sleeper = sleeper
        self._backoff_base = backoff_base
        self.usage_sink = usage_sink
        self._client = httpx.Client(
            base_url=self.base_url, timeout=timeout, transport=transport
        )

    def close(self) -> None:
        self._client.close()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env_name, "") if self.api_key_env_name else ""
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(
        self,
        messages: list[ChatMessage],
        params: SamplingParams,
        model_name: str = "",
        subtask: str = "",
    ) -> GatewayReply:
        """Run one completion; returns assistant text plus exact usage."""
        if not messages:
            raise InvalidDocument("messages must be non-empty")
        if messages[0].role_label != "system":
            raise InvalidDocument("first message must carry the system prompt")
        model = model_name or self.model_name
        body = {
            "model": model,
            "messages": [{"role": m.role_label, "content": m.content} for m in messages],
            **params.as_payload(),
        }

        started = time.monotonic()
        last_error = ""
        for attempt in range(1, self.MAX_ATTEMPTS + 1):
            try:
                response = self._client.post(
                    "/chat/completions", json=body, headers=self._headers()
                )
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
                if attempt < self.MAX_ATTEMPTS:
                    self._backoff(attempt, last_error)
                    continue
                break

            if response.status_code == 200:
                return self._parse_reply(response, model, subtask, started)
            detail = response.text[:500]
            if response.status_code == 400 and any(
                marker in detail.lower() for marker in _OVERFLOW_MARKERS
            ):
                raise ContextOverflow(f"backend rejected request length: {detail}")
            last_error = f"HTTP {response.status_code}: {detail}"
            if response.status_code in _RETRYABLE_STATUS and attempt < self.MAX_ATTEMPTS:
                self._backoff(attempt, last_error)
                continue
            break
        raise BackendUnavailable(
            f"backend failed after {self.MAX_ATTEMPTS} attempts; last error: {last_error}"
        )

    def _backoff(self, attempt: int, reason: str) -> None:
        delay = self._backoff_base * (2 ** (attempt - 1))
        logger.warning("retrying backend call (attempt %d): %s", attempt, reason)
        self._sleeper(delay)

    def _parse_reply(
        self, response: httpx.Response, model: str, subtask: str, started: float
    ) -> GatewayReply:
        data = response.json()
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailable(f"malformed backend response: {data!r:.300}") from exc
        usage = data.get("usage") or {}
        record = UsageRecord.fresh(
            subtask=subtask,
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            wall_time_seconds=time.monotonic() - started,
            model_name=model,
        )
        if self.usage_sink:
            self.usage_sink(record)
        return GatewayReply(content=content, usage=record)
