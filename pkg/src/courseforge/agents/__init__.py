"""Chat-completion gateway, role prompt pack, and the deliberation engine."""

from courseforge.agents.gateway import (
    BackendUnavailable,
    ChatGateway,
    ChatMessage,
    ContextOverflow,
    SamplingParams,
)
from courseforge.agents.prompts import CASTS, PROMPTS, AgentRole, DeliberationKind

__all__ = [
    "AgentRole",
    "BackendUnavailable",
    "CASTS",
    "ChatGateway",
    "ChatMessage",
    "ContextOverflow",
    "DeliberationKind",
    "PROMPTS",
    "SamplingParams",
]
