"""Workflow state machine: nine subtasks, four modes, checkpoint/resume."""

from courseforge.pipeline.state import (
    DAG,
    SUBTASK_ORDER,
    CoPilotDecision,
    FeedbackNote,
    PausePoint,
    PipelineState,
    RunPaths,
    SubtaskId,
)

__all__ = [
    "CoPilotDecision",
    "DAG",
    "FeedbackNote",
    "PausePoint",
    "PipelineState",
    "RunPaths",
    "SUBTASK_ORDER",
    "SubtaskId",
]
