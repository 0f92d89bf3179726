"""JSON Schemas for every structured artifact extracted from deliberations."""

from __future__ import annotations

from typing import Any

from jsonschema import Draft202012Validator
from jsonschema import exceptions as js_exceptions


def _obj(properties: dict, required: list[str], **extra: Any) -> dict:
    return {
        "type": "object",
        "properties": properties,
        "required": required,
        "additionalProperties": True,
        **extra,
    }


_TEXT = {"type": "string", "minLength": 1}
_POS_INT = {"type": "integer", "minimum": 1}

SCHEMAS: dict[str, dict] = {
    "learning_objectives": _obj(
        {
            "objectives": {
                "type": "array",
                "minItems": 1,
                "items": _obj({"statement": _TEXT, "bloom_verb": {"type": "string"}}, ["statement"]),
            }
        },
        ["objectives"],
    ),
    "learner_profile": _obj(
        {"backgrounds": _TEXT, "prior_knowledge": _TEXT, "challenges": _TEXT},
        ["backgrounds", "prior_knowledge", "challenges"],
    ),
    "resource_plan": _obj(
        {
            "teaching_needs": _TEXT,
            "institutional_constraints": _TEXT,
            "feasible_strategies": _TEXT,
        },
        ["teaching_needs", "institutional_constraints", "feasible_strategies"],
    ),
    "syllabus": _obj(
        {
            "weekly_entries": {
                "type": "array",
                "minItems": 1,
                "items": _obj(
                    {
                        "week_index": _POS_INT,
                        "topic": _TEXT,
                        "readings": {"type": "string"},
                        "assignments": {"type": "string"},
                    },
                    ["week_index", "topic"],
                ),
            },
            "grading_policy": {"type": "string"},
            "policies": {"type": "string"},
        },
        ["weekly_entries"],
    ),
    "chapter_list": _obj(
        {
            "chapters": {
                "type": "array",
                "minItems": 1,
                "items": _obj(
                    {
                        "chapter_index": _POS_INT,
                        "title": _TEXT,
                        "description": {"type": "string"},
                        "source_week_indices": {
                            "type": "array",
                            "minItems": 1,
                            "items": _POS_INT,
                        },
                    },
                    ["chapter_index", "title", "source_week_indices"],
                ),
            }
        },
        ["chapters"],
    ),
    "slide_plan": _obj(
        {
            "chapters": {
                "type": "array",
                "minItems": 1,
                "items": _obj(
                    {
                        "chapter_index": _POS_INT,
                        "key_concepts": {"type": "array", "items": _TEXT},
                        "flow_notes": {"type": "string"},
                    },
                    ["chapter_index", "key_concepts"],
                ),
            }
        },
        ["chapters"],
    ),
    "assessment_plan": _obj(
        {
            "strategy": _TEXT,
            "milestones": {"type": "array", "items": _TEXT},
            "feedback_mechanisms": {"type": "array", "items": _TEXT},
            "rubric_notes": {"type": "string"},
        },
        ["strategy"],
    ),
    "slide_outline": _obj(
        {
            "chapter_index": _POS_INT,
            "slides": {
                "type": "array",
                "minItems": 1,
                "items": _obj(
                    {
                        "slide_index": _POS_INT,
                        "title": _TEXT,
                        "key_points": {"type": "array", "items": _TEXT},
                    },
                    ["slide_index", "title"],
                ),
            },
        },
        ["chapter_index", "slides"],
    ),
    "slide_contents": _obj(
        {
            "chapter_index": _POS_INT,
            "contents": {
                "type": "array",
                "minItems": 1,
                "items": _obj(
                    {
                        "slide_index": _POS_INT,
                        "body": _TEXT,
                        "speaker_notes_draft": {"type": ["string", "null"]},
                    },
                    ["slide_index", "body"],
                ),
            },
        },
        ["chapter_index", "contents"],
    ),
    "slide_script": _obj(
        {
            "chapter_index": _POS_INT,
            "per_slide": {
                "type": "array",
                "minItems": 1,
                "items": _obj(
                    {
                        "slide_index": _POS_INT,
                        "script": _TEXT,
                        "transition_cue": {"type": "string"},
                    },
                    ["slide_index", "script"],
                ),
            },
        },
        ["chapter_index", "per_slide"],
    ),
    "assessment_pack": _obj(
        {
            "chapter_index": _POS_INT,
            "mcqs": {
                "type": "array",
                "minItems": 3,
                "maxItems": 5,
                "items": _obj(
                    {
                        "stem": _TEXT,
                        "options": {
                            "type": "array",
                            "minItems": 4,
                            "maxItems": 4,
                            "items": _TEXT,
                        },
                        "correct_index": {"type": "integer", "minimum": 0, "maximum": 3},
                        "explanation": {"type": "string"},
                    },
                    ["stem", "options", "correct_index"],
                ),
            },
            "activities": {"type": "array", "items": _TEXT},
            "discussion_questions": {"type": "array", "items": _TEXT},
            "rubric_notes": {"type": "string"},
        },
        ["chapter_index", "mcqs"],
    ),
    "pilot_issues": _obj(
        {
            "chapter_index": _POS_INT,
            "issues": {
                "type": "array",
                "items": _obj(
                    {
                        "category": {
                            "enum": [
                                "confusing_phrasing",
                                "misaligned_pacing",
                                "missing_prerequisite",
                            ]
                        },
                        "detail": _TEXT,
                    },
                    ["category", "detail"],
                ),
            },
        },
        ["chapter_index", "issues"],
    ),
}

_VALIDATORS = {name: Draft202012Validator(schema) for name, schema in SCHEMAS.items()}


def validate_document(schema_id: str, document: Any) -> list[str]:
    """Return human-readable validation errors (empty when valid)."""
    if schema_id not in _VALIDATORS:
        raise KeyError(f"unknown schema id {schema_id!r}")
    errors = []
    for error in _VALIDATORS[schema_id].iter_errors(document):
        location = "/".join(str(p) for p in error.absolute_path) or "<root>"
        errors.append(f"{location}: {error.message}")
    return sorted(errors)
