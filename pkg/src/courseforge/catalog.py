"""Educator catalog: optional structured priors injected into agent context.

The key schema is a closed set. Unknown keys are rejected rather than
warned about, because catalog text is spliced into prompts verbatim and a
silently accepted extra key would change agent behavior untraceably.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from courseforge.errors import CourseforgeError, InvalidDocument


class UnknownKey(CourseforgeError):
    """The raw document contains a key outside the catalog schema."""


class EmptyCatalog(CourseforgeError):
    """No catalog category is populated; catalog-guided modes cannot start."""


# category -> tuple of allowed field names. `max_slide_count` is the single
# non-text field (positive integer).
CATALOG_SCHEMA: dict[str, tuple[str, ...]] = {
    "student_profile": ("background", "academic_performance", "needs_and_barriers"),
    "instructor_preferences": ("emphasis", "style", "assessment_focus"),
    "course_structure": ("learning_outcomes", "duration", "weekly_outline"),
    "assessment_design": ("format_preferences", "delivery_constraints"),
    "teaching_constraints": ("platform_policy", "ta_support", "delivery_context", "max_slide_count"),
    "institutional_requirements": ("program_outcomes", "academic_policies", "department_syllabus"),
    "prior_feedback": (),
}


@dataclass(frozen=True)
class EducatorCatalog:
    """Validated catalog: text fields grouped by category, all optional."""

    categories: dict[str, dict[str, str]] = field(default_factory=dict)
    prior_feedback: str = ""
    max_slide_count: Optional[int] = None

    def validate(self) -> "EducatorCatalog":
        if self.max_slide_count is not None and self.max_slide_count < 1:
            raise InvalidDocument("max_slide_count must be >= 1")
        if not self.populated_categories():
            raise EmptyCatalog("no catalog category is populated")
        return self

    def populated_categories(self) -> list[str]:
        names = [name for name, fields in self.categories.items() if any(fields.values())]
        if self.prior_feedback.strip():
            names.append("prior_feedback")
        if self.max_slide_count is not None and "teaching_constraints" not in names:
            names.append("teaching_constraints")
        return names

    def to_dict(self) -> dict:
        data: dict[str, Any] = {k: dict(v) for k, v in sorted(self.categories.items())}
        if self.max_slide_count is not None:
            data.setdefault("teaching_constraints", {})["max_slide_count"] = self.max_slide_count
        if self.prior_feedback:
            data["prior_feedback"] = self.prior_feedback
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "EducatorCatalog":
        return validate_catalog(data)

    def prompt_block(self) -> str:
        """Render the catalog as the labeled block injected into deliberations."""
        return "### Context: educator_catalog\n```json\n" + json.dumps(
            self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False
        ) + "\n```"


def validate_catalog(raw: dict) -> EducatorCatalog:
    """Normalize a raw key/value document into an EducatorCatalog.

    Unknown categories or fields raise UnknownKey naming the offender; a
    document with no populated category raises EmptyCatalog.
    """
    if not isinstance(raw, dict):
        raise InvalidDocument("catalog document must be a mapping")
    categories: dict[str, dict[str, str]] = {}
    prior_feedback = ""
    max_slide_count: Optional[int] = None

    for category, value in raw.items():
        if category not in CATALOG_SCHEMA:
            raise UnknownKey(f"unknown catalog category {category!r}")
        if category == "prior_feedback":
            if isinstance(value, dict):
                raise UnknownKey("prior_feedback holds text, not nested fields")
            prior_feedback = str(value or "")
            continue
        if not isinstance(value, dict):
            raise InvalidDocument(f"category {category!r} must be a mapping of fields")
        allowed = CATALOG_SCHEMA[category]
        normalized: dict[str, str] = {}
        for fieldname, fieldvalue in value.items():
            if fieldname not in allowed:
                raise UnknownKey(f"unknown catalog key {category}.{fieldname}")
            if fieldname == "max_slide_count":
                try:
                    max_slide_count = int(fieldvalue)
                except (TypeError, ValueError):
                    raise InvalidDocument("max_slide_count must be an integer") from None
                if max_slide_count < 1:
                    raise InvalidDocument("max_slide_count must be >= 1")
                continue
            if fieldvalue is not None and str(fieldvalue).strip():
                normalized[fieldname] = str(fieldvalue)
        if normalized:
            categories[category] = normalized

    catalog = EducatorCatalog(
        categories=categories,
        prior_feedback=prior_feedback,
        max_slide_count=max_slide_count,
    )
    return catalog.validate()


def load_catalog(path: Path) -> EducatorCatalog:
    """Load a catalog file; JSON and YAML share the same key schema."""
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".yaml", ".yml"):
        raw = yaml.safe_load(text)
    else:
        raw = json.loads(text)
    if raw is None:
        raw = {}
    return validate_catalog(raw)


def catalog_hash(catalog: Optional[EducatorCatalog]) -> str:
    from courseforge.util import sha256_hex

    if catalog is None:
        return ""
    return sha256_hex(json.dumps(catalog.to_dict(), sort_keys=True))
