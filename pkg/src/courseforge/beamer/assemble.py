"""Turn a slide outline plus per-slide content into a Beamer document.

One outline slide normally becomes one frame; a slide whose rendered body
exceeds the height heuristic is split into continuation frames, so the
frame count is always >= the slide count. Frames holding verbatim-class
content are emitted with the fragile option from the start.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from courseforge.beamer.sanitize import frame_needs_fragile
from courseforge.errors import CourseforgeError
from courseforge.model import SlideContent, SlideOutline


class MissingContent(CourseforgeError):
    """Some outline slides have no content; carries the uncovered indices."""

    def __init__(self, missing: Sequence[int]):
        self.missing = sorted(missing)
        super().__init__(f"no content for slide indices {self.missing}")


@dataclass(frozen=True)
class BeamerFrame:
    slide_index: int
    title: str
    body_tex: str
    needs_fragile: bool


PREAMBLE = r"""\documentclass[11pt]{beamer}
\usetheme{default}
\usepackage[T1]{fontenc}
\usepackage[utf8]{inputenc}
\usepackage{amsmath}
\usepackage{amssymb}
\usepackage{hyperref}
\setbeamertemplate{navigation symbols}{}
"""

# rendered body lines per frame before splitting into continuations
MAX_FRAME_LINES = 14

_FENCE = re.compile(r"^```[\w+-]*\s*$")
_BULLET = re.compile(r"^\s*[-*]\s+(\S.*)$")
_NUMBERED = re.compile(r"^\s*\d+[.)]\s+(\S.*)$")


def _render_blocks(body: str) -> list[str]:
    """Convert lightweight markup into TeX blocks (one string per block).

    Fenced code becomes a verbatim environment, bullet and numbered lines
    become itemize/enumerate, and plain paragraphs pass through.
    """
    blocks: list[str] = []
    paragraph: list[str] = []
    items: list[str] = []
    item_env: Optional[str] = None
    code: Optional[list[str]] = None

    def close_paragraph() -> None:
        if paragraph:
            blocks.append(" ".join(paragraph))
            paragraph.clear()

    def close_items() -> None:
        nonlocal item_env
        if items and item_env:
            lines = [f"\\begin{{{item_env}}}"]
            lines += [f"  \\item {item}" for item in items]
            lines.append(f"\\end{{{item_env}}}")
            blocks.append("\n".join(lines))
        items.clear()
        item_env = None

    for line in body.splitlines():
        if code is not None:
            if _FENCE.match(line):
                blocks.append("\\begin{verbatim}\n" + "\n".join(code) + "\n\\end{verbatim}")
                code = None
            else:
                code.append(line)
            continue
        if _FENCE.match(line):
            close_paragraph()
            close_items()
            code = []
            continue
        bullet = _BULLET.match(line)
        numbered = _NUMBERED.match(line)
        if bullet or numbered:
            close_paragraph()
            wanted = "itemize" if bullet else "enumerate"
            if item_env != wanted:
                close_items()
                item_env = wanted
            items.append((bullet or numbered).group(1).strip())
            continue
        if not line.strip("-* \t"):
            close_paragraph()
            close_items()
            continue
        close_items()
        paragraph.append(line.strip())
    if code is not None:
        blocks.append("\\begin{verbatim}\n" + "\n".join(code) + "\n\\end{verbatim}")
    close_paragraph()
    close_items()
    return blocks


def _split_blocks(blocks: list[str], budget: int) -> list[list[str]]:
    """Group whole blocks into chunks of at most `budget` lines each."""
    chunks: list[list[str]] = []
    current: list[str] = []
    used = 0
    for block in blocks:
        height = block.count("\n") + 1
        if current and used + height > budget:
            chunks.append(current)
            current = []
            used = 0
        current.append(block)
        used += height
    if current:
        chunks.append(current)
    return chunks or [[]]


def build_frames(
    outline: SlideOutline, contents: Sequence[SlideContent]
) -> list[BeamerFrame]:
    """Render one or more frames per outline slide."""
    by_index = {c.slide_index: c for c in contents}
    missing = sorted(outline.slide_indices - set(by_index))
    if missing:
        raise MissingContent(missing)

    frames: list[BeamerFrame] = []
    for slide in outline.slides:
        content = by_index[slide.slide_index]
        blocks = _render_blocks(content.body)
        if slide.key_points and not blocks:
            blocks = _render_blocks("\n".join(f"- {p}" for p in slide.key_points))
        for part, chunk in enumerate(_split_blocks(blocks, MAX_FRAME_LINES)):
            title = slide.title if part == 0 else f"{slide.title} (cont.)"
            body = "\n\n".join(chunk)
            frames.append(
                BeamerFrame(
                    slide_index=slide.slide_index,
                    title=title,
                    body_tex=body,
                    needs_fragile=frame_needs_fragile(body),
                )
            )
    return frames


def render_frame(frame: BeamerFrame) -> str:
    options = "[fragile]" if frame.needs_fragile else ""
    return (
        f"\\begin{{frame}}{options}{{{frame.title}}}\n"
        f"{frame.body_tex}\n"
        f"\\end{{frame}}"
    )


def assemble(
    outline: SlideOutline,
    contents: Sequence[SlideContent],
    chapter_title: str = "",
    course_title: str = "",
) -> str:
    """Emit a complete, self-contained Beamer document for one chapter."""
    frames = build_frames(outline, contents)
    title = chapter_title or f"Chapter {outline.chapter_index}"
    parts = [
        PREAMBLE,
        f"\\title{{{title}}}",
        f"\\subtitle{{{course_title}}}" if course_title else "",
        "\\date{}",
        "\\begin{document}",
        "\\frame{\\titlepage}",
        f"\\section{{{title}}}",
    ]
    parts += [render_frame(frame) for frame in frames]
    parts.append("\\end{document}")
    return "\n".join(p for p in parts if p) + "\n"
