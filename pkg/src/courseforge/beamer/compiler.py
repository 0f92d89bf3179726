"""Drive the external LaTeX toolchain and the bounded repair loop.

Compiles run in nonstop mode with halt-on-error so nothing ever waits on
an interactive prompt; two passes resolve references. The repair loop is
sanitize -> compile -> classify-and-fix, bounded by max_attempts, and
only the three known error classes are ever fixed automatically.
"""

from __future__ import annotations

import re
import shutil
import subprocess
import unicodedata
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

from courseforge.beamer.sanitize import MATH_SYMBOLS, sanitize, split_segments
from courseforge.errors import CourseforgeError


class ToolchainMissing(CourseforgeError):
    pass


class Timeout(CourseforgeError):
    pass


class ExhaustedAttempts(CourseforgeError):
    """Repair attempts ran out; carries the last compile log excerpt."""

    def __init__(self, message: str, log_excerpt: str):
        super().__init__(message)
        self.log_excerpt = log_excerpt


@dataclass(frozen=True)
class CompileResult:
    status: str  # "success" | "failure"
    log_excerpt: str
    attempts: int
    pdf_path: Optional[Path]

    @property
    def ok(self) -> bool:
        return self.status == "success"


@dataclass(frozen=True)
class RepairOutcome:
    result: CompileResult
    applied_rules: tuple[str, ...]
    tex: str


def probe_toolchain(binary: str = "pdflatex") -> Optional[str]:
    return shutil.which(binary)


def _excerpt(log: str, limit: int = 2500) -> str:
    lines = log.splitlines()
    picked: list[str] = []
    for i, line in enumerate(lines):
        if line.startswith("!") or line.startswith("Runaway argument"):
            picked.extend(lines[i:i + 3])
    text = "\n".join(picked) if picked else "\n".join(lines[-15:])
    return text[:limit]


def compile_tex(
    tex: str,
    workdir: Path,
    binary: str = "pdflatex",
    timeout: float = 120.0,
    passes: int = 2,
    jobname: str = "deck",
) -> CompileResult:
    """Compile a document; success means exit 0 on the final pass and a
    non-empty PDF on disk."""
    if probe_toolchain(binary) is None:
        raise ToolchainMissing(f"LaTeX binary {binary!r} not found on PATH")
    workdir.mkdir(parents=True, exist_ok=True)
    source = workdir / f"{jobname}.tex"
    source.write_text(tex, encoding="utf-8")
    command = [binary, "-interaction=nonstopmode", "-halt-on-error", f"{jobname}.tex"]

    log = ""
    for _ in range(passes):
        try:
            proc = subprocess.run(
                command,
                cwd=workdir,
                stdin=subprocess.DEVNULL,
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                timeout=timeout,
                text=True,
                errors="replace",
            )
        except subprocess.TimeoutExpired as exc:
            raise Timeout(f"compile exceeded {timeout}s per pass") from exc
        log_file = workdir / f"{jobname}.log"
        log = log_file.read_text(encoding="utf-8", errors="replace") if log_file.exists() else (proc.stdout or "")
        if proc.returncode != 0:
            return CompileResult(status="failure", log_excerpt=_excerpt(log), attempts=1, pdf_path=None)

    pdf = workdir / f"{jobname}.pdf"
    if not pdf.exists() or pdf.stat().st_size == 0:
        return CompileResult(status="failure", log_excerpt=_excerpt(log), attempts=1, pdf_path=None)
    return CompileResult(status="success", log_excerpt="", attempts=1, pdf_path=pdf)


# --- failure classification --------------------------------------------------

_FRAGILE_SIGNS = (
    "\\beamer@doifinframe",
    "Paragraph ended before \\beamer@",
    "verbatim}\n! ",
)
_ESCAPE_SIGNS = (
    "Misplaced alignment tab character",
    "macro parameter character",
    "Missing $ inserted",
)
_UNICODE_SIGNS = (
    "Unicode character",
    "inputenc Error",
)


def classify_failure(log: str) -> Optional[str]:
    """Map a compile log onto one of the three known error classes."""
    if any(sign in log for sign in _FRAGILE_SIGNS):
        return "fragile"
    if any(sign in log for sign in _UNICODE_SIGNS):
        return "unicode"
    if any(sign in log for sign in _ESCAPE_SIGNS):
        return "escape"
    return None


_FRAME_ANY = re.compile(r"\\begin\{frame\}(\[[^\]]*\])?")


def _force_fragile(tex: str) -> str:
    """Log-driven fix: add fragile to every frame still missing it."""
    def add(match: re.Match) -> str:
        options = match.group(1)
        if options is None:
            return "\\begin{frame}[fragile]"
        if "fragile" in options:
            return match.group(0)
        return "\\begin{frame}[" + options[1:-1] + ",fragile]"

    return _FRAME_ANY.sub(add, tex)


def _force_escape(tex: str) -> str:
    """Log-driven fix: escape specials even inside alignment-like text."""
    out: list[str] = []
    for segment in split_segments(tex):
        if segment.mode != "text":
            out.append(segment.text)
            continue
        piece = segment.text
        for ch in "&%#_":
            piece = piece.replace(ch, "\\" + ch)
        out.append(piece)
    return "".join(out)


def _force_ascii(tex: str) -> str:
    """Log-driven fix: transliterate anything the symbol table missed."""
    out: list[str] = []
    for ch in tex:
        if ord(ch) <= 127:
            out.append(ch)
            continue
        folded = unicodedata.normalize("NFKD", ch).encode("ascii", "ignore").decode()
        out.append(folded or "?")
    return "".join(out)


_TARGETED_FIXES: dict[str, tuple[Callable[[str], str], str]] = {
    "fragile": (_force_fragile, "fragile_tag"),
    "escape": (_force_escape, "escape_char"),
    "unicode": (_force_ascii, "unicode_math"),
}

CompileFn = Callable[[str, Path], CompileResult]


def repair_loop(
    tex: str,
    workdir: Path,
    max_attempts: int = 3,
    binary: str = "pdflatex",
    timeout: float = 120.0,
    compile_fn: Optional[CompileFn] = None,
    on_attempt: Optional[Callable[[int, CompileResult], None]] = None,
) -> RepairOutcome:
    """Run sanitize -> compile, fixing known failure classes between tries.

    Unknown failures stop the loop immediately with the full log retained;
    running out of attempts on known failures raises ExhaustedAttempts.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    if compile_fn is None:
        def compile_fn(source: str, attempt_dir: Path) -> CompileResult:
            return compile_tex(source, attempt_dir, binary=binary, timeout=timeout)

    current = tex
    applied: list[str] = []
    last: Optional[CompileResult] = None
    for attempt in range(1, max_attempts + 1):
        cleaned = sanitize(current)
        current = cleaned.tex
        for rule in cleaned.applied:
            if rule not in applied:
                applied.append(rule)
        result = compile_fn(current, workdir / f"attempt-{attempt}")
        if on_attempt:
            on_attempt(attempt, result)
        result = replace(result, attempts=attempt)
        if result.ok:
            return RepairOutcome(result=result, applied_rules=tuple(applied), tex=current)
        last = result
        category = classify_failure(result.log_excerpt)
        if category is None:
            return RepairOutcome(result=result, applied_rules=tuple(applied), tex=current)
        fix, rule_id = _TARGETED_FIXES[category]
        current = fix(current)
        if rule_id not in applied:
            applied.append(rule_id)
    raise ExhaustedAttempts(
        f"deck still failing after {max_attempts} attempts",
        log_excerpt=last.log_excerpt if last else "",
    )
