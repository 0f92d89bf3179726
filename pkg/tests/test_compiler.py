from __future__ import annotations

import os
import stat
from pathlib import Path

import pytest

from courseforge.beamer.compiler import (
    CompileResult,
    ExhaustedAttempts,
    Timeout,
    ToolchainMissing,
    classify_failure,
    compile_tex,
    repair_loop,
)

FRAGILE_LOG = "! Illegal parameter number in definition of \\beamer@doifinframe."
ESCAPE_LOG = "! Misplaced alignment tab character &."
UNICODE_LOG = "! Package inputenc Error: Unicode character \u03b3 (U+03B3)"
UNKNOWN_LOG = "! LaTeX Error: File `mysterypackage.sty' not found."


def fake_latex(tmp_path: Path, script_body: str) -> Path:
    """Install a controllable stand-in for the LaTeX binary on PATH."""
    bin_dir = tmp_path / "bin"
    bin_dir.mkdir(exist_ok=True)
    binary = bin_dir / "fakelatex"
    binary.write_text("#!/bin/bash\n" + script_body, encoding="utf-8")
    binary.chmod(binary.stat().st_mode | stat.S_IEXEC)
    return binary


@pytest.fixture
def on_path(tmp_path, monkeypatch):
    def install(script_body: str) -> str:
        binary = fake_latex(tmp_path, script_body)
        monkeypatch.setenv("PATH", str(binary.parent) + os.pathsep + os.environ["PATH"])
        return binary.name

    return install


def test_toolchain_missing_raised():
    with pytest.raises(ToolchainMissing):
        compile_tex("x", Path("/tmp/none"), binary="definitely-not-a-latex-binary")


def test_successful_compile_runs_two_passes_and_finds_pdf(tmp_path, on_path):
    binary = on_path(
        'job="${@: -1}"; job="${job%.tex}"\n'
        'echo "pass" >> passes.txt\n'
        'echo "This is fake, ok." > "$job.log"\n'
        'printf "%%PDF-1.5 fake" > "$job.pdf"\n'
        "exit 0\n"
    )
    workdir = tmp_path / "w"
    result = compile_tex("\\documentclass{beamer}", workdir, binary=binary)
    assert result.ok and result.pdf_path is not None
    assert (workdir / "passes.txt").read_text().count("pass") == 2


def test_failed_compile_captures_error_excerpt(tmp_path, on_path):
    binary = on_path(
        'job="${@: -1}"; job="${job%.tex}"\n'
        'printf "! Misplaced alignment tab character &.\\nl.5 a & b\\n" > "$job.log"\n'
        "exit 1\n"
    )
    result = compile_tex("x", tmp_path / "w", binary=binary)
    assert not result.ok
    assert "Misplaced alignment tab" in result.log_excerpt


def test_timeout_never_blocks_forever(tmp_path, on_path):
    binary = on_path("sleep 5\nexit 0\n")
    with pytest.raises(Timeout):
        compile_tex("x", tmp_path / "w", binary=binary, timeout=0.3)


def test_classify_failure_covers_the_three_known_classes():
    assert classify_failure(FRAGILE_LOG) == "fragile"
    assert classify_failure(ESCAPE_LOG) == "escape"
    assert classify_failure(UNICODE_LOG) == "unicode"
    assert classify_failure(UNKNOWN_LOG) is None


def stub_compiler(script: list[str]):
    """Yield scripted failures, then success; records sources it saw."""
    seen: list[str] = []

    def compile_fn(tex: str, workdir: Path) -> CompileResult:
        seen.append(tex)
        if script:
            log = script.pop(0)
            if log:
                return CompileResult(status="failure", log_excerpt=log, attempts=1, pdf_path=None)
        return CompileResult(status="success", log_excerpt="", attempts=1, pdf_path=Path("fake.pdf"))

    return compile_fn, seen


def test_clean_deck_succeeds_on_first_attempt(tmp_path):
    compile_fn, _ = stub_compiler([""])
    outcome = repair_loop("\\documentclass{beamer}", tmp_path, compile_fn=compile_fn)
    assert outcome.result.ok and outcome.result.attempts == 1


def test_fragile_failure_fixed_on_second_attempt(tmp_path):
    compile_fn, seen = stub_compiler([FRAGILE_LOG, ""])
    deck = "\\begin{frame}{T}\nplain\n\\end{frame}"
    outcome = repair_loop(deck, tmp_path, compile_fn=compile_fn)
    assert outcome.result.ok
    assert outcome.result.attempts == 2
    assert "fragile_tag" in outcome.applied_rules
    assert "[fragile]" in seen[1]


def test_unknown_error_terminates_with_log(tmp_path):
    compile_fn, _ = stub_compiler([UNKNOWN_LOG, "", ""])
    outcome = repair_loop("x", tmp_path, compile_fn=compile_fn)
    assert not outcome.result.ok
    assert outcome.result.attempts == 1
    assert "mysterypackage" in outcome.result.log_excerpt


def test_exhausted_attempts_raises_with_last_log(tmp_path):
    compile_fn, _ = stub_compiler([ESCAPE_LOG, ESCAPE_LOG, ESCAPE_LOG])
    with pytest.raises(ExhaustedAttempts) as excinfo:
        repair_loop("a & b", tmp_path, max_attempts=3, compile_fn=compile_fn)
    assert "Misplaced alignment" in excinfo.value.log_excerpt


def test_escape_fix_applied_between_attempts(tmp_path):
    compile_fn, seen = stub_compiler([ESCAPE_LOG, ""])
    outcome = repair_loop("\\begin{tabular}{ll}\na & b\n\\end{tabular}", tmp_path, compile_fn=compile_fn)
    assert outcome.result.ok
    assert "\\&" in seen[1]


def test_unicode_fix_transliterates_leftovers(tmp_path):
    compile_fn, seen = stub_compiler([UNICODE_LOG, ""])
    outcome = repair_loop("snowman ☃ here", tmp_path, compile_fn=compile_fn)
    assert outcome.result.ok
    assert "☃" not in seen[1]
