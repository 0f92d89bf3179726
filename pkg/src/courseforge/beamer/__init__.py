"""Beamer deck assembly, sanitization, compilation, and repair."""

from courseforge.beamer.assemble import BeamerFrame, MissingContent, assemble, build_frames
from courseforge.beamer.compiler import (
    CompileResult,
    ExhaustedAttempts,
    RepairOutcome,
    Timeout,
    ToolchainMissing,
    compile_tex,
    probe_toolchain,
    repair_loop,
)
from courseforge.beamer.sanitize import SanitizeResult, sanitize

__all__ = [
    "BeamerFrame",
    "CompileResult",
    "ExhaustedAttempts",
    "MissingContent",
    "RepairOutcome",
    "SanitizeResult",
    "Timeout",
    "ToolchainMissing",
    "assemble",
    "build_frames",
    "compile_tex",
    "probe_toolchain",
    "repair_loop",
    "sanitize",
]
