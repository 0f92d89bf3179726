"""Source sanitization for generated Beamer decks.

Three rule categories, applied in a fixed order:

1. fragile_tag  - frames holding verbatim-class content get the fragile option
2. escape_char  - & % # _ escaped in text mode (math, verbatim, URLs, and
                  alignment columns untouched; escaped sequences preserved)
3. unicode_math - Greek letters, comparison operators, arrows, curved quotes,
                  and dashes replaced by command equivalents; symbol runs in
                  prose are wrapped in inline math

Mode is tracked by a lightweight scanner, not a TeX parser: generated decks
fail in simple, repetitive ways, so full parsing would be out of proportion.
The whole pass is idempotent and never rewrites verbatim or listing bodies.
Unknown non-ASCII characters are reported, not rewritten.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class SanitizationRule:
    rule_id: str
    category: str  # fragile_tag | escape_char | unicode_math
    matcher: str
    replacement: str


RULES: tuple[SanitizationRule, ...] = (
    SanitizationRule("fragile_tag", "fragile_tag",
                     "frame whose body holds verbatim-class content without [fragile]",
                     "insert fragile into the frame options"),
    SanitizationRule("escape_amp", "escape_char", "unescaped & outside math/verbatim/alignment", r"\&"),
    SanitizationRule("escape_percent", "escape_char", "unescaped % outside math/verbatim", r"\%"),
    SanitizationRule("escape_hash", "escape_char", "unescaped # outside math/verbatim", r"\#"),
    SanitizationRule("escape_underscore", "escape_char", "unescaped _ outside math/verbatim", r"\_"),
    SanitizationRule("unicode_math", "unicode_math", "Greek letters / operators / arrows",
                     "command equivalents, wrapped in $...$ when in prose"),
    SanitizationRule("unicode_quotes", "unicode_math", "curved quotation marks", "`` '' ` '"),
    SanitizationRule("unicode_dashes", "unicode_math", "en/em dashes and minus sign", "-- --- -"),
)


@dataclass
class SanitizeResult:
    tex: str
    applied: list[str] = field(default_factory=list)
    unknown_unicode: list[str] = field(default_factory=list)


# --- symbol tables -----------------------------------------------------------

MATH_SYMBOLS: dict[str, str] = {
    # Greek
    "α": r"\alpha", "β": r"\beta", "γ": r"\gamma", "δ": r"\delta",
    "ε": r"\epsilon", "ζ": r"\zeta", "η": r"\eta", "θ": r"\theta",
    "ι": r"\iota", "κ": r"\kappa", "λ": r"\lambda", "μ": r"\mu",
    "ν": r"\nu", "ξ": r"\xi", "π": r"\pi", "ρ": r"\rho",
    "σ": r"\sigma", "τ": r"\tau", "υ": r"\upsilon", "φ": r"\phi",
    "χ": r"\chi", "ψ": r"\psi", "ω": r"\omega",
    "Γ": r"\Gamma", "Δ": r"\Delta", "Θ": r"\Theta", "Λ": r"\Lambda",
    "Ξ": r"\Xi", "Π": r"\Pi", "Σ": r"\Sigma", "Υ": r"\Upsilon",
    "Φ": r"\Phi", "Ψ": r"\Psi", "Ω": r"\Omega",
    # comparisons
    "≤": r"\le", "≥": r"\ge", "≠": r"\neq", "≈": r"\approx",
    "≡": r"\equiv", "∼": r"\sim", "∝": r"\propto",
    # arrows
    "→": r"\rightarrow", "←": r"\leftarrow", "↔": r"\leftrightarrow",
    "⇒": r"\Rightarrow", "⇐": r"\Leftarrow", "⇔": r"\Leftrightarrow",
    "↦": r"\mapsto",
    # operators and sets
    "±": r"\pm", "×": r"\times", "÷": r"\div", "⋅": r"\cdot", "·": r"\cdot",
    "∞": r"\infty", "∈": r"\in", "∉": r"\notin", "∑": r"\sum",
    "∏": r"\prod", "√": r"\sqrt", "∂": r"\partial", "∇": r"\nabla",
    "∪": r"\cup", "∩": r"\cap", "⊂": r"\subset", "⊆": r"\subseteq",
    "∀": r"\forall", "∃": r"\exists", "∅": r"\emptyset",
}

TEXT_REPLACEMENTS: dict[str, tuple[str, str]] = {
    "\u201c": ("``", "unicode_quotes"),
    "\u201d": ("''", "unicode_quotes"),
    "\u2018": ("`", "unicode_quotes"),
    "\u2019": ("'", "unicode_quotes"),
    "\u2013": ("--", "unicode_dashes"),
    "\u2014": ("---", "unicode_dashes"),
    "\u2212": ("-", "unicode_dashes"),
    "\u00a0": (" ", "unicode_dashes"),
    "\u2026": (r"\dots{}", "unicode_quotes"),
}

VERBATIM_ENVS = {"verbatim", "verbatim*", "Verbatim", "semiverbatim", "lstlisting", "minted"}
MATH_ENVS = {
    "equation", "equation*", "align", "align*", "aligned", "alignat", "alignat*",
    "gather", "gather*", "multline", "multline*", "eqnarray", "eqnarray*",
    "math", "displaymath", "cases", "matrix", "pmatrix", "bmatrix", "vmatrix",
    "Vmatrix", "smallmatrix", "split",
}
AMP_TEXT_ENVS = {"tabular", "tabular*", "array", "longtable"}
# commands whose brace argument must pass through untouched
RAW_ARG_COMMANDS = {"url", "label", "ref", "cite", "includegraphics", "input", "include", "verbatiminput", "lstinputlisting"}

_VERBATIM_MARKERS = re.compile(
    r"\\begin\{(?:" + "|".join(re.escape(e) for e in VERBATIM_ENVS) + r")\}|\\verb\*?[^a-zA-Z\s]"
)


def frame_needs_fragile(body: str) -> bool:
    """True iff the frame body contains verbatim-class content."""
    return bool(_VERBATIM_MARKERS.search(body))


# --- fragile tagging ---------------------------------------------------------

_FRAME_BEGIN = re.compile(r"\\begin\{frame\}(\[[^\]]*\])?")


def _tag_fragile(tex: str) -> tuple[str, bool]:
    """Add [fragile] to every frame whose body needs it; report any change."""
    changed = False
    out: list[str] = []
    pos = 0
    while True:
        match = _FRAME_BEGIN.search(tex, pos)
        if not match:
            out.append(tex[pos:])
            break
        end = tex.find(r"\end{frame}", match.end())
        if end == -1:
            out.append(tex[pos:])
            break
        body = tex[match.end():end]
        options = match.group(1)
        out.append(tex[pos:match.start()])
        if frame_needs_fragile(body) and (options is None or "fragile" not in options):
            changed = True
            if options is None:
                new_options = "[fragile]"
            else:
                new_options = "[" + options[1:-1] + ",fragile]"
            out.append("\\begin{frame}" + new_options)
        else:
            out.append(match.group(0))
        out.append(body)
        out.append(r"\end{frame}")
        pos = end + len(r"\end{frame}")
    return "".join(out), changed


# --- mode-splitting scanner --------------------------------------------------

@dataclass
class Segment:
    mode: str  # "text" | "math" | "skip"
    amp_ok: bool
    text: str


_ENV_NAME = re.compile(r"\\(begin|end)\{([^}]*)\}")


def split_segments(tex: str) -> list[Segment]:
    """Split source into text / math / untouchable segments.

    Delimiters and commands land in skip segments; only the prose between
    them is ever rewritten. Alignment environments keep & legal in text.
    """
    segments: list[Segment] = []
    buf: list[str] = []
    math_depth = 0
    verbatim_stack: list[str] = []
    amp_depth = 0
    inline_dollar = False
    display_dollar = False

    def mode() -> str:
        if verbatim_stack:
            return "skip"
        if math_depth > 0 or inline_dollar or display_dollar:
            return "math"
        return "text"

    def amp_ok() -> bool:
        return mode() == "math" or amp_depth > 0

    def flush() -> None:
        if buf:
            segments.append(Segment(mode(), amp_ok(), "".join(buf)))
            buf.clear()

    def emit_raw(text: str) -> None:
        flush()
        segments.append(Segment("skip", True, text))

    i = 0
    n = len(tex)
    while i < n:
        ch = tex[i]
        if verbatim_stack:
            # consume verbatim content as-is until the matching \end
            closer = "\\end{" + verbatim_stack[-1] + "}"
            end = tex.find(closer, i)
            if end == -1:
                emit_raw(tex[i:])
                break
            emit_raw(tex[i:end] + closer)
            verbatim_stack.pop()
            i = end + len(closer)
            continue
        if ch == "\\":
            env = _ENV_NAME.match(tex, i)
            if env:
                kind, name = env.group(1), env.group(2)
                emit_raw(env.group(0))
                if kind == "begin":
                    if name in VERBATIM_ENVS:
                        verbatim_stack.append(name)
                    elif name in MATH_ENVS:
                        math_depth += 1
                    elif name in AMP_TEXT_ENVS:
                        amp_depth += 1
                else:
                    if name in MATH_ENVS and math_depth > 0:
                        math_depth -= 1
                    elif name in AMP_TEXT_ENVS and amp_depth > 0:
                        amp_depth -= 1
                i = env.end()
                continue
            if tex.startswith("\\verb", i):
                j = i + 5
                if j < n and tex[j] == "*":
                    j += 1
                if j < n:
                    delim = tex[j]
                    close = tex.find(delim, j + 1)
                    if close != -1:
                        emit_raw(tex[i:close + 1])
                        i = close + 1
                        continue
            command = re.match(r"\\([a-zA-Z]+)\*?", tex[i:])
            if command and command.group(1) in RAW_ARG_COMMANDS | {"href"}:
                j = i + command.end()
                while j < n and tex[j] in " \t":
                    j += 1
                if j < n and tex[j] == "[":
                    depth = 1
                    j += 1
                    while j < n and depth:
                        depth += {"[": 1, "]": -1}.get(tex[j], 0)
                        j += 1
                if j < n and tex[j] == "{":
                    depth = 1
                    j += 1
                    while j < n and depth:
                        depth += {"{": 1, "}": -1}.get(tex[j], 0)
                        j += 1
                emit_raw(tex[i:j])
                i = j
                continue
            if tex.startswith("\\(", i):
                emit_raw("\\(")
                inline_dollar = True
                i += 2
                continue
            if tex.startswith("\\)", i):
                emit_raw("\\)")
                inline_dollar = False
                i += 2
                continue
            if tex.startswith("\\[", i):
                emit_raw("\\[")
                math_depth += 1
                i += 2
                continue
            if tex.startswith("\\]", i):
                emit_raw("\\]")
                if math_depth > 0:
                    math_depth -= 1
                i += 2
                continue
            if command:
                emit_raw(command.group(0))
                i += command.end()
                continue
            # escaped single character, e.g. \& or \\
            emit_raw(tex[i:i + 2])
            i += 2
            continue
        if ch == "$":
            if tex.startswith("$$", i):
                emit_raw("$$")
                display_dollar = not display_dollar
                i += 2
                continue
            emit_raw("$")
            inline_dollar = not inline_dollar
            i += 1
            continue
        buf.append(ch)
        i += 1
    flush()
    return segments


# --- escape pass -------------------------------------------------------------

_ESCAPE_IDS = {"&": "escape_amp", "%": "escape_percent", "#": "escape_hash", "_": "escape_underscore"}


def _escape_text(text: str, amp_ok: bool) -> tuple[str, set[str]]:
    out: list[str] = []
    applied: set[str] = set()
    for ch in text:
        if ch in _ESCAPE_IDS and not (ch == "&" and amp_ok):
            out.append("\\" + ch)
            applied.add(_ESCAPE_IDS[ch])
        else:
            out.append(ch)
    return "".join(out), applied


# --- unicode pass ------------------------------------------------------------

_MATH_TOKEN = re.compile(r"\d+(?:\.\d+)?|[A-Za-z]|[+\-=/^()<>|,]")


def _is_math_run_token(token: str) -> bool:
    return token in MATH_SYMBOLS or bool(_MATH_TOKEN.fullmatch(token))


def _unicode_in_math(text: str) -> tuple[str, set[str], list[str]]:
    out: list[str] = []
    applied: set[str] = set()
    unknown: list[str] = []
    for ch in text:
        if ch in MATH_SYMBOLS:
            out.append(MATH_SYMBOLS[ch] + " ")
            applied.add("unicode_math")
        elif ch in TEXT_REPLACEMENTS:
            replacement, rule = TEXT_REPLACEMENTS[ch]
            out.append(replacement)
            applied.add(rule)
        elif ord(ch) > 127:
            unknown.append(ch)
            out.append(ch)
        else:
            out.append(ch)
    return "".join(out), applied, unknown


def _unicode_in_text(text: str) -> tuple[str, set[str], list[str]]:
    applied: set[str] = set()
    for ch, (replacement, rule) in TEXT_REPLACEMENTS.items():
        if ch in text:
            text = text.replace(ch, replacement)
            applied.add(rule)

    if not any(ch in MATH_SYMBOLS for ch in text):
        unknown = [ch for ch in text if ord(ch) > 127]
        return text, applied, unknown

    # Wrap each symbol-bearing run of math-ish tokens in one inline-math
    # span ("γ ≤ 1" -> "$\gamma \le 1$"); runs without symbols and all
    # other prose keep their original spacing.
    out: list[str] = []
    run_tokens: list[str] = []
    run_seps: list[str] = []
    pending_ws = ""

    def flush_run() -> None:
        nonlocal run_tokens, run_seps
        if not run_tokens:
            return
        if any(tok in MATH_SYMBOLS for tok in run_tokens):
            applied.add("unicode_math")
            out.append("$" + " ".join(MATH_SYMBOLS.get(t, t) for t in run_tokens) + "$")
        else:
            parts = [run_tokens[0]]
            for sep, tok in zip(run_seps, run_tokens[1:]):
                parts.extend((sep, tok))
            out.append("".join(parts))
        run_tokens = []
        run_seps = []

    for piece in re.split(r"(\s+)", text):
        if not piece:
            continue
        if piece.isspace():
            if run_tokens:
                pending_ws += piece
            else:
                out.append(piece)
            continue
        core = piece.rstrip(".,;:!?")
        trail = piece[len(core):]
        if core and _is_math_run_token(core):
            if run_tokens:
                run_seps.append(pending_ws or " ")
            pending_ws = ""
            run_tokens.append(core)
            if trail:
                flush_run()
                out.append(trail)
            continue
        flush_run()
        if pending_ws:
            out.append(pending_ws)
            pending_ws = ""
        if any(ch in MATH_SYMBOLS for ch in piece):
            applied.add("unicode_math")
            out.append(
                "".join(f"${MATH_SYMBOLS[ch]}$" if ch in MATH_SYMBOLS else ch for ch in piece)
            )
        else:
            out.append(piece)
    flush_run()
    if pending_ws:
        out.append(pending_ws)

    result = "".join(out)
    unknown = [ch for ch in result if ord(ch) > 127 and ch not in MATH_SYMBOLS]
    return result, applied, unknown


# --- entry point -------------------------------------------------------------

def sanitize(tex: str) -> SanitizeResult:
    """Apply the three rule categories; pure rewrite, idempotent."""
    applied: list[str] = []
    unknown: list[str] = []

    tex, fragile_changed = _tag_fragile(tex)
    if fragile_changed:
        applied.append("fragile_tag")

    seen: set[str] = set()
    rebuilt: list[str] = []
    for segment in split_segments(tex):
        if segment.mode == "skip":
            rebuilt.append(segment.text)
            continue
        text = segment.text
        if segment.mode == "text":
            text, escape_ids = _escape_text(text, segment.amp_ok)
            seen |= escape_ids
            text, unicode_ids, unknown_here = _unicode_in_text(text)
        else:
            text, unicode_ids, unknown_here = _unicode_in_math(text)
        seen |= unicode_ids
        unknown.extend(unknown_here)
        rebuilt.append(text)

    ordered = [r.rule_id for r in RULES if r.rule_id in seen]
    applied.extend(ordered)
    return SanitizeResult(tex="".join(rebuilt), applied=applied, unknown_unicode=sorted(set(unknown)))
