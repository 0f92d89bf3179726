"""Operator command line: generate, resume, feedback, decide, evaluate,
report, serve.

Exit codes: 0 success, 1 domain error, 2 usage error. Flags override the
config file, which overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from courseforge.catalog import load_catalog
from courseforge.config import CliConfig, load_config
from courseforge.errors import CourseforgeError
from courseforge.metering import render_csv, render_markdown
from courseforge.model import CourseLevel, CourseSpec, ModeId
from courseforge.pipeline.engine import PipelineEngine
from courseforge.pipeline.state import CoPilotDecision, FeedbackNote, SubtaskId, load_state
from courseforge.review.aggregate import aggregate, format_score
from courseforge.review.parse import parse_review
from courseforge.review.prompts import build_review_prompt
from courseforge.review.rubric import OutputKind
from courseforge.review.sheets import Reviewer, export_sheets_csv, import_human_scores
from courseforge.util import utcnow_iso, write_json


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="courseforge",
        description="Generate, review, and score complete course packages.",
    )
    parser.add_argument("--config", type=Path, help="TOML or YAML config file")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--run-root", type=Path, dest="run_root_path")
    parser.add_argument("--base-url", dest="base_url")
    parser.add_argument("--model", dest="model_name")
    parser.add_argument("--slide-budget", type=int, dest="slide_budget")
    parser.add_argument("--latex-binary", dest="latex_binary")
    parser.add_argument("--no-latex", action="store_true", help="skip deck compilation")

    sub = parser.add_subparsers(dest="command", required=True)

    generate = sub.add_parser("generate", help="run the full pipeline for a course")
    generate.add_argument("course_title")
    generate.add_argument("--mode", default=None, help="autonomous | catalog_guided | feedback_guided | full_copilot")
    generate.add_argument("--catalog", type=Path, help="educator catalog (JSON or YAML)")
    generate.add_argument("--level", default="unspecified", choices=[l.value for l in CourseLevel])
    generate.add_argument("--topic-hint", default=None)
    generate.add_argument("--stop-after", default=None, help="halt after this subtask (for staged runs)")

    resume = sub.add_parser("resume", help="continue an interrupted run")
    resume.add_argument("run_id")

    feedback = sub.add_parser("feedback", help="rerun one subtask with a suggestion")
    feedback.add_argument("run_id")
    feedback.add_argument("--subtask", required=True)
    feedback.add_argument("--note", required=True)
    feedback.add_argument("--allow-stale-catalog", action="store_true")

    decide = sub.add_parser("decide", help="answer a co-pilot pause from the terminal")
    decide.add_argument("run_id")
    group = decide.add_mutually_exclusive_group(required=True)
    group.add_argument("--approve", action="store_true")
    group.add_argument("--modify", metavar="TEXT")
    group.add_argument("--guide", metavar="TEXT")

    evaluate = sub.add_parser("evaluate", help="score a run's outputs")
    evaluate.add_argument("run_id")
    group = evaluate.add_mutually_exclusive_group(required=True)
    group.add_argument("--reviewer", choices=["automated"])
    group.add_argument("--import-csv", type=Path, dest="import_csv")

    report = sub.add_parser("report", help="runtime/cost report for a run")
    report.add_argument("run_id")
    report.add_argument("--csv", action="store_true")

    serve = sub.add_parser("serve", help="start the HTTP gateway")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)

    return parser


def _config_from_args(args: argparse.Namespace) -> CliConfig:
    overrides = {
        key: getattr(args, key, None)
        for key in ("run_root_path", "base_url", "model_name", "slide_budget", "latex_binary")
    }
    if getattr(args, "no_latex", False):
        overrides["latex_enabled"] = False
    config = load_config(args.config, overrides)
    return config


def _print(args: argparse.Namespace, human: str, machine: Optional[dict] = None) -> None:
    if args.json and machine is not None:
        print(json.dumps(machine, indent=2, sort_keys=True))
    else:
        print(human)


def cmd_generate(args: argparse.Namespace, config: CliConfig) -> int:
    mode = ModeId.parse(args.mode) if args.mode else config.mode
    course = CourseSpec(
        course_title=args.course_title,
        level=CourseLevel(args.level),
        topic_hint=args.topic_hint,
        mode=mode,
    ).validate()
    catalog = load_catalog(args.catalog) if args.catalog else None
    stop_after = SubtaskId.parse(args.stop_after) if args.stop_after else None
    engine = PipelineEngine(config.engine_config())
    state = engine.start_run(course, catalog)
    package = engine.resume(state.run_id, stop_after=stop_after)
    if package is None:
        _print(args, f"run {state.run_id} stopped after {args.stop_after}",
               {"run_id": state.run_id, "stopped_after": args.stop_after})
        return 0
    summary = {
        "run_id": state.run_id,
        "chapters": len(package.chapters),
        "decks": len(package.decks),
        "mode": mode.value,
    }
    _print(
        args,
        f"run {state.run_id} complete: {len(package.chapters)} chapters, "
        f"{len(package.decks)} decks, mode {mode.value}",
        summary,
    )
    return 0


def cmd_resume(args: argparse.Namespace, config: CliConfig) -> int:
    engine = PipelineEngine(config.engine_config())
    package = engine.resume(args.run_id)
    _print(
        args,
        f"run {args.run_id} complete: {len(package.chapters)} chapters",
        {"run_id": args.run_id, "chapters": len(package.chapters)},
    )
    return 0


def cmd_feedback(args: argparse.Namespace, config: CliConfig) -> int:
    engine = PipelineEngine(config.engine_config())
    note = FeedbackNote(
        target_subtask=SubtaskId.parse(args.subtask),
        suggestion=args.note,
        author="human",
    )
    artifacts = engine.rerun_with_feedback(
        args.run_id, note, allow_stale_catalog=args.allow_stale_catalog
    )
    _print(
        args,
        f"reran {args.subtask}; updated artifacts: {', '.join(sorted(artifacts))}",
        {"run_id": args.run_id, "artifacts": artifacts},
    )
    return 0


def cmd_decide(args: argparse.Namespace, config: CliConfig) -> int:
    paths = PipelineEngine(config.engine_config()).paths_for(args.run_id)
    state = load_state(paths)
    if state.pending_pause is None:
        raise CourseforgeError(f"run {args.run_id} has no pending pause")
    if args.approve:
        decision = CoPilotDecision(action="approve")
    elif args.modify:
        decision = CoPilotDecision(action="modify", text=args.modify)
    else:
        decision = CoPilotDecision(action="guide", text=args.guide)
    entry = {"pause_id": state.pending_pause.pause_id, **decision.to_dict(), "at": utcnow_iso()}
    with paths.decisions_file.open("a", encoding="utf-8") as handle:
        handle.write(json.dumps(entry, sort_keys=True) + "\n")
    _print(
        args,
        f"recorded {decision.action} for pause after {state.pending_pause.subtask.value}",
        entry,
    )
    return 0


def cmd_evaluate(args: argparse.Namespace, config: CliConfig) -> int:
    engine = PipelineEngine(config.engine_config())
    paths = engine.paths_for(args.run_id)
    load_state(paths)  # errors early on unknown run
    if args.import_csv:
        sheets = import_human_scores(args.import_csv)
        label = "human"
    else:
        from courseforge.agents.gateway import ChatGateway

        gateway = ChatGateway(
            base_url=config.base_url,
            model_name=config.model_name,
            api_key_env_name=config.api_key_env_name,
            transport=engine.config.transport,
        )
        try:
            messages = build_review_prompt(list(OutputKind), paths, persona="RubricReviewer")
            reply = gateway.complete(messages, config.sampling, subtask="evaluation")
        finally:
            gateway.close()
        sheets = [parse_review(reply.content, Reviewer(kind="automated", ident=config.model_name))]
        label = "automated"

    result = aggregate(sheets)
    export_sheets_csv(sheets, paths.reports_dir / f"scores_{label}.csv")
    write_json(
        paths.reports_dir / f"scores_{label}.json",
        {
            "kind_means": {k.value: format_score(v) for k, v in result.kind_means.items()},
            "overall": format_score(result.overall),
            "sheets": [s.to_dict() for s in sheets],
        },
    )
    lines = [f"{k.value}: {format_score(result.kind_means[k])}" for k in OutputKind]
    lines.append(f"overall: {format_score(result.overall)}")
    _print(
        args,
        "\n".join(lines),
        {
            "kind_means": {k.value: format_score(result.kind_means[k]) for k in OutputKind},
            "overall": format_score(result.overall),
        },
    )
    return 0


def cmd_report(args: argparse.Namespace, config: CliConfig) -> int:
    engine = PipelineEngine(config.engine_config())
    report = engine.report(args.run_id, config.cost_table())
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    elif args.csv:
        print(render_csv(report), end="")
    else:
        print(render_markdown(report), end="")
    return 0


def cmd_serve(args: argparse.Namespace, config: CliConfig) -> int:
    import uvicorn

    from courseforge.service import create_app

    host = args.host or config.server_host
    port = args.port or config.server_port
    app = create_app(config)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "resume": cmd_resume,
    "feedback": cmd_feedback,
    "decide": cmd_decide,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
    "serve": cmd_serve,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        return _COMMANDS[args.command](args, config)
    except CourseforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
