"""Command-line interface.

Exit codes: 0 success, 1 data problems, 2 usage problems (including
unknown session keys).  Diagnostics go to stderr; results go to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import (
    CONFIG_ENV_VAR,
    ConfigError,
    ProjectConfig,
    find_config,
    load_config,
    load_sessions,
)
from .evaluation import EvaluationStore, RejectReason, Rubric
from .events import (
    ColumnMapping,
    CsvRowError,
    MappingError,
    ParseError,
    parse_jsonl,
    ingest_csv,
    serialize_jsonl,
    split_sessions,
    validate,
)
from .harness import (
    BatchPlan,
    CacheTransport,
    GenerationStatus,
    HttpTransport,
    MockTransport,
    RecordStore,
    generation_stats,
    run_batch,
)
from .prompts import TaskKind, build_prompt
from .replay import ReplayError, reconstruct_at
from .report import build_report, render_report_text
from .segmentation import extract_snapshots, sequence_to_json_dict, slice_steps


class CommandError(RuntimeError):
    def __init__(self, message: str, *, exit_code: int = 1, hint: str | None = None):
        super().__init__(message)
        self.exit_code = exit_code
        self.hint = hint


def _fail(message: str, *, exit_code: int = 1, hint: str | None = None) -> CommandError:
    return CommandError(message, exit_code=exit_code, hint=hint)


def _project(args) -> ProjectConfig:
    path = find_config(getattr(args, "config", None))
    try:
        return load_config(path)
    except ConfigError as exc:
        raise _fail(str(exc), hint=f"pass --config or set {CONFIG_ENV_VAR}") from exc


def _sessions(config: ProjectConfig):
    try:
        return load_sessions(config.events_dir)
    except (ParseError, ValueError) as exc:
        raise _fail(f"could not load sessions: {exc}") from exc


def _session_or_usage_error(sessions, key: str):
    if key not in sessions:
        known = ", ".join(sorted(sessions)) or "none"
        raise _fail(
            f"unknown session {key!r}", exit_code=2, hint=f"known sessions: {known}"
        )
    return sessions[key]


def _add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        help=f"project config file (default: ${CONFIG_ENV_VAR} or ./proclens.json)",
    )


def _handle_ingest(args) -> int:
    try:
        if args.csv:
            if not args.mapping:
                raise _fail("--csv requires --mapping", exit_code=2)
            mapping = ColumnMapping.from_file(args.mapping)
            events = ingest_csv(Path(args.csv).read_bytes(), mapping)
        else:
            events = parse_jsonl(Path(args.events).read_bytes())
    except FileNotFoundError as exc:
        raise _fail(f"input not found: {exc.filename}") from exc
    except (ParseError, MappingError, CsvRowError) as exc:
        raise _fail(str(exc)) from exc

    report = validate(events)
    for finding in report.warnings:
        print(f"warning: {finding.message}", file=sys.stderr)
    if not report.ok:
        for finding in report.errors:
            print(f"error: {finding.message}", file=sys.stderr)
        raise _fail(f"{len(report.errors)} validation error(s); nothing written")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sessions = split_sessions(events)
    for session in sessions:
        path = out_dir / f"{session.key.composed()}.jsonl"
        path.write_text(serialize_jsonl(session.events), encoding="utf-8")
    print(f"wrote {len(sessions)} session(s) to {out_dir}")
    return 0


def _handle_replay(args) -> int:
    if args.at < 1:
        raise _fail("--at is 1-based; the first event is --at 1", exit_code=2)
    config = _project(args)
    sessions = _sessions(config)
    session = _session_or_usage_error(sessions, args.session)
    try:
        state = reconstruct_at(session, args.at)
    except (ReplayError, ValueError) as exc:
        raise _fail(str(exc)) from exc
    sys.stdout.write(state.text)
    if state.text and not state.text.endswith("\n"):
        sys.stdout.write("\n")
    return 0


def _handle_snapshots(args) -> int:
    config = _project(args)
    sessions = _sessions(config)
    session = _session_or_usage_error(sessions, args.session)
    seq = extract_snapshots(
        session, args.threshold or config.threshold_ms, dedup=args.dedup
    )
    print(json.dumps(sequence_to_json_dict(seq), ensure_ascii=False, indent=2))
    return 0


def _handle_render_prompt(args) -> int:
    config = _project(args)
    sessions = _sessions(config)
    session = _session_or_usage_error(sessions, args.session)
    if args.handout:
        handout = Path(args.handout).read_text(encoding="utf-8")
    else:
        path = config.handouts_dir / f"{session.assignment_id}.txt"
        if not path.exists():
            raise _fail(
                f"no handout for assignment {session.assignment_id!r}",
                hint=f"expected {path}, or pass --handout",
            )
        handout = path.read_text(encoding="utf-8")
    seq = extract_snapshots(session, args.threshold or config.threshold_ms)
    if args.step_from or args.step_to:
        try:
            seq = slice_steps(seq, args.step_from or 1, args.step_to or seq.step_count)
        except ValueError as exc:
            raise _fail(str(exc), exit_code=2) from exc
    bundle = build_prompt(TaskKind(args.task), handout, seq)
    if args.out:
        Path(args.out).write_text(bundle.prompt_text, encoding="utf-8")
        print(
            f"wrote {bundle.estimated_tokens} estimated tokens "
            f"({bundle.step_count} steps) to {args.out}"
        )
    else:
        sys.stdout.write(bundle.prompt_text)
    return 0


def _transport_for(args, config: ProjectConfig, store: RecordStore):
    if getattr(args, "mock", False):
        kind = "mock"
    elif getattr(args, "cache", False):
        kind = "cache"
    else:
        kind = config.transport
    if kind == "mock":
        return MockTransport()
    if kind == "cache":
        return CacheTransport(store)
    return HttpTransport()


def _handle_run(args) -> int:
    config = _project(args)
    sessions = _sessions(config)
    try:
        plan = BatchPlan.from_file(args.plan)
    except FileNotFoundError as exc:
        raise _fail(f"plan not found: {exc.filename}") from exc
    except (KeyError, ValueError) as exc:
        raise _fail(f"bad plan file: {exc}") from exc
    store = RecordStore(config.records_dir)
    handouts = None
    if not plan.handouts_dir:
        handouts = {
            p.stem: p.read_text(encoding="utf-8")
            for p in sorted(config.handouts_dir.glob("*.txt"))
        }
    try:
        records = run_batch(
            plan,
            store,
            sessions=sessions,
            model_configs=config.model_configs,
            transport=_transport_for(args, config, store),
            handouts=handouts,
        )
    except ValueError as exc:
        raise _fail(str(exc)) from exc
    errors = sum(1 for r in records if r.status is GenerationStatus.error)
    print(generation_stats(records).render())
    if errors:
        print(f"{errors} of {len(records)} item(s) ended in error", file=sys.stderr)
    return 0


def _handle_stats(args) -> int:
    config = _project(args)
    records = RecordStore(config.records_dir).list_records()
    if not records:
        print("no records yet")
        return 0
    print(generation_stats(records).render())
    return 0


def _prompt_line(prompt: str) -> str | None:
    try:
        return input(prompt)
    except EOFError:
        return None


def _handle_evaluate(args) -> int:
    config = _project(args)
    store = RecordStore(config.records_dir)
    evaluations = EvaluationStore(config.evaluations_dir, records=store)
    records = [r for r in store.list_records() if r.status is GenerationStatus.ok]
    if args.record:
        records = [r for r in records if r.record_id == args.record]
        if not records:
            raise _fail(f"unknown record {args.record!r}", exit_code=2)
    if args.record:
        pending = records
    else:
        pending = [
            r for r in records if evaluations.current(r.record_id, args.rater) is None
        ]
    rated = 0
    for record in pending:
        print(f"\n=== {record.record_id} ===")
        print(record.response_text)
        answer = _prompt_line("acceptable? [y/n/q] ")
        if answer is None or answer.strip().lower() == "q":
            break
        acceptable = answer.strip().lower().startswith("y")
        reject_reason = None
        if not acceptable:
            raw = _prompt_line(
                f"reason ({'/'.join(r.value for r in RejectReason)}): "
            )
            if raw is None:
                break
            raw = raw.strip() or "other"
            try:
                reject_reason = RejectReason(raw)
            except ValueError:
                reject_reason = RejectReason.other
        rubric = None
        raw = _prompt_line("scores hallucinations,focus,specificity,correctness,utility (blank to skip): ")
        if raw and raw.strip():
            try:
                values = [int(v) for v in raw.split(",")]
                rubric = Rubric(*values)
            except (ValueError, TypeError) as exc:
                print(f"skipping rubric: {exc}", file=sys.stderr)
        raw = _prompt_line("themes (comma separated, blank for none): ")
        themes = tuple(t.strip() for t in raw.split(",") if t.strip()) if raw else ()
        notes = _prompt_line("notes: ") or ""
        evaluations.record_rating(
            record.record_id,
            args.rater,
            acceptable=acceptable,
            reject_reason=reject_reason,
            rubric=rubric,
            themes=themes,
            notes=notes,
        )
        rated += 1
    print(f"\nrecorded {rated} rating(s) for {args.rater}")
    return 0


def _handle_report(args) -> int:
    config = _project(args)
    store = RecordStore(config.records_dir)
    evaluations = EvaluationStore(config.evaluations_dir, records=store)
    report = build_report(store.list_records(), evaluations.all_current())
    if args.json:
        print(json.dumps(report, ensure_ascii=False, indent=2))
    else:
        print(render_report_text(report))
    return 0


def _handle_serve(args) -> int:
    from .service import serve

    config = _project(args)
    serve(config, port=args.port, host=args.host)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proclens",
        description="Reconstruct and review programming processes from edit logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, validate, and split an event log")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--events", help="canonical JSONL event log")
    group.add_argument("--csv", help="vendor CSV export")
    p.add_argument("--mapping", help="column mapping file for --csv")
    p.add_argument("--out", required=True, help="directory for per-session files")
    p.set_defaults(handler=_handle_ingest)

    p = sub.add_parser("replay", help="print the document after the first N events")
    p.add_argument("--session", required=True)
    p.add_argument("--at", type=int, required=True, help="1-based event index")
    _add_config_flag(p)
    p.set_defaults(handler=_handle_replay)

    p = sub.add_parser("snapshots", help="print the snapshot sequence as JSON")
    p.add_argument("--session", required=True)
    p.add_argument("--threshold", type=int, help="pause threshold in ms")
    p.add_argument("--dedup", action="store_true", help="drop repeated texts")
    _add_config_flag(p)
    p.set_defaults(handler=_handle_snapshots)

    p = sub.add_parser("render-prompt", help="render a task prompt for a session")
    p.add_argument("--session", required=True)
    p.add_argument("--task", required=True, choices=[t.value for t in TaskKind])
    p.add_argument("--handout", help="handout file (default: by assignment id)")
    p.add_argument("--threshold", type=int, help="pause threshold in ms")
    p.add_argument("--step-from", type=int, dest="step_from")
    p.add_argument("--step-to", type=int, dest="step_to")
    p.add_argument("--out", help="write the prompt here instead of stdout")
    _add_config_flag(p)
    p.set_defaults(handler=_handle_render_prompt)

    p = sub.add_parser("run", help="run a generation plan")
    p.add_argument("--plan", required=True, help="plan file (JSON)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--mock", action="store_true", help="use the mock transport")
    group.add_argument("--cache", action="store_true", help="replay cached responses")
    _add_config_flag(p)
    p.set_defaults(handler=_handle_run)

    p = sub.add_parser("stats", help="per-model stats over stored records")
    _add_config_flag(p)
    p.set_defaults(handler=_handle_stats)

    p = sub.add_parser("evaluate", help="rate stored responses interactively")
    p.add_argument("--rater", required=True)
    p.add_argument("--record", help="rate one specific record id")
    _add_config_flag(p)
    p.set_defaults(handler=_handle_evaluate)

    p = sub.add_parser("report", help="aggregate report over records and ratings")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")
    _add_config_flag(p)
    p.set_defaults(handler=_handle_report)

    p = sub.add_parser("serve", help="start the local review service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    _add_config_flag(p)
    p.set_defaults(handler=_handle_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except CommandError as exc:
        print(f"proclens: error: {exc}", file=sys.stderr)
        if exc.hint:
            print(f"proclens: hint: {exc.hint}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
