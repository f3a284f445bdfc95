"""Keystroke-level edit logs: the canonical event format, ingest, and validation.

An edit log is a flat sequence of single-edit events (one insert or delete
per event) tagged with who produced them and when.  Everything downstream
(replay, segmentation, prompt building) consumes the types defined here.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Mapping

CANONICAL_FIELDS = (
    "seq",
    "subject_id",
    "assignment_id",
    "file_path",
    "ts_ms",
    "kind",
    "offset",
    "text",
)

_STRING_FIELDS = ("subject_id", "assignment_id", "file_path")
_INT_FIELDS = ("seq", "ts_ms", "offset")


class EventKind(str, Enum):
    insert = "insert"
    delete = "delete"


class ParseError(ValueError):
    """A record in an event stream could not be turned into an event."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class MappingError(ValueError):
    """A column mapping is unusable before any row is read."""


class CsvRowError(ValueError):
    """A single CSV row could not be converted; carries row and column."""

    def __init__(self, message: str, row: int, column: str):
        super().__init__(message)
        self.row = row
        self.column = column


@dataclass(frozen=True, slots=True)
class SessionKey:
    """Identity of one editing stream: one subject, assignment, and file."""

    subject_id: str
    assignment_id: str
    file_path: str

    def composed(self) -> str:
        # Underscore-joined form used in record ids, filenames, and URLs.
        # Slashes in file paths are flattened so the key stays path-safe.
        return "_".join(
            (self.subject_id, self.assignment_id, self.file_path.replace("/", "__"))
        )


@dataclass(frozen=True, slots=True)
class EditEvent:
    """One atomic edit.  Offsets count Unicode scalar values from 0.

    Deletes carry the deleted text so the event stream is invertible and
    delete consistency can be checked during replay.
    """

    seq: int
    subject_id: str
    assignment_id: str
    file_path: str
    ts_ms: int
    kind: EventKind
    offset: int
    text: str

    def __post_init__(self) -> None:
        if not isinstance(self.kind, EventKind):
            raise ValueError(f"kind must be an EventKind, got {self.kind!r}")
        if self.offset < 0:
            raise ValueError(f"offset must be >= 0, got {self.offset}")
        if not self.text:
            raise ValueError("text must be non-empty")

    @property
    def key(self) -> SessionKey:
        return SessionKey(self.subject_id, self.assignment_id, self.file_path)


@dataclass(frozen=True)
class Session:
    """All events for one (subject, assignment, file), in replay order.

    Events are ordered by (ts_ms, seq); seq must be strictly increasing so
    equal timestamps keep their original log order.
    """

    subject_id: str
    assignment_id: str
    file_path: str
    events: tuple[EditEvent, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events:
            raise ValueError("a session must contain at least one event")
        for e in self.events:
            if e.key != self.key:
                raise ValueError(
                    f"event seq {e.seq} belongs to {e.key.composed()}, "
                    f"not {self.key.composed()}"
                )
        prev = self.events[0]
        for e in self.events[1:]:
            if e.ts_ms < prev.ts_ms:
                raise ValueError(f"events not ordered by time at seq {e.seq}")
            if e.seq <= prev.seq:
                raise ValueError(f"seq not strictly increasing at seq {e.seq}")
            prev = e

    @property
    def key(self) -> SessionKey:
        return SessionKey(self.subject_id, self.assignment_id, self.file_path)

    @property
    def event_count(self) -> int:
        return len(self.events)

    @property
    def span_ms(self) -> int:
        return self.events[-1].ts_ms - self.events[0].ts_ms


@dataclass(frozen=True, slots=True)
class Finding:
    seq: int
    code: str
    message: str


@dataclass
class ValidationReport:
    errors: list[Finding]
    warnings: list[Finding]
    counts: Counter

    @property
    def ok(self) -> bool:
        return not self.errors


def _require_str(value: object, name: str, line: int) -> str:
    if not isinstance(value, str):
        raise ParseError(f"invalid value for '{name}' at line {line}: {value!r}", line)
    return value


def _require_int(value: object, name: str, line: int) -> int:
    # bool is an int subclass; a true/false seq or offset is still malformed.
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"invalid value for '{name}' at line {line}: {value!r}", line)
    return value


def _event_from_record(record: Mapping[str, object], line: int) -> EditEvent:
    for name in CANONICAL_FIELDS:
        if name not in record:
            raise ParseError(f"missing required field '{name}' at line {line}", line)
    kind_raw = record["kind"]
    if kind_raw not in (EventKind.insert.value, EventKind.delete.value):
        raise ParseError(f"unknown kind at line {line}", line)
    try:
        return EditEvent(
            seq=_require_int(record["seq"], "seq", line),
            subject_id=_require_str(record["subject_id"], "subject_id", line),
            assignment_id=_require_str(record["assignment_id"], "assignment_id", line),
            file_path=_require_str(record["file_path"], "file_path", line),
            ts_ms=_require_int(record["ts_ms"], "ts_ms", line),
            kind=EventKind(kind_raw),
            offset=_require_int(record["offset"], "offset", line),
            text=_require_str(record["text"], "text", line),
        )
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"invalid record at line {line}: {exc}", line) from exc


def parse_jsonl(source: str | bytes | IO) -> list[EditEvent]:
    """Parse newline-delimited JSON event records.

    Accepts a string, UTF-8 bytes, or a file-like object.  Blank lines are
    skipped; unknown fields are ignored.  Raises ParseError carrying the
    1-based line number of the first bad record.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    events: list[EditEvent] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(
                f"malformed record at line {line_no}: {exc.msg}", line_no
            ) from exc
        if not isinstance(record, dict):
            raise ParseError(f"malformed record at line {line_no}: not an object", line_no)
        events.append(_event_from_record(record, line_no))
    return events


def serialize_jsonl(events: Iterable[EditEvent]) -> str:
    """Serialize events to the canonical newline-delimited JSON form."""
    lines = []
    for e in events:
        lines.append(
            json.dumps(
                {
                    "seq": e.seq,
                    "subject_id": e.subject_id,
                    "assignment_id": e.assignment_id,
                    "file_path": e.file_path,
                    "ts_ms": e.ts_ms,
                    "kind": e.kind.value,
                    "offset": e.offset,
                    "text": e.text,
                },
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


_PARSE_RULES = ("int", "string", "enum", "timestamp")


@dataclass(frozen=True)
class FieldRule:
    """How to produce one canonical field from a source CSV column."""

    column: str
    parse: str = "string"
    aliases: Mapping[str, str] | None = None
    timestamp_format: str | None = None

    def __post_init__(self) -> None:
        if self.parse not in _PARSE_RULES:
            raise MappingError(f"unknown parse rule {self.parse!r} for column {self.column!r}")
        if self.parse == "timestamp" and not self.timestamp_format:
            raise MappingError(f"timestamp rule for column {self.column!r} needs a format")


@dataclass(frozen=True)
class ColumnMapping:
    """Maps every canonical field to a source column and parse rule."""

    fields: Mapping[str, FieldRule]

    def __post_init__(self) -> None:
        object.__setattr__(self, "fields", dict(self.fields))
        unknown = set(self.fields) - set(CANONICAL_FIELDS)
        if unknown:
            raise MappingError(f"mapping names unknown fields: {sorted(unknown)}")
        missing = [name for name in CANONICAL_FIELDS if name not in self.fields]
        if missing:
            raise MappingError(f"mapping missing required field '{missing[0]}'")

    @classmethod
    def from_json_dict(cls, data: Mapping[str, object]) -> "ColumnMapping":
        fields = {}
        for name, raw in data.items():
            if isinstance(raw, str):
                fields[name] = FieldRule(column=raw)
            elif isinstance(raw, Mapping):
                fields[name] = FieldRule(
                    column=str(raw["column"]),
                    parse=str(raw.get("parse", "string")),
                    aliases=dict(raw["aliases"]) if raw.get("aliases") else None,
                    timestamp_format=raw.get("timestamp_format"),
                )
            else:
                raise MappingError(f"bad rule for field '{name}': {raw!r}")
        return cls(fields=fields)

    @classmethod
    def from_file(cls, path: Path | str) -> "ColumnMapping":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise MappingError("mapping file must hold a JSON object")
        return cls.from_json_dict(data)


def _parse_cell(rule: FieldRule, value: str, field: str, row: int) -> object:
    if rule.parse == "string":
        return value
    if rule.parse == "int":
        try:
            return int(value)
        except ValueError:
            raise CsvRowError(
                f"row {row}, column '{rule.column}': invalid integer {value!r}",
                row=row,
                column=rule.column,
            ) from None
    if rule.parse == "enum":
        mapped = rule.aliases.get(value, value) if rule.aliases else value
        if mapped not in (EventKind.insert.value, EventKind.delete.value):
            raise CsvRowError(
                f"row {row}, column '{rule.column}': unknown kind {value!r}",
                row=row,
                column=rule.column,
            )
        return mapped
    # timestamp: wall-clock string in the configured format, read as UTC
    try:
        dt = datetime.strptime(value, rule.timestamp_format)
    except ValueError:
        raise CsvRowError(
            f"row {row}, column '{rule.column}': timestamp {value!r} does not "
            f"match format {rule.timestamp_format!r}",
            row=row,
            column=rule.column,
        ) from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp() * 1000)


def ingest_csv(source: str | bytes | IO, mapping: ColumnMapping) -> list[EditEvent]:
    """Convert a vendor CSV export into canonical events via a column mapping.

    Mapping problems raise MappingError before any row is read; bad cells
    raise CsvRowError naming the 1-based data row and source column.
    """
    if isinstance(source, bytes):
        stream: IO = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        stream = io.StringIO(source)
    else:
        raw = source.read()
        stream = io.StringIO(raw.decode("utf-8") if isinstance(raw, bytes) else raw)
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    wanted = {rule.column for rule in mapping.fields.values()}
    absent = sorted(wanted - set(header))
    if absent:
        raise MappingError(f"mapped columns missing from CSV header: {absent}")
    events: list[EditEvent] = []
    for row_no, row in enumerate(reader, start=1):
        record: dict[str, object] = {}
        for field, rule in mapping.fields.items():
            cell = row.get(rule.column)
            if cell is None:
                raise CsvRowError(
                    f"row {row_no}, column '{rule.column}': cell missing",
                    row=row_no,
                    column=rule.column,
                )
            record[field] = _parse_cell(rule, cell, field, row_no)
        try:
            events.append(
                EditEvent(
                    seq=record["seq"],
                    subject_id=str(record["subject_id"]),
                    assignment_id=str(record["assignment_id"]),
                    file_path=str(record["file_path"]),
                    ts_ms=record["ts_ms"],
                    kind=EventKind(record["kind"]),
                    offset=record["offset"],
                    text=str(record["text"]),
                )
            )
        except ValueError as exc:
            raise CsvRowError(
                f"row {row_no}: {exc}", row=row_no, column=""
            ) from exc
    return events


def validate(events: Iterable[EditEvent]) -> ValidationReport:
    """Check a parsed event list for problems that would break replay.

    Timestamp regressions (in input order, per session) are warnings;
    duplicate sequence numbers and replay failures discovered by a trial
    replay are errors.  A session with zero errors replays end to end.
    """
    from . import replay  # deferred: replay depends on this module's types

    groups: dict[SessionKey, list[EditEvent]] = {}
    for e in events:
        groups.setdefault(e.key, []).append(e)

    errors: list[Finding] = []
    warnings: list[Finding] = []
    for key, group in groups.items():
        prev_ts = None
        seen: set[int] = set()
        for e in group:
            if prev_ts is not None and e.ts_ms < prev_ts:
                warnings.append(
                    Finding(e.seq, "non_monotone_ts", f"non-monotone timestamp at seq {e.seq}")
                )
            prev_ts = e.ts_ms
            if e.seq in seen:
                errors.append(Finding(e.seq, "duplicate_seq", f"duplicate seq {e.seq}"))
            seen.add(e.seq)

        engine = replay.Replayer()
        for e in sorted(group, key=lambda e: (e.ts_ms, e.seq)):
            try:
                engine.apply_event(e)
            except replay.OffsetOutOfBounds as exc:
                errors.append(
                    Finding(
                        e.seq,
                        "offset_out_of_bounds",
                        f"offset out of bounds at seq {e.seq}: "
                        f"offset {exc.offset} in document of length {exc.doc_length}",
                    )
                )
                break
            except replay.DeleteMismatch as exc:
                errors.append(
                    Finding(
                        e.seq,
                        "delete_mismatch",
                        f"delete text mismatch at seq {e.seq}: expected {exc.found!r}",
                    )
                )
                break

    counts: Counter = Counter(f.code for f in errors)
    counts.update(f.code for f in warnings)
    return ValidationReport(errors=errors, warnings=warnings, counts=counts)


def split_sessions(events: Iterable[EditEvent]) -> list[Session]:
    """Partition events into one Session per (subject, assignment, file)."""
    groups: dict[SessionKey, list[EditEvent]] = {}
    for e in events:
        groups.setdefault(e.key, []).append(e)
    sessions = []
    for key in sorted(groups, key=lambda k: (k.subject_id, k.assignment_id, k.file_path)):
        ordered = sorted(groups[key], key=lambda e: (e.ts_ms, e.seq))
        sessions.append(
            Session(
                subject_id=key.subject_id,
                assignment_id=key.assignment_id,
                file_path=key.file_path,
                events=tuple(ordered),
            )
        )
    return sessions


def deidentify_timing(session: Session, quantum_ms: int, threshold_ms: int) -> Session:
    """Blur keystroke rhythm while preserving pause structure.

    Gaps below threshold_ms are rounded up to a multiple of quantum_ms
    (capped below the threshold so no new pause appears); gaps at or above
    the threshold are kept exactly.  The first timestamp is preserved, so
    segmentation at the same threshold is unchanged.
    """
    if quantum_ms < 1:
        raise ValueError(f"quantum_ms must be >= 1, got {quantum_ms}")
    if threshold_ms <= quantum_ms:
        raise ValueError(
            f"threshold_ms must exceed quantum_ms, got {threshold_ms} <= {quantum_ms}"
        )
    cap = ((threshold_ms - 1) // quantum_ms) * quantum_ms
    out = [session.events[0]]
    new_ts = session.events[0].ts_ms
    for prev, cur in zip(session.events, session.events[1:]):
        gap = cur.ts_ms - prev.ts_ms
        if gap >= threshold_ms:
            blurred = gap
        else:
            blurred = ((gap + quantum_ms - 1) // quantum_ms) * quantum_ms
            if blurred >= threshold_ms:
                blurred = cap
        new_ts += blurred
        out.append(replace(cur, ts_ms=new_ts))
    return Session(
        subject_id=session.subject_id,
        assignment_id=session.assignment_id,
        file_path=session.file_path,
        events=tuple(out),
    )
