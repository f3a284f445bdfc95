from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from proclens import EditEvent, EventKind, Session

GOLDEN_DIR = Path(__file__).parent / "golden"

SUBJECTS = ("S1", "S2", "S3", "S4", "S5")
ASSIGNMENTS = ("fluky", "zoo", "pyramid")


def make_event(
    *,
    seq: int,
    ts_ms: int,
    kind: str,
    offset: int,
    text: str,
    subject_id: str = "S1",
    assignment_id: str = "fluky",
    file_path: str = "main.py",
) -> EditEvent:
    return EditEvent(
        seq=seq,
        subject_id=subject_id,
        assignment_id=assignment_id,
        file_path=file_path,
        ts_ms=ts_ms,
        kind=EventKind(kind),
        offset=offset,
        text=text,
    )


def make_session(events) -> Session:
    first = events[0]
    return Session(
        subject_id=first.subject_id,
        assignment_id=first.assignment_id,
        file_path=first.file_path,
        events=tuple(events),
    )


# Alphabet mixes ASCII with multi-byte and astral characters so offset
# arithmetic is exercised in scalar values, not bytes.
ALPHABET = "abcdefghij XY\n(){}=+*'éα\U0001f40d"


def random_session(
    rng: random.Random,
    n_events: int,
    *,
    subject_id: str = "S1",
    assignment_id: str = "rand",
    file_path: str = "main.py",
    insert_bias: float = 0.7,
    max_chunk: int = 6,
    big_gap_rate: float = 0.02,
    near_gap_rate: float = 0.0,
    threshold_ms: int = 300_000,
) -> Session:
    """A structurally valid random session; deletes match the document."""
    doc: list[str] = []
    events = []
    ts = rng.randrange(0, 10_000)
    for seq in range(1, n_events + 1):
        if not doc or rng.random() < insert_bias:
            offset = rng.randint(0, len(doc))
            text = "".join(
                rng.choice(ALPHABET) for _ in range(rng.randint(1, max_chunk))
            )
            doc[offset:offset] = text
            kind = EventKind.insert
        else:
            offset = rng.randint(0, len(doc) - 1)
            length = rng.randint(1, min(len(doc) - offset, max_chunk))
            text = "".join(doc[offset : offset + length])
            del doc[offset : offset + length]
            kind = EventKind.delete
        events.append(
            EditEvent(
                seq=seq,
                subject_id=subject_id,
                assignment_id=assignment_id,
                file_path=file_path,
                ts_ms=ts,
                kind=kind,
                offset=offset,
                text=text,
            )
        )
        roll = rng.random()
        if roll < big_gap_rate:
            ts += threshold_ms + rng.randrange(0, 200_000)
        elif roll < big_gap_rate + near_gap_rate:
            # Straddle the threshold to stress boundary handling.
            ts += threshold_ms + rng.randrange(-1_500, 1_500)
        else:
            ts += rng.randrange(0, 2_000)
    return make_session(events)


def typed_session(
    subject_id: str,
    assignment_id: str,
    lines: list[str],
    *,
    file_path: str = "main.py",
    seed: int = 0,
    pause_every: int = 2,
) -> Session:
    """Types a program line by line in small chunks, pausing now and then.

    A long pause (above the default threshold) lands after every
    `pause_every`-th line, so sessions have several snapshot points.
    """
    rng = random.Random(seed)
    events = []
    ts = rng.randrange(0, 5_000)
    seq = 0
    offset = 0
    for line_no, line in enumerate(lines, start=1):
        text = line + "\n"
        pos = 0
        while pos < len(text):
            chunk = text[pos : pos + rng.randint(1, 4)]
            seq += 1
            events.append(
                EditEvent(
                    seq=seq,
                    subject_id=subject_id,
                    assignment_id=assignment_id,
                    file_path=file_path,
                    ts_ms=ts,
                    kind=EventKind.insert,
                    offset=offset + pos,
                    text=chunk,
                )
            )
            pos += len(chunk)
            ts += rng.randrange(80, 400)
        offset += len(text)
        if line_no % pause_every == 0 and line_no != len(lines):
            ts += 300_000 + rng.randrange(0, 120_000)
    return make_session(events)


DEMO_PROGRAMS = {
    "fluky": [
        "n = int(input())",
        "for value in range(1, n + 1):",
        "    digits = str(value)",
        "    if digits.count('7') == 1:",
        "        print(value)",
    ],
    "zoo": [
        "animals = int(input())",
        "meals = int(input())",
        "total = animals * meals",
        "print('food needed:', total)",
    ],
    "pyramid": [
        "rows = int(input())",
        "for i in range(1, rows + 1):",
        "    print(' ' * (rows - i) + '*' * (2 * i - 1))",
    ],
}

HANDOUTS = {
    "fluky": (
        "Fluky numbers\n\n"
        "Read an integer n and print every number between 1 and n that "
        "contains exactly one digit 7, one per line."
    ),
    "zoo": (
        "Zoo food\n\n"
        "Read the number of animals and the meals each animal eats per day, "
        "then print the total number of meals needed."
    ),
    "pyramid": (
        "Number pyramid\n\n"
        "Read the number of rows and print a centered pyramid of stars with "
        "that many rows."
    ),
}


def demo_sessions() -> list[Session]:
    sessions = []
    for si, subject in enumerate(SUBJECTS):
        for ai, assignment in enumerate(ASSIGNMENTS):
            sessions.append(
                typed_session(
                    subject,
                    assignment,
                    DEMO_PROGRAMS[assignment],
                    seed=si * 10 + ai,
                )
            )
    return sessions


def write_demo_project(root: Path, *, models=None, transport: str = "mock") -> Path:
    """Lays out a full project (events, handouts, config) under `root`."""
    from proclens import serialize_jsonl

    events_dir = root / "events"
    handouts_dir = root / "handouts"
    events_dir.mkdir(parents=True, exist_ok=True)
    handouts_dir.mkdir(parents=True, exist_ok=True)
    for session in demo_sessions():
        path = events_dir / f"{session.key.composed()}.jsonl"
        path.write_text(serialize_jsonl(session.events), encoding="utf-8")
    for assignment, text in HANDOUTS.items():
        (handouts_dir / f"{assignment}.txt").write_text(text, encoding="utf-8")
    if models is None:
        models = [
            {"model_id": "alpha-large", "window_tokens": 200_000},
            {"model_id": "beta-chat", "window_tokens": 128_000},
            {"model_id": "gamma-70b", "window_tokens": 4_096},
        ]
    config = {
        "events_dir": "events",
        "handouts_dir": "handouts",
        "records_dir": "records",
        "evaluations_dir": "evaluations",
        "threshold_ms": 300_000,
        "models": models,
        "transport": transport,
    }
    config_path = root / "proclens.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return config_path


@pytest.fixture
def demo_config_path(tmp_path) -> Path:
    return write_demo_project(tmp_path)
