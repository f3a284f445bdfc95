"""Pause-based segmentation of a session into a numbered snapshot sequence."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .events import EventKind, Session, SessionKey
from .replay import CodeState, states_at

DEFAULT_THRESHOLD_MS = 300_000  # five minutes of inactivity


class SnapshotReason(str, Enum):
    first = "first"
    pre_break = "pre_break"
    final = "final"


@dataclass(frozen=True, slots=True)
class GapInfo:
    """Idle time between one event and the next, keyed by the earlier event."""

    after_event_index: int
    gap_ms: int


@dataclass(frozen=True, slots=True)
class Snapshot:
    step_index: int
    state: CodeState
    reason: SnapshotReason
    following_gap_ms: int | None = None


@dataclass(frozen=True)
class SnapshotSequence:
    key: SessionKey
    threshold_ms: int
    snapshots: tuple[Snapshot, ...]

    @property
    def step_count(self) -> int:
        return len(self.snapshots)

    @property
    def final_text(self) -> str:
        return self.snapshots[-1].state.text


@dataclass(frozen=True, slots=True)
class ProcessMetrics:
    active_time_ms: int
    event_count: int
    inserted_chars: int
    deleted_chars: int
    snapshot_count: int


def gaps(session: Session) -> list[GapInfo]:
    """Inter-event gaps in order; event indices are 1-based."""
    return [
        GapInfo(after_event_index=i, gap_ms=b.ts_ms - a.ts_ms)
        for i, (a, b) in enumerate(zip(session.events, session.events[1:]), start=1)
    ]


def extract_snapshots(
    session: Session,
    threshold_ms: int = DEFAULT_THRESHOLD_MS,
    *,
    dedup: bool = False,
) -> SnapshotSequence:
    """Snapshot the document around every pause of at least threshold_ms.

    The snapshot set is the state after the first event, the state before
    each qualifying pause (gap >= threshold_ms), and the final state, in
    event order and numbered from 1.  With dedup on, a snapshot whose text
    repeats its predecessor's is dropped; the final snapshot is never
    dropped and instead replaces an equal predecessor.
    """
    if threshold_ms <= 0:
        raise ValueError(f"threshold_ms must be positive, got {threshold_ms}")
    n = session.event_count
    ts = [e.ts_ms for e in session.events]
    indices = {1, n}
    for i in range(n - 1):
        if ts[i + 1] - ts[i] >= threshold_ms:
            indices.add(i + 1)  # 1-based index of the event before the pause
    ordered = sorted(indices)
    states = states_at(session, ordered)

    raw: list[Snapshot] = []
    for idx, state in zip(ordered, states):
        if idx == n:
            reason = SnapshotReason.final
        elif idx == 1:
            reason = SnapshotReason.first
        else:
            reason = SnapshotReason.pre_break
        following = ts[idx] - ts[idx - 1] if idx < n else None
        raw.append(
            Snapshot(step_index=0, state=state, reason=reason, following_gap_ms=following)
        )

    if dedup:
        kept: list[Snapshot] = []
        for snap in raw:
            if kept and snap.state.text == kept[-1].state.text:
                if snap.reason is SnapshotReason.final:
                    kept[-1] = snap
                continue
            kept.append(snap)
    else:
        kept = raw

    numbered = tuple(
        replace(snap, step_index=i) for i, snap in enumerate(kept, start=1)
    )
    return SnapshotSequence(key=session.key, threshold_ms=threshold_ms, snapshots=numbered)


def slice_steps(seq: SnapshotSequence, step_from: int, step_to: int) -> SnapshotSequence:
    """A contiguous step range of a sequence, renumbered from 1."""
    if not 1 <= step_from <= step_to <= seq.step_count:
        raise ValueError(
            f"step range {step_from}..{step_to} invalid for {seq.step_count} steps"
        )
    picked = seq.snapshots[step_from - 1 : step_to]
    numbered = tuple(replace(s, step_index=i) for i, s in enumerate(picked, start=1))
    return SnapshotSequence(key=seq.key, threshold_ms=seq.threshold_ms, snapshots=numbered)


def process_metrics(session: Session, threshold_ms: int = DEFAULT_THRESHOLD_MS) -> ProcessMetrics:
    """Coarse effort measures: active time excludes qualifying pauses."""
    active = 0
    for info in gaps(session):
        if info.gap_ms < threshold_ms:
            active += info.gap_ms
    inserted = sum(len(e.text) for e in session.events if e.kind is EventKind.insert)
    deleted = sum(len(e.text) for e in session.events if e.kind is EventKind.delete)
    return ProcessMetrics(
        active_time_ms=active,
        event_count=session.event_count,
        inserted_chars=inserted,
        deleted_chars=deleted,
        snapshot_count=extract_snapshots(session, threshold_ms).step_count,
    )


def snapshot_to_json_dict(snap: Snapshot) -> dict:
    return {
        "step_index": snap.step_index,
        "reason": snap.reason.value,
        "event_index": snap.state.event_index,
        "ts_ms": snap.state.ts_ms,
        "following_gap_ms": snap.following_gap_ms,
        "text": snap.state.text,
    }


def sequence_to_json_dict(seq: SnapshotSequence) -> dict:
    return {
        "session": seq.key.composed(),
        "subject_id": seq.key.subject_id,
        "assignment_id": seq.key.assignment_id,
        "file_path": seq.key.file_path,
        "threshold_ms": seq.threshold_ms,
        "step_count": seq.step_count,
        "snapshots": [snapshot_to_json_dict(s) for s in seq.snapshots],
    }
