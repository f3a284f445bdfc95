"""Deterministic reconstruction of document states from edit events.

`apply` is the single-step contract: a pure function from (document, event)
to document.  `Replayer` is the engine used for whole sessions; it keeps the
text in a gap buffer so long runs of localized edits cost far less than
re-splicing a string per event, while producing byte-identical states.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .events import EditEvent, EventKind, Session


class ReplayError(Exception):
    """An event could not be applied to the current document state."""

    def __init__(self, message: str, seq: int | None = None):
        super().__init__(message)
        self.seq = seq


class OffsetOutOfBounds(ReplayError):
    def __init__(self, seq: int | None, offset: int, length: int, doc_length: int):
        self.offset = offset
        self.length = length
        self.doc_length = doc_length
        super().__init__(
            f"offset {offset} (length {length}) out of bounds for document "
            f"of length {doc_length}" + (f" at seq {seq}" if seq is not None else ""),
            seq,
        )


class DeleteMismatch(ReplayError):
    """The document slice a delete event names is not what the event says."""

    def __init__(self, seq: int | None, offset: int, expected: str, found: str):
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(
            f"delete at offset {offset} expected event text {expected!r} "
            f"but document holds {found!r}"
            + (f" at seq {seq}" if seq is not None else ""),
            seq,
        )


@dataclass(frozen=True, slots=True)
class Document:
    """An immutable text state.  Length counts Unicode scalar values."""

    text: str = ""

    @property
    def length(self) -> int:
        return len(self.text)


@dataclass(frozen=True, slots=True)
class CodeState:
    """Document text as it stood after applying a 1-based event prefix."""

    text: str
    event_index: int
    ts_ms: int


def apply(doc: Document, event: EditEvent, *, strict: bool = True) -> Document:
    """Apply one event to a document, returning the new document.

    Inserts require 0 <= offset <= length; deletes require the deleted range
    to lie inside the document and, in strict mode (the default), the slice
    to equal the event's recorded text.
    """
    text = doc.text
    n = len(text)
    if event.kind is EventKind.insert:
        if event.offset > n:
            raise OffsetOutOfBounds(event.seq, event.offset, len(event.text), n)
        return Document(text[: event.offset] + event.text + text[event.offset :])
    end = event.offset + len(event.text)
    if end > n:
        raise OffsetOutOfBounds(event.seq, event.offset, len(event.text), n)
    found = text[event.offset : end]
    if strict and found != event.text:
        raise DeleteMismatch(event.seq, event.offset, event.text, found)
    return Document(text[: event.offset] + text[end:])


def invert(event: EditEvent) -> EditEvent:
    """The event that undoes `event`: inserts and deletes swap kinds."""
    other = EventKind.delete if event.kind is EventKind.insert else EventKind.insert
    return replace(event, kind=other)


class _GapBuffer:
    """Mutable text with a movable gap; edits near the gap are cheap.

    All index arithmetic is in Unicode scalar values.  Slice assignments do
    the heavy lifting at C speed; only bookkeeping happens per call.
    """

    __slots__ = ("_buf", "_gs", "_ge")

    def __init__(self, text: str = ""):
        self._buf: list[str] = list(text)
        self._buf.extend([""] * 64)
        self._gs = len(text)
        self._ge = len(self._buf)

    def __len__(self) -> int:
        return len(self._buf) - (self._ge - self._gs)

    def _move(self, pos: int) -> None:
        buf, gs, ge = self._buf, self._gs, self._ge
        if pos < gs:
            d = gs - pos
            buf[ge - d : ge] = buf[pos:gs]
            self._gs = pos
            self._ge = ge - d
        elif pos > gs:
            d = pos - gs
            buf[gs:pos] = buf[ge : ge + d]
            self._gs = pos
            self._ge = ge + d

    def insert(self, pos: int, text: str) -> None:
        self._move(pos)
        n = len(text)
        gap = self._ge - self._gs
        if gap < n:
            grow = max(n - gap, min(len(self._buf), 1 << 20), 64)
            self._buf[self._ge : self._ge] = [""] * grow
            self._ge += grow
        self._buf[self._gs : self._gs + n] = text
        self._gs += n

    def delete(self, pos: int, length: int) -> str:
        # Caller checks bounds; the removed text is returned for validation
        # and the buffer is untouched until the caller commits.
        self._move(pos)
        return "".join(self._buf[self._ge : self._ge + length])

    def commit_delete(self, length: int) -> None:
        self._ge += length

    def text(self) -> str:
        return "".join(self._buf[: self._gs]) + "".join(self._buf[self._ge :])


class Replayer:
    """Applies a session's events in order and exposes the current text.

    Strict mode (default) verifies every delete against the recorded text;
    lenient mode checks bounds only.
    """

    def __init__(self, initial_text: str = "", *, strict: bool = True):
        self._doc = _GapBuffer(initial_text)
        self._strict = strict
        self.applied = 0
        self.last_ts_ms: int | None = None

    @property
    def length(self) -> int:
        return len(self._doc)

    def text(self) -> str:
        return self._doc.text()

    def apply_event(self, event: EditEvent) -> None:
        doc = self._doc
        n = len(doc)
        if event.kind is EventKind.insert:
            if event.offset > n:
                raise OffsetOutOfBounds(event.seq, event.offset, len(event.text), n)
            doc.insert(event.offset, event.text)
        else:
            length = len(event.text)
            if event.offset + length > n:
                raise OffsetOutOfBounds(event.seq, event.offset, length, n)
            found = doc.delete(event.offset, length)
            if self._strict and found != event.text:
                raise DeleteMismatch(event.seq, event.offset, event.text, found)
            doc.commit_delete(length)
        self.applied += 1
        self.last_ts_ms = event.ts_ms

    def apply_all(self, events: Iterable[EditEvent]) -> None:
        for event in events:
            self.apply_event(event)


def reconstruct_at(session: Session, event_index: int, *, strict: bool = True) -> CodeState:
    """The document state after the first `event_index` events (1-based)."""
    n = session.event_count
    if not 1 <= event_index <= n:
        raise ValueError(f"event index {event_index} out of range 1..{n}")
    engine = Replayer(strict=strict)
    for event in session.events[:event_index]:
        engine.apply_event(event)
    return CodeState(
        text=engine.text(),
        event_index=event_index,
        ts_ms=session.events[event_index - 1].ts_ms,
    )


def states_at(
    session: Session, event_indices: Sequence[int], *, strict: bool = True
) -> list[CodeState]:
    """States at several 1-based prefix lengths, computed in one sweep.

    Returned in the order given; indices must each be within the session.
    """
    n = session.event_count
    for idx in event_indices:
        if not 1 <= idx <= n:
            raise ValueError(f"event index {idx} out of range 1..{n}")
    wanted = sorted(set(event_indices))
    states: dict[int, CodeState] = {}
    engine = Replayer(strict=strict)
    cursor = 0
    for idx, event in enumerate(session.events, start=1):
        if cursor >= len(wanted):
            break
        engine.apply_event(event)
        if idx == wanted[cursor]:
            states[idx] = CodeState(text=engine.text(), event_index=idx, ts_ms=event.ts_ms)
            cursor += 1
    return [states[idx] for idx in event_indices]
