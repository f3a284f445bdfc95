"""Prompt construction: snapshot sequences rendered into task prompts.

Templates live as files under templates/ and are substituted, never edited
in code, so the exact prompt wording stays diffable and golden-testable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path

from .events import SessionKey
from .segmentation import SnapshotSequence

_TEMPLATE_DIR = Path(__file__).parent / "templates"

DEFAULT_RESERVE_TOKENS = 1024


class TaskKind(str, Enum):
    summary = "summary"
    feedback = "feedback"


@dataclass(frozen=True)
class PromptBundle:
    """A fully rendered prompt plus the identifiers that produced it."""

    task: TaskKind
    handout_id: str
    key: SessionKey
    prompt_text: str
    estimated_tokens: int
    step_count: int


@dataclass(frozen=True, slots=True)
class FitReport:
    estimated_tokens: int
    window_tokens: int
    reserve_tokens: int

    @property
    def fits(self) -> bool:
        return self.estimated_tokens + self.reserve_tokens <= self.window_tokens


def step_header(step_index: int) -> str:
    # Zero-padded to width 3; wider sequences widen on their own.
    return f"#####\nStep: {step_index:03d}\n#####\n"


def render_steps(seq: SnapshotSequence) -> str:
    """Render every snapshot as a numbered step block.

    Each block is the five-hash fence, the step header, the fence again,
    the snapshot text, and a blank line.  No timestamps appear anywhere.
    """
    parts = []
    for snap in seq.snapshots:
        parts.append(step_header(snap.step_index))
        parts.append(snap.state.text)
        parts.append("\n\n")
    return "".join(parts)


@lru_cache(maxsize=None)
def load_template(task: TaskKind) -> str:
    path = _TEMPLATE_DIR / f"{task.value}_prompt.txt"
    return path.read_text(encoding="utf-8")


def build_prompt(task: TaskKind, handout_text: str, seq: SnapshotSequence) -> PromptBundle:
    """Substitute the handout and rendered steps into the task template."""
    if not handout_text:
        raise ValueError("handout_text must be non-empty")
    if not seq.snapshots:
        raise ValueError("snapshot sequence is empty")
    template = load_template(TaskKind(task))
    # Split on the handout placeholder first so placeholder-like text inside
    # the handout itself is never substituted.
    head, tail = template.split("<handout>", 1)
    prompt_text = head + handout_text + tail.replace("<process data>", render_steps(seq))
    return PromptBundle(
        task=TaskKind(task),
        handout_id=seq.key.assignment_id,
        key=seq.key,
        prompt_text=prompt_text,
        estimated_tokens=estimate_tokens(prompt_text),
        step_count=seq.step_count,
    )


def estimate_tokens(text: str) -> int:
    """Upper-ish bound on tokens at four characters per token, rounded up."""
    return (len(text) + 3) // 4


def check_context_fit(
    bundle: PromptBundle, window_tokens: int, reserve_tokens: int = DEFAULT_RESERVE_TOKENS
) -> FitReport:
    """Will the prompt plus a response reserve fit the model's window?"""
    return FitReport(
        estimated_tokens=bundle.estimated_tokens,
        window_tokens=window_tokens,
        reserve_tokens=reserve_tokens,
    )
