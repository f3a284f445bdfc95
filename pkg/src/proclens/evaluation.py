"""Human ratings of generated responses, agreement stats, and auto-checks."""

from __future__ import annotations

import json
import re
import threading
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .harness import GenerationRecord, GenerationStatus, RecordStore
from .segmentation import SnapshotSequence


class RejectReason(str, Enum):
    single_state_only = "single_state_only"
    generic_only = "generic_only"
    other = "other"


LIKERT_FIELDS = ("process_focus", "specificity", "correctness", "utility")


@dataclass(frozen=True, slots=True)
class Rubric:
    """Numeric scores beyond the binary acceptability call."""

    hallucination_count: int
    process_focus: int
    specificity: int
    correctness: int
    utility: int

    def __post_init__(self) -> None:
        if self.hallucination_count < 0:
            raise ValueError("hallucination_count must be >= 0")
        for name in LIKERT_FIELDS:
            value = getattr(self, name)
            if not 1 <= value <= 5:
                raise ValueError(f"{name} must be in 1..5, got {value}")

    def to_json_dict(self) -> dict:
        return {
            "hallucination_count": self.hallucination_count,
            "process_focus": self.process_focus,
            "specificity": self.specificity,
            "correctness": self.correctness,
            "utility": self.utility,
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, object]) -> "Rubric":
        return cls(
            hallucination_count=int(data["hallucination_count"]),
            process_focus=int(data["process_focus"]),
            specificity=int(data["specificity"]),
            correctness=int(data["correctness"]),
            utility=int(data["utility"]),
        )


@dataclass(frozen=True)
class EvaluationRecord:
    record_id: str
    rater_id: str
    acceptable: bool
    reject_reason: RejectReason | None = None
    rubric: Rubric | None = None
    themes: tuple[str, ...] = ()
    notes: str = ""
    created_ts: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "themes", tuple(self.themes))
        if not self.acceptable and self.reject_reason is None:
            raise ValueError("a rejected response needs a reject_reason")

    def to_json_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "rater_id": self.rater_id,
            "acceptable": self.acceptable,
            "reject_reason": self.reject_reason.value if self.reject_reason else None,
            "rubric": self.rubric.to_json_dict() if self.rubric else None,
            "themes": list(self.themes),
            "notes": self.notes,
            "created_ts": self.created_ts,
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, object]) -> "EvaluationRecord":
        return cls(
            record_id=str(data["record_id"]),
            rater_id=str(data["rater_id"]),
            acceptable=bool(data["acceptable"]),
            reject_reason=(
                RejectReason(data["reject_reason"]) if data.get("reject_reason") else None
            ),
            rubric=Rubric.from_json_dict(data["rubric"]) if data.get("rubric") else None,
            themes=tuple(data.get("themes", ())),
            notes=str(data.get("notes", "")),
            created_ts=str(data.get("created_ts", "")),
        )


# "step", any of space/colon/hash/hyphen between, then a decimal number.
_STEP_REF = re.compile(r"\bstep\b[\s:#-]*(\d+)", re.IGNORECASE)


def extract_step_refs(text: str) -> list[int]:
    """Step numbers a response mentions, in order, duplicates preserved."""
    return [int(m.group(1)) for m in _STEP_REF.finditer(text)]


@dataclass(frozen=True)
class AutoCheckReport:
    referenced_steps: tuple[int, ...]
    invalid_steps: tuple[int, ...]
    response_chars: int
    step_ref_density: float


def check_step_refs(text: str, step_count: int) -> AutoCheckReport:
    """Which steps a response cites, and which of those do not exist."""
    refs = extract_step_refs(text)
    invalid = tuple(r for r in refs if not 1 <= r <= step_count)
    chars = len(text)
    density = (len(refs) * 1000 / chars) if chars else 0.0
    return AutoCheckReport(
        referenced_steps=tuple(refs),
        invalid_steps=invalid,
        response_chars=chars,
        step_ref_density=density,
    )


def auto_checks(generation: GenerationRecord, seq: SnapshotSequence) -> AutoCheckReport:
    if generation.status is not GenerationStatus.ok:
        raise ValueError("auto checks need a successful generation")
    return check_step_refs(generation.response_text, seq.step_count)


@dataclass(frozen=True, slots=True)
class AgreementStats:
    n_items: int
    percent_agreement: float
    cohen_kappa: float


def acceptability_agreement(
    rater_a: Sequence[bool], rater_b: Sequence[bool]
) -> AgreementStats:
    """Percent agreement and Cohen's kappa over paired binary verdicts.

    Kappa is (p_o - p_e) / (1 - p_e); when both raters are constant on the
    same label (p_e = 1, which forces p_o = 1) the undefined ratio is
    reported as perfect agreement, 1.0.
    """
    if len(rater_a) != len(rater_b):
        raise ValueError("rater vectors must have equal length")
    n = len(rater_a)
    if n == 0:
        raise ValueError("rater vectors must be non-empty")
    matches = sum(1 for a, b in zip(rater_a, rater_b) if bool(a) == bool(b))
    p_o = matches / n
    labels = (True, False)
    p_e = sum(
        (sum(1 for a in rater_a if bool(a) == lab) / n)
        * (sum(1 for b in rater_b if bool(b) == lab) / n)
        for lab in labels
    )
    if p_e == 1.0:
        kappa = 1.0
    else:
        kappa = (p_o - p_e) / (1 - p_e)
    return AgreementStats(n_items=n, percent_agreement=p_o, cohen_kappa=kappa)


@dataclass(frozen=True)
class Codebook:
    """Ordered theme tags with short descriptions."""

    entries: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        tags = [tag for tag, _ in self.entries]
        if len(tags) != len(set(tags)):
            raise ValueError("codebook tags must be unique")

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(tag for tag, _ in self.entries)


DEFAULT_CODEBOOK = Codebook(
    entries=(
        ("incremental_testing", "implement and test the program in small increments"),
        ("planning_ahead", "plan the approach before or while writing code"),
        ("reduce_noise", "cut unnecessary outputs and throwaway comments"),
        ("remove_dead_code", "delete commented-out code instead of keeping it"),
        ("add_comments", "add comments that explain the code"),
        ("decompose_functions", "divide the program into functions"),
        ("naming", "choose clearer variable and function names"),
    )
)

UNCODED = "uncoded"


@dataclass(frozen=True)
class ThemeFrequencies:
    counts: tuple[tuple[str, int], ...]
    uncoded_tags: tuple[tuple[str, int], ...]

    @property
    def uncoded_total(self) -> int:
        return sum(count for _, count in self.uncoded_tags)


def theme_frequencies(
    evaluations: Iterable[EvaluationRecord], codebook: Codebook = DEFAULT_CODEBOOK
) -> ThemeFrequencies:
    """Tag counts over evaluations, descending; unknown tags land in uncoded."""
    known = Counter({tag: 0 for tag in codebook.tags})
    unknown: Counter = Counter()
    for record in evaluations:
        for tag in record.themes:
            if tag in known:
                known[tag] += 1
            else:
                unknown[tag] += 1
    order = {tag: i for i, tag in enumerate(codebook.tags)}
    counts = tuple(
        sorted(known.items(), key=lambda item: (-item[1], order[item[0]]))
    )
    uncoded = tuple(sorted(unknown.items(), key=lambda item: (-item[1], item[0])))
    return ThemeFrequencies(counts=counts, uncoded_tags=uncoded)


class EvaluationStore:
    """One JSON document per (record, rater); re-rating appends a version."""

    def __init__(self, root: Path | str, records: RecordStore | None = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._records = records
        self._lock = threading.Lock()

    def path_for(self, record_id: str, rater_id: str) -> Path:
        name = f"{record_id}__{rater_id}.json"
        return self.root / name.replace("/", "__")

    def record_rating(
        self,
        record_id: str,
        rater_id: str,
        *,
        acceptable: bool,
        reject_reason: RejectReason | str | None = None,
        rubric: Rubric | None = None,
        themes: Sequence[str] = (),
        notes: str = "",
    ) -> EvaluationRecord:
        if self._records is not None and self._records.load(record_id) is None:
            raise KeyError(f"unknown record_id {record_id!r}")
        if not rater_id:
            raise ValueError("rater_id must be non-empty")
        record = EvaluationRecord(
            record_id=record_id,
            rater_id=rater_id,
            acceptable=acceptable,
            reject_reason=RejectReason(reject_reason) if reject_reason else None,
            rubric=rubric,
            themes=tuple(themes),
            notes=notes,
            created_ts=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        with self._lock:
            path = self.path_for(record_id, rater_id)
            if path.exists():
                doc = json.loads(path.read_text(encoding="utf-8"))
            else:
                doc = {"record_id": record_id, "rater_id": rater_id, "versions": []}
            doc["versions"].append(record.to_json_dict())
            path.write_text(
                json.dumps(doc, ensure_ascii=False, indent=2), encoding="utf-8"
            )
        return record

    def history(self, record_id: str, rater_id: str) -> list[EvaluationRecord]:
        path = self.path_for(record_id, rater_id)
        if not path.exists():
            return []
        doc = json.loads(path.read_text(encoding="utf-8"))
        return [EvaluationRecord.from_json_dict(v) for v in doc["versions"]]

    def current(self, record_id: str, rater_id: str) -> EvaluationRecord | None:
        versions = self.history(record_id, rater_id)
        return versions[-1] if versions else None

    def all_current(self) -> list[EvaluationRecord]:
        """The latest rating per (record, rater), across the store."""
        out = []
        for path in sorted(self.root.glob("*__*.json")):
            doc = json.loads(path.read_text(encoding="utf-8"))
            if doc.get("versions"):
                out.append(EvaluationRecord.from_json_dict(doc["versions"][-1]))
        return out
