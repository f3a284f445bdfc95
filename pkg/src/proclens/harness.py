"""Batch generation over chat-completion transports, with durable records.

The harness owns everything around a model call: context-fit gating,
retries with exponential backoff, latency bookkeeping, and one JSON record
per (session, task, model) so an interrupted batch resumes without
re-spending completed calls.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol

import requests

from .events import Session, SessionKey
from .prompts import (
    DEFAULT_RESERVE_TOKENS,
    PromptBundle,
    TaskKind,
    build_prompt,
    check_context_fit,
)
from .segmentation import DEFAULT_THRESHOLD_MS, extract_snapshots

PROMPT_TOO_LONG = "prompt too long"


@dataclass(frozen=True)
class ModelConfig:
    """One model endpoint.  Keys come from the named env var, never config."""

    model_id: str
    endpoint: str = ""
    auth_env_var: str = ""
    window_tokens: int = 128_000
    temperature: float = 0.0
    max_response_tokens: int = 1024
    timeout_ms: int = 60_000
    max_retries: int = 3

    def __post_init__(self) -> None:
        if self.window_tokens <= 0:
            raise ValueError("window_tokens must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    @classmethod
    def from_json_dict(cls, data: Mapping[str, object]) -> "ModelConfig":
        return cls(
            model_id=str(data["model_id"]),
            endpoint=str(data.get("endpoint", "")),
            auth_env_var=str(data.get("auth_env_var", "")),
            window_tokens=int(data.get("window_tokens", 128_000)),
            temperature=float(data.get("temperature", 0.0)),
            max_response_tokens=int(data.get("max_response_tokens", 1024)),
            timeout_ms=int(data.get("timeout_ms", 60_000)),
            max_retries=int(data.get("max_retries", 3)),
        )


class TransportError(Exception):
    """A transport-level failure.  Retryable unless marked otherwise."""

    def __init__(self, message: str, *, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


class Transport(Protocol):
    def send(self, config: ModelConfig, prompt: str) -> str: ...


class HttpTransport:
    """Chat-completions style HTTP transport with bearer auth."""

    def send(self, config: ModelConfig, prompt: str) -> str:
        if not config.endpoint:
            raise TransportError(
                f"model {config.model_id!r} has no endpoint configured", retryable=False
            )
        token = os.environ.get(config.auth_env_var, "") if config.auth_env_var else ""
        if config.auth_env_var and not token:
            raise TransportError(
                f"environment variable {config.auth_env_var!r} is not set",
                retryable=False,
            )
        payload = {
            "model": config.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": config.temperature,
            "max_tokens": config.max_response_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if token:
            headers["Authorization"] = f"Bearer {token}"
        try:
            resp = requests.post(
                config.endpoint,
                json=payload,
                headers=headers,
                timeout=config.timeout_ms / 1000,
            )
        except requests.RequestException as exc:
            raise TransportError(f"request failed: {exc}") from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code >= 400:
            raise TransportError(
                f"HTTP {resp.status_code}: {resp.text[:200]}", retryable=False
            )
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed response body: {exc}", retryable=False) from exc


class MockTransport:
    """Scripted transport for tests and dry runs.

    `script` entries are consumed one per call: a string is returned, an
    exception instance is raised.  When the script runs out, `responder`
    answers (by default a canned line naming the model).
    """

    def __init__(
        self,
        script: Iterable[object] | None = None,
        responder: Callable[[ModelConfig, str], str] | None = None,
    ):
        self._script = list(script or [])
        self._responder = responder or (
            lambda config, prompt: f"mock response from {config.model_id}"
        )
        self._lock = threading.Lock()
        self.calls: list[tuple[str, str]] = []

    def send(self, config: ModelConfig, prompt: str) -> str:
        with self._lock:
            self.calls.append((config.model_id, prompt))
            step = self._script.pop(0) if self._script else None
        if isinstance(step, Exception):
            raise step
        if isinstance(step, str):
            return step
        return self._responder(config, prompt)


class GenerationStatus(str, Enum):
    ok = "ok"
    error = "error"


def prompt_hash(prompt_text: str) -> str:
    return hashlib.sha256(prompt_text.encode("utf-8")).hexdigest()


def record_id_for(key: SessionKey, task: TaskKind, model_id: str) -> str:
    return f"{key.subject_id}_{key.assignment_id}_{task.value}_{model_id}"


@dataclass(frozen=True)
class GenerationRecord:
    """Durable outcome of one generation attempt chain."""

    record_id: str
    subject_id: str
    assignment_id: str
    file_path: str
    task: TaskKind
    model_id: str
    prompt_hash: str
    response_text: str
    latency_ms: int
    response_chars: int
    created_ts: str
    status: GenerationStatus
    error_detail: str | None = None
    attempts: int = 1
    step_count: int = 0

    def __post_init__(self) -> None:
        if self.status is GenerationStatus.ok:
            if not self.response_text:
                raise ValueError("ok record must carry a non-empty response")
            if self.response_chars != len(self.response_text):
                raise ValueError("response_chars must equal len(response_text)")
        elif not self.error_detail:
            raise ValueError("error record must carry error_detail")

    def to_json_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "subject_id": self.subject_id,
            "assignment_id": self.assignment_id,
            "file_path": self.file_path,
            "task": self.task.value,
            "model_id": self.model_id,
            "prompt_hash": self.prompt_hash,
            "response_text": self.response_text,
            "latency_ms": self.latency_ms,
            "response_chars": self.response_chars,
            "created_ts": self.created_ts,
            "status": self.status.value,
            "error_detail": self.error_detail,
            "attempts": self.attempts,
            "step_count": self.step_count,
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, object]) -> "GenerationRecord":
        return cls(
            record_id=str(data["record_id"]),
            subject_id=str(data["subject_id"]),
            assignment_id=str(data["assignment_id"]),
            file_path=str(data["file_path"]),
            task=TaskKind(data["task"]),
            model_id=str(data["model_id"]),
            prompt_hash=str(data["prompt_hash"]),
            response_text=str(data["response_text"]),
            latency_ms=int(data["latency_ms"]),
            response_chars=int(data["response_chars"]),
            created_ts=str(data["created_ts"]),
            status=GenerationStatus(data["status"]),
            error_detail=data.get("error_detail"),
            attempts=int(data.get("attempts", 1)),
            step_count=int(data.get("step_count", 0)),
        )


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def complete(
    config: ModelConfig,
    bundle: PromptBundle,
    transport: Transport,
    *,
    reserve_tokens: int = DEFAULT_RESERVE_TOKENS,
    override_fit: bool = False,
    sleep: Callable[[float], None] = time.sleep,
    backoff_s: float = 0.5,
) -> GenerationRecord:
    """One generation with fit gating and retries.

    A prompt that fails the context-fit check produces an error record
    without touching the transport.  Transient transport failures retry up
    to config.max_retries with exponential backoff; the attempt count lands
    in the record either way.
    """

    def record(status, response="", latency_ms=0, detail=None, attempts=0):
        return GenerationRecord(
            record_id=record_id_for(bundle.key, bundle.task, config.model_id),
            subject_id=bundle.key.subject_id,
            assignment_id=bundle.key.assignment_id,
            file_path=bundle.key.file_path,
            task=bundle.task,
            model_id=config.model_id,
            prompt_hash=prompt_hash(bundle.prompt_text),
            response_text=response,
            latency_ms=latency_ms,
            response_chars=len(response),
            created_ts=_now_iso(),
            status=status,
            error_detail=detail,
            attempts=attempts,
            step_count=bundle.step_count,
        )

    fit = check_context_fit(bundle, config.window_tokens, reserve_tokens)
    if not fit.fits and not override_fit:
        return record(GenerationStatus.error, detail=PROMPT_TOO_LONG)

    attempts = 0
    start = time.monotonic()
    while True:
        attempts += 1
        try:
            response = transport.send(config, bundle.prompt_text)
        except TransportError as exc:
            if not exc.retryable or attempts > config.max_retries:
                latency = int((time.monotonic() - start) * 1000)
                return record(
                    GenerationStatus.error,
                    latency_ms=latency,
                    detail=str(exc),
                    attempts=attempts,
                )
            sleep(backoff_s * (2 ** (attempts - 1)))
        else:
            latency = int((time.monotonic() - start) * 1000)
            return record(
                GenerationStatus.ok,
                response=response,
                latency_ms=latency,
                attempts=attempts,
            )


class RecordStore:
    """One JSON file per record id; writes are serialized."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def path_for(self, record_id: str) -> Path:
        # Model ids may contain slashes; filenames stay flat.
        return self.root / f"{record_id.replace('/', '__')}.json"

    def save(self, record: GenerationRecord) -> None:
        payload = json.dumps(record.to_json_dict(), ensure_ascii=False, indent=2)
        with self._lock:
            self.path_for(record.record_id).write_text(payload, encoding="utf-8")

    def load(self, record_id: str) -> GenerationRecord | None:
        path = self.path_for(record_id)
        if not path.exists():
            return None
        return GenerationRecord.from_json_dict(
            json.loads(path.read_text(encoding="utf-8"))
        )

    def list_records(self) -> list[GenerationRecord]:
        records = []
        for path in sorted(self.root.glob("*.json")):
            records.append(
                GenerationRecord.from_json_dict(json.loads(path.read_text(encoding="utf-8")))
            )
        return records


class CacheTransport:
    """Replays responses recorded earlier, keyed by prompt hash."""

    def __init__(self, store: RecordStore):
        self._by_hash = {
            r.prompt_hash: r.response_text
            for r in store.list_records()
            if r.status is GenerationStatus.ok
        }

    def send(self, config: ModelConfig, prompt: str) -> str:
        key = prompt_hash(prompt)
        if key not in self._by_hash:
            raise TransportError(
                f"no cached response for prompt hash {key[:12]}", retryable=False
            )
        return self._by_hash[key]


@dataclass(frozen=True)
class PlanItem:
    session: str
    task: TaskKind
    model_id: str


@dataclass(frozen=True)
class BatchPlan:
    """What to generate: unique (session, task, model) triples."""

    items: tuple[PlanItem, ...]
    handouts_dir: str = ""
    threshold_ms: int = DEFAULT_THRESHOLD_MS

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        seen = set()
        for item in self.items:
            triple = (item.session, item.task, item.model_id)
            if triple in seen:
                raise ValueError(f"duplicate plan item {triple}")
            seen.add(triple)

    @classmethod
    def from_json_dict(cls, data: Mapping[str, object]) -> "BatchPlan":
        items = tuple(
            PlanItem(
                session=str(raw["session"]),
                task=TaskKind(raw["task"]),
                model_id=str(raw["model_id"]),
            )
            for raw in data.get("items", [])
        )
        return cls(
            items=items,
            handouts_dir=str(data.get("handouts_dir", "")),
            threshold_ms=int(data.get("threshold_ms", DEFAULT_THRESHOLD_MS)),
        )

    @classmethod
    def from_file(cls, path: Path | str) -> "BatchPlan":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_handouts(directory: Path | str) -> dict[str, str]:
    """Handout texts by assignment id, from <assignment_id>.txt files."""
    handouts = {}
    for path in sorted(Path(directory).glob("*.txt")):
        handouts[path.stem] = path.read_text(encoding="utf-8")
    return handouts


class _RateLimiter:
    """Enforces a minimum interval between transport calls across threads."""

    def __init__(self, min_interval_s: float):
        self._min_interval = min_interval_s
        self._lock = threading.Lock()
        self._next_at = 0.0

    def wait(self) -> None:
        if self._min_interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next_at - now
            self._next_at = max(now, self._next_at) + self._min_interval
        if delay > 0:
            time.sleep(delay)


class _ThrottledTransport:
    def __init__(self, inner: Transport, gate: threading.Semaphore, limiter: _RateLimiter):
        self._inner = inner
        self._gate = gate
        self._limiter = limiter

    def send(self, config: ModelConfig, prompt: str) -> str:
        with self._gate:
            self._limiter.wait()
            return self._inner.send(config, prompt)


def run_batch(
    plan: BatchPlan,
    store: RecordStore,
    *,
    sessions: Mapping[str, Session],
    model_configs: Mapping[str, ModelConfig],
    transport: Transport,
    handouts: Mapping[str, str] | None = None,
    force: bool = False,
    per_model_limit: int = 2,
    min_interval_s: float = 0.0,
    sleep: Callable[[float], None] = time.sleep,
    backoff_s: float = 0.5,
) -> list[GenerationRecord]:
    """Run a plan to completion, reusing finished records.

    Every plan item is resolved (session, handout, model, rendered prompt)
    before the first transport call, so a bad plan aborts with nothing
    spent.  Items whose stored record is ok with an identical prompt hash
    are skipped unless force is set.  Records are persisted before return;
    one record per plan item, in plan order.
    """
    if handouts is None:
        handouts = load_handouts(plan.handouts_dir) if plan.handouts_dir else {}

    prepared: list[tuple[PlanItem, ModelConfig, PromptBundle]] = []
    for item in plan.items:
        if item.session not in sessions:
            raise ValueError(f"unknown session {item.session!r} in plan")
        if item.model_id not in model_configs:
            raise ValueError(f"unknown model {item.model_id!r} in plan")
        session = sessions[item.session]
        if session.assignment_id not in handouts:
            raise ValueError(
                f"no handout for assignment {session.assignment_id!r} "
                f"(session {item.session!r})"
            )
        seq = extract_snapshots(session, plan.threshold_ms)
        bundle = build_prompt(item.task, handouts[session.assignment_id], seq)
        prepared.append((item, model_configs[item.model_id], bundle))

    limiter = _RateLimiter(min_interval_s)
    gates = {
        model_id: threading.Semaphore(per_model_limit) for model_id in model_configs
    }
    results: dict[int, GenerationRecord] = {}
    todo: list[tuple[int, PlanItem, ModelConfig, PromptBundle]] = []
    for pos, (item, config, bundle) in enumerate(prepared):
        existing = store.load(record_id_for(bundle.key, item.task, item.model_id))
        if (
            existing is not None
            and not force
            and existing.status is GenerationStatus.ok
            and existing.prompt_hash == prompt_hash(bundle.prompt_text)
        ):
            results[pos] = existing
        else:
            todo.append((pos, item, config, bundle))

    def work(entry):
        pos, item, config, bundle = entry
        throttled = _ThrottledTransport(transport, gates[config.model_id], limiter)
        record = complete(
            config, bundle, throttled, sleep=sleep, backoff_s=backoff_s
        )
        store.save(record)
        return pos, record

    if todo:
        workers = min(len(todo), max(per_model_limit * len(model_configs), 1))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for pos, record in pool.map(work, todo):
                results[pos] = record

    return [results[pos] for pos in range(len(prepared))]


@dataclass(frozen=True, slots=True)
class ModelStats:
    model_id: str
    count_ok: int
    count_error: int
    mean_latency_s: float | None
    mean_response_chars: float | None


@dataclass(frozen=True)
class StatsTable:
    rows: tuple[ModelStats, ...]

    def render(self) -> str:
        header = f"{'model':<36} {'mean s':>8} {'mean chars':>11} {'ok':>4} {'err':>4}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            mean_s = f"{row.mean_latency_s:.1f}" if row.mean_latency_s is not None else "-"
            mean_c = (
                f"{row.mean_response_chars:.0f}"
                if row.mean_response_chars is not None
                else "-"
            )
            lines.append(
                f"{row.model_id:<36} {mean_s:>8} {mean_c:>11} "
                f"{row.count_ok:>4} {row.count_error:>4}"
            )
        return "\n".join(lines)


def generation_stats(records: Iterable[GenerationRecord]) -> StatsTable:
    """Per-model mean latency and response length over successful records."""
    by_model: dict[str, list[GenerationRecord]] = {}
    for r in records:
        by_model.setdefault(r.model_id, []).append(r)
    rows = []
    for model_id in sorted(by_model):
        group = by_model[model_id]
        ok = [r for r in group if r.status is GenerationStatus.ok]
        rows.append(
            ModelStats(
                model_id=model_id,
                count_ok=len(ok),
                count_error=len(group) - len(ok),
                mean_latency_s=(
                    sum(r.latency_ms for r in ok) / len(ok) / 1000 if ok else None
                ),
                mean_response_chars=(
                    sum(r.response_chars for r in ok) / len(ok) if ok else None
                ),
            )
        )
    return StatsTable(rows=tuple(rows))
