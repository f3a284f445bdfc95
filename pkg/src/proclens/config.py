"""Project configuration: store locations, models, and defaults."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .events import Session, parse_jsonl, split_sessions
from .harness import ModelConfig
from .prompts import TaskKind
from .segmentation import DEFAULT_THRESHOLD_MS

CONFIG_ENV_VAR = "PROCLENS_CONFIG"
DEFAULT_CONFIG_NAME = "proclens.json"

TRANSPORT_KINDS = ("mock", "cache", "http")


class ConfigError(ValueError):
    """The project config file is missing or unusable."""


@dataclass(frozen=True)
class ProjectConfig:
    root: Path
    events_dir: Path
    handouts_dir: Path
    records_dir: Path
    evaluations_dir: Path
    threshold_ms: int = DEFAULT_THRESHOLD_MS
    default_tasks: tuple[TaskKind, ...] = (TaskKind.summary, TaskKind.feedback)
    models: tuple[ModelConfig, ...] = ()
    transport: str = "mock"
    ui_dir: Path | None = None

    def model_by_id(self, model_id: str) -> ModelConfig | None:
        for model in self.models:
            if model.model_id == model_id:
                return model
        return None

    @property
    def model_configs(self) -> dict[str, ModelConfig]:
        return {m.model_id: m for m in self.models}


def load_config(path: Path | str) -> ProjectConfig:
    """Load a config file; relative paths resolve against its directory.

    Store directories are created if absent so a fresh project starts
    usable.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")

    root = path.parent.resolve()

    def resolve(key: str, default: str) -> Path:
        return (root / str(data.get(key, default))).resolve()

    transport = str(data.get("transport", "mock"))
    if transport not in TRANSPORT_KINDS:
        raise ConfigError(
            f"transport must be one of {TRANSPORT_KINDS}, got {transport!r}"
        )
    try:
        models = tuple(
            ModelConfig.from_json_dict(raw) for raw in data.get("models", [])
        )
        tasks = tuple(TaskKind(t) for t in data.get("default_tasks", ["summary", "feedback"]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc

    config = ProjectConfig(
        root=root,
        events_dir=resolve("events_dir", "events"),
        handouts_dir=resolve("handouts_dir", "handouts"),
        records_dir=resolve("records_dir", "records"),
        evaluations_dir=resolve("evaluations_dir", "evaluations"),
        threshold_ms=int(data.get("threshold_ms", DEFAULT_THRESHOLD_MS)),
        default_tasks=tasks,
        models=models,
        transport=transport,
        ui_dir=(root / str(data["ui_dir"])).resolve() if data.get("ui_dir") else None,
    )
    for directory in (
        config.events_dir,
        config.handouts_dir,
        config.records_dir,
        config.evaluations_dir,
    ):
        directory.mkdir(parents=True, exist_ok=True)
    return config


def find_config(explicit: str | None = None) -> Path:
    """Explicit flag wins, then the env var, then ./proclens.json."""
    if explicit:
        return Path(explicit)
    env = os.environ.get(CONFIG_ENV_VAR)
    if env:
        return Path(env)
    return Path(DEFAULT_CONFIG_NAME)


def load_sessions(events_dir: Path | str) -> dict[str, Session]:
    """All sessions in a directory of event files, keyed by composed key."""
    sessions: dict[str, Session] = {}
    for path in sorted(Path(events_dir).glob("*.jsonl")):
        events = parse_jsonl(path.read_text(encoding="utf-8"))
        for session in split_sessions(events):
            key = session.key.composed()
            if key in sessions:
                merged = sorted(
                    sessions[key].events + session.events,
                    key=lambda e: (e.ts_ms, e.seq),
                )
                session = Session(
                    subject_id=session.subject_id,
                    assignment_id=session.assignment_id,
                    file_path=session.file_path,
                    events=tuple(merged),
                )
            sessions[key] = session
    return sessions
