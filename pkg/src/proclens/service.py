"""Loopback HTTP service for the review workflow.

Read endpoints expose sessions, snapshots, and reconstructed states;
the two writers run generations and store ratings.  The service is meant
for a local reviewer, so it binds loopback and carries no auth.
"""

from __future__ import annotations

import json
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import ProjectConfig, load_sessions
from .evaluation import EvaluationStore, Rubric
from .harness import (
    CacheTransport,
    GenerationStatus,
    HttpTransport,
    MockTransport,
    RecordStore,
    Transport,
    complete,
)
from .prompts import TaskKind, build_prompt
from .replay import reconstruct_at
from .report import build_report
from .segmentation import (
    extract_snapshots,
    sequence_to_json_dict,
    slice_steps,
)


class GenerateRequest(BaseModel):
    session: str
    task: TaskKind
    model: str
    step_from: Optional[int] = Field(default=None, ge=1)
    step_to: Optional[int] = Field(default=None, ge=1)


class RubricBody(BaseModel):
    hallucination_count: int = Field(ge=0)
    process_focus: int = Field(ge=1, le=5)
    specificity: int = Field(ge=1, le=5)
    correctness: int = Field(ge=1, le=5)
    utility: int = Field(ge=1, le=5)


class EvaluationRequest(BaseModel):
    record_id: str
    rater_id: str
    acceptable: bool
    reject_reason: Optional[str] = None
    rubric: Optional[RubricBody] = None
    themes: list[str] = Field(default_factory=list)
    notes: str = ""


def _resolve_transport(config: ProjectConfig, records: RecordStore) -> Transport:
    if config.transport == "http":
        return HttpTransport()
    if config.transport == "cache":
        return CacheTransport(records)
    return MockTransport()


def create_app(config: ProjectConfig, transport: Transport | None = None) -> FastAPI:
    app = FastAPI(title="proclens", version="0.1.0")

    sessions = load_sessions(config.events_dir)
    records = RecordStore(config.records_dir)
    evaluations = EvaluationStore(config.evaluations_dir, records=records)
    handouts = {
        path.stem: path.read_text(encoding="utf-8")
        for path in sorted(config.handouts_dir.glob("*.txt"))
    }
    active_transport = transport if transport is not None else _resolve_transport(config, records)

    def session_or_404(key: str):
        session = sessions.get(key)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {key!r}")
        return session

    @app.get("/api/sessions")
    def list_sessions() -> list[dict]:
        return [
            {
                "session": key,
                "subject_id": s.subject_id,
                "assignment_id": s.assignment_id,
                "file_path": s.file_path,
                "event_count": s.event_count,
                "span_ms": s.span_ms,
            }
            for key, s in sorted(sessions.items())
        ]

    @app.get("/api/sessions/{key}/snapshots")
    def session_snapshots(
        key: str,
        threshold_ms: Optional[int] = Query(default=None, gt=0),
        dedup: bool = False,
    ) -> dict:
        session = session_or_404(key)
        seq = extract_snapshots(
            session, threshold_ms or config.threshold_ms, dedup=dedup
        )
        return sequence_to_json_dict(seq)

    @app.get("/api/sessions/{key}/state")
    def session_state(key: str, at: int = Query(ge=1)) -> dict:
        session = session_or_404(key)
        if at > session.event_count:
            raise HTTPException(
                status_code=422,
                detail=f"at={at} beyond last event {session.event_count}",
            )
        state = reconstruct_at(session, at)
        return {
            "session": key,
            "event_index": state.event_index,
            "ts_ms": state.ts_ms,
            "text": state.text,
        }

    @app.get("/api/records")
    def list_records(session: Optional[str] = None) -> list[dict]:
        out = []
        for record in records.list_records():
            if session is not None:
                composed = "_".join(
                    (
                        record.subject_id,
                        record.assignment_id,
                        record.file_path.replace("/", "__"),
                    )
                )
                if composed != session:
                    continue
            out.append(record.to_json_dict())
        return out

    @app.post("/api/generate")
    def generate(body: GenerateRequest):
        session = session_or_404(body.session)
        model = config.model_by_id(body.model)
        if model is None:
            raise HTTPException(status_code=404, detail=f"unknown model {body.model!r}")
        handout = handouts.get(session.assignment_id)
        if handout is None:
            raise HTTPException(
                status_code=404,
                detail=f"no handout for assignment {session.assignment_id!r}",
            )
        seq = extract_snapshots(session, config.threshold_ms)
        if body.step_from is not None or body.step_to is not None:
            step_from = body.step_from or 1
            step_to = body.step_to or seq.step_count
            if not 1 <= step_from <= step_to <= seq.step_count:
                raise HTTPException(
                    status_code=422,
                    detail=(
                        f"step range {step_from}..{step_to} invalid for "
                        f"{seq.step_count} steps"
                    ),
                )
            seq = slice_steps(seq, step_from, step_to)
        bundle = build_prompt(body.task, handout, seq)
        record = complete(model, bundle, active_transport)
        records.save(record)
        payload = record.to_json_dict()
        if record.status is GenerationStatus.error:
            return JSONResponse(status_code=503, content=payload)
        return payload

    @app.post("/api/evaluations")
    def submit_evaluation(body: EvaluationRequest) -> dict:
        try:
            rubric = (
                Rubric(
                    hallucination_count=body.rubric.hallucination_count,
                    process_focus=body.rubric.process_focus,
                    specificity=body.rubric.specificity,
                    correctness=body.rubric.correctness,
                    utility=body.rubric.utility,
                )
                if body.rubric
                else None
            )
            stored = evaluations.record_rating(
                body.record_id,
                body.rater_id,
                acceptable=body.acceptable,
                reject_reason=body.reject_reason,
                rubric=rubric,
                themes=tuple(body.themes),
                notes=body.notes,
            )
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return stored.to_json_dict()

    @app.get("/api/report")
    def report() -> dict:
        return build_report(records.list_records(), evaluations.all_current())

    if config.ui_dir is not None and config.ui_dir.exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def serve(config: ProjectConfig, port: int, host: str = "127.0.0.1") -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port)
