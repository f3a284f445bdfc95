from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from proclens import (
    MockTransport,
    RecordStore,
    TaskKind,
    TransportError,
    build_prompt,
    extract_snapshots,
    prompt_hash,
    reconstruct_at,
    slice_steps,
)
from proclens.config import load_config, load_sessions
from proclens.segmentation import sequence_to_json_dict
from proclens.service import create_app

from conftest import HANDOUTS, write_demo_project

KEY = "S1_fluky_main.py"


@pytest.fixture
def project(tmp_path):
    config_path = write_demo_project(tmp_path)
    return load_config(config_path)


@pytest.fixture
def transport():
    return MockTransport()


@pytest.fixture
def client(project, transport):
    return TestClient(create_app(project, transport=transport))


def library_sequence(project, key=KEY, threshold=None):
    session = load_sessions(project.events_dir)[key]
    return session, extract_snapshots(session, threshold or project.threshold_ms)


class TestSessions:
    def test_lists_all_sessions_sorted(self, client):
        rows = client.get("/api/sessions").json()
        assert len(rows) == 15
        keys = [row["session"] for row in rows]
        assert keys == sorted(keys)
        assert KEY in keys

    def test_row_fields_match_library(self, client, project):
        row = next(
            r for r in client.get("/api/sessions").json() if r["session"] == KEY
        )
        session = load_sessions(project.events_dir)[KEY]
        assert row == {
            "session": KEY,
            "subject_id": "S1",
            "assignment_id": "fluky",
            "file_path": "main.py",
            "event_count": session.event_count,
            "span_ms": session.span_ms,
        }


class TestSnapshots:
    def test_matches_library_output(self, client, project):
        resp = client.get(f"/api/sessions/{KEY}/snapshots")
        assert resp.status_code == 200
        _, seq = library_sequence(project)
        assert resp.json() == sequence_to_json_dict(seq)

    def test_threshold_override(self, client, project):
        resp = client.get(f"/api/sessions/{KEY}/snapshots", params={"threshold_ms": 1})
        _, seq = library_sequence(project, threshold=1)
        assert resp.json() == sequence_to_json_dict(seq)
        assert resp.json()["threshold_ms"] == 1

    def test_dedup_flag(self, client, project):
        resp = client.get(f"/api/sessions/{KEY}/snapshots", params={"dedup": "true"})
        session, _ = library_sequence(project)
        expected = extract_snapshots(session, project.threshold_ms, dedup=True)
        assert resp.json() == sequence_to_json_dict(expected)

    def test_unknown_session(self, client):
        resp = client.get("/api/sessions/S1_nope_main.py/snapshots")
        assert resp.status_code == 404

    def test_zero_threshold_rejected(self, client):
        resp = client.get(f"/api/sessions/{KEY}/snapshots", params={"threshold_ms": 0})
        assert resp.status_code == 422


class TestState:
    def test_first_and_final_states(self, client, project):
        session = load_sessions(project.events_dir)[KEY]
        for at in (1, session.event_count):
            resp = client.get(f"/api/sessions/{KEY}/state", params={"at": at})
            assert resp.status_code == 200
            state = reconstruct_at(session, at)
            assert resp.json() == {
                "session": KEY,
                "event_index": at,
                "ts_ms": state.ts_ms,
                "text": state.text,
            }

    def test_beyond_final_event(self, client, project):
        session = load_sessions(project.events_dir)[KEY]
        resp = client.get(
            f"/api/sessions/{KEY}/state", params={"at": session.event_count + 1}
        )
        assert resp.status_code == 422

    def test_zero_and_missing_at(self, client):
        assert client.get(f"/api/sessions/{KEY}/state", params={"at": 0}).status_code == 422
        assert client.get(f"/api/sessions/{KEY}/state").status_code == 422

    def test_unknown_session(self, client):
        resp = client.get("/api/sessions/S1_nope_main.py/state", params={"at": 1})
        assert resp.status_code == 404


class TestGenerate:
    def test_happy_path_matches_local_rendering(self, client, project, transport):
        resp = client.post(
            "/api/generate",
            json={"session": KEY, "task": "summary", "model": "alpha-large"},
        )
        assert resp.status_code == 200
        body = resp.json()
        _, seq = library_sequence(project)
        bundle = build_prompt(TaskKind.summary, HANDOUTS["fluky"], seq)
        assert body["record_id"] == "S1_fluky_summary_alpha-large"
        assert body["status"] == "ok"
        assert body["response_text"] == "mock response from alpha-large"
        assert body["prompt_hash"] == prompt_hash(bundle.prompt_text)
        assert body["step_count"] == seq.step_count
        assert len(transport.calls) == 1
        stored = RecordStore(project.records_dir).load(body["record_id"])
        assert stored is not None
        assert stored.prompt_hash == body["prompt_hash"]

    def test_step_slice_renumbers_prompt(self, client, project):
        _, seq = library_sequence(project)
        assert seq.step_count >= 2
        resp = client.post(
            "/api/generate",
            json={"session": KEY, "task": "feedback", "model": "beta-chat", "step_from": 2},
        )
        assert resp.status_code == 200
        sliced = slice_steps(seq, 2, seq.step_count)
        bundle = build_prompt(TaskKind.feedback, HANDOUTS["fluky"], sliced)
        assert resp.json()["prompt_hash"] == prompt_hash(bundle.prompt_text)
        assert resp.json()["step_count"] == seq.step_count - 1

    def test_unknown_session(self, client):
        resp = client.post(
            "/api/generate",
            json={"session": "S1_nope_main.py", "task": "summary", "model": "alpha-large"},
        )
        assert resp.status_code == 404

    def test_unknown_model(self, client):
        resp = client.post(
            "/api/generate",
            json={"session": KEY, "task": "summary", "model": "omega-9000"},
        )
        assert resp.status_code == 404

    def test_missing_handout(self, tmp_path):
        config_path = write_demo_project(tmp_path)
        (tmp_path / "handouts" / "fluky.txt").unlink()
        client = TestClient(create_app(load_config(config_path), transport=MockTransport()))
        resp = client.post(
            "/api/generate",
            json={"session": KEY, "task": "summary", "model": "alpha-large"},
        )
        assert resp.status_code == 404
        assert "handout" in resp.json()["detail"]

    def test_step_range_beyond_sequence(self, client):
        resp = client.post(
            "/api/generate",
            json={
                "session": KEY,
                "task": "summary",
                "model": "alpha-large",
                "step_from": 50,
                "step_to": 60,
            },
        )
        assert resp.status_code == 422

    def test_step_from_zero_rejected_by_validation(self, client):
        resp = client.post(
            "/api/generate",
            json={"session": KEY, "task": "summary", "model": "alpha-large", "step_from": 0},
        )
        assert resp.status_code == 422

    def test_bad_task_rejected_by_validation(self, client):
        resp = client.post(
            "/api/generate",
            json={"session": KEY, "task": "poetry", "model": "alpha-large"},
        )
        assert resp.status_code == 422

    def test_transport_failure_returns_503_with_record(self, project):
        failing = MockTransport(script=[TransportError("auth bad", retryable=False)])
        client = TestClient(create_app(project, transport=failing))
        resp = client.post(
            "/api/generate",
            json={"session": KEY, "task": "summary", "model": "alpha-large"},
        )
        assert resp.status_code == 503
        body = resp.json()
        assert body["status"] == "error"
        assert "auth bad" in body["error_detail"]
        # the failure is durable, same as any other outcome
        stored = RecordStore(project.records_dir).load(body["record_id"])
        assert stored is not None
        assert stored.status.value == "error"

    def test_oversized_prompt_never_reaches_transport(self, tmp_path):
        config_path = write_demo_project(
            tmp_path,
            models=[
                {"model_id": "alpha-large", "window_tokens": 200_000},
                {"model_id": "tiny", "window_tokens": 16},
            ],
        )
        transport = MockTransport()
        client = TestClient(create_app(load_config(config_path), transport=transport))
        resp = client.post(
            "/api/generate",
            json={"session": KEY, "task": "summary", "model": "tiny"},
        )
        assert resp.status_code == 503
        body = resp.json()
        assert body["error_detail"] == "prompt too long"
        assert body["attempts"] == 0
        assert transport.calls == []


class TestRecords:
    def test_empty_store(self, client):
        assert client.get("/api/records").json() == []

    def test_filter_by_session(self, client):
        for key in (KEY, "S2_zoo_main.py"):
            resp = client.post(
                "/api/generate",
                json={"session": key, "task": "summary", "model": "alpha-large"},
            )
            assert resp.status_code == 200
        all_rows = client.get("/api/records").json()
        assert len(all_rows) == 2
        mine = client.get("/api/records", params={"session": KEY}).json()
        assert [r["record_id"] for r in mine] == ["S1_fluky_summary_alpha-large"]
        assert client.get("/api/records", params={"session": "S9_x_y"}).json() == []


class TestEvaluations:
    def generate_record(self, client) -> str:
        resp = client.post(
            "/api/generate",
            json={"session": KEY, "task": "summary", "model": "alpha-large"},
        )
        assert resp.status_code == 200
        return resp.json()["record_id"]

    def rating_body(self, record_id, **overrides):
        body = {
            "record_id": record_id,
            "rater_id": "rater_a",
            "acceptable": True,
            "rubric": {
                "hallucination_count": 0,
                "process_focus": 5,
                "specificity": 4,
                "correctness": 4,
                "utility": 3,
            },
            "themes": ["naming"],
            "notes": "fine",
        }
        body.update(overrides)
        return body

    def test_submit_and_read_back(self, client, project):
        record_id = self.generate_record(client)
        resp = client.post("/api/evaluations", json=self.rating_body(record_id))
        assert resp.status_code == 200
        stored = resp.json()
        assert stored["record_id"] == record_id
        assert stored["acceptable"] is True
        assert stored["themes"] == ["naming"]
        report = client.get("/api/report").json()
        assert report["totals"] == {"records": 1, "evaluations": 1}

    def test_unknown_record(self, client):
        resp = client.post("/api/evaluations", json=self.rating_body("ghost"))
        assert resp.status_code == 404

    def test_rubric_bounds_enforced(self, client):
        record_id = self.generate_record(client)
        body = self.rating_body(record_id)
        body["rubric"]["utility"] = 6
        assert client.post("/api/evaluations", json=body).status_code == 422

    def test_rejection_requires_reason(self, client):
        record_id = self.generate_record(client)
        body = self.rating_body(record_id, acceptable=False)
        assert client.post("/api/evaluations", json=body).status_code == 422
        body = self.rating_body(
            record_id, acceptable=False, reject_reason="single_state_only"
        )
        assert client.post("/api/evaluations", json=body).status_code == 200

    def test_unknown_reject_reason(self, client):
        record_id = self.generate_record(client)
        body = self.rating_body(record_id, acceptable=False, reject_reason="too_spicy")
        assert client.post("/api/evaluations", json=body).status_code == 422


class TestReport:
    def test_report_over_live_stores(self, client):
        for task in ("summary", "feedback"):
            resp = client.post(
                "/api/generate",
                json={"session": KEY, "task": task, "model": "alpha-large"},
            )
            assert resp.status_code == 200
        report = client.get("/api/report").json()
        assert report["totals"]["records"] == 2
        assert report["generation"][0]["count_ok"] == 2
        assert report["agreement"] is None


class TestStaticUi:
    def test_no_mount_without_ui_dir(self, client):
        assert client.get("/ui/").status_code == 404

    def test_ui_dir_served_when_configured(self, tmp_path):
        config_path = write_demo_project(tmp_path)
        ui_dir = tmp_path / "ui"
        ui_dir.mkdir()
        (ui_dir / "index.html").write_text("<!doctype html><p>review</p>", encoding="utf-8")
        raw = json.loads(config_path.read_text(encoding="utf-8"))
        raw["ui_dir"] = "ui"
        config_path.write_text(json.dumps(raw), encoding="utf-8")
        client = TestClient(create_app(load_config(config_path), transport=MockTransport()))
        resp = client.get("/ui/")
        assert resp.status_code == 200
        assert "review" in resp.text
