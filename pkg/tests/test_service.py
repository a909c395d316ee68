from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from futamix.ddsl import fixture_text
from futamix.service import create_app


@pytest.fixture(scope="module")
def client(shared):
    # `shared` warms the projection cache so app startup is cheap
    return TestClient(create_app())


@pytest.fixture(scope="module")
def coffee_id(client):
    r = client.post("/dialogs", json={"source": fixture_text("coffee")})
    assert r.status_code == 200
    return r.json()["dialog_id"]


def test_healthz(client):
    payload = client.get("/healthz").json()
    assert payload == {"schema_version": "1", "status": "ok"}


def test_register_coffee(client, coffee_id):
    r = client.get("/dialogs").json()
    rec = next(d for d in r["dialogs"] if d["dialog_id"] == coffee_id)
    assert rec["name"] == "coffee"
    assert [p["id"] for p in rec["prompts"]] == ["size", "blend", "cream"]
    assert rec["prompts"][0]["choices"] == ["small", "medium", "large"]
    assert rec["engines"] == ["interp", "stager", "compiled", "cogen"]


def test_register_empty_dialog(client):
    r = client.post("/dialogs", json={"source": fixture_text("empty")})
    assert r.status_code == 200
    assert r.json()["prompts"] == []
    sid = client.post("/sessions", json={"dialog_id": r.json()["dialog_id"],
                                         "engine": "stager"}).json()
    assert sid["outcome"]["kind"] == "done"


def test_register_duplicate_gets_new_id(client, coffee_id):
    r = client.post("/dialogs", json={"source": fixture_text("coffee")})
    assert r.status_code == 200 and r.json()["dialog_id"] != coffee_id


def test_register_invalid_dialog_400(client):
    r = client.post("/dialogs", json={"source": "(dialog broken"})
    assert r.status_code == 400
    assert "schema_version" in r.json()


@pytest.mark.parametrize("engine", ["interp", "stager", "compiled", "cogen"])
def test_engine_invariance(client, coffee_id, engine):
    """For a fixed response sequence the outcome stream is identical across
    engines."""
    r = client.post("/sessions", json={"dialog_id": coffee_id, "engine": engine})
    assert r.status_code == 200
    sid = r.json()["session_id"]
    stream = [r.json()["outcome"]]
    for v in ("small", "dark", "no"):
        rr = client.post(f"/sessions/{sid}/responses", json={"value": v})
        assert rr.status_code == 200
        stream.append(rr.json()["outcome"])
    assert stream[0] == {"kind": "need", "prompt_id": "size",
                         "text": "What size?",
                         "choices": ["small", "medium", "large"]}
    assert stream[-1] == {"kind": "done", "message": "coffee as ordered",
                          "echo": [["size", "small"], ["blend", "dark"],
                                   ["cream", "no"]]}
    get = client.get(f"/sessions/{sid}").json()
    assert get["transcript"] == [["size", "small"], ["blend", "dark"],
                                 ["cream", "no"]]


def test_bad_value_422_keeps_prompt(client, coffee_id):
    sid = client.post("/sessions", json={"dialog_id": coffee_id,
                                         "engine": "interp"}).json()["session_id"]
    r = client.post(f"/sessions/{sid}/responses", json={"value": "huge"})
    assert r.status_code == 422
    assert r.json()["choices"] == ["small", "medium", "large"]
    state = client.get(f"/sessions/{sid}").json()
    assert state["outcome"]["prompt_id"] == "size"  # unchanged
    assert state["transcript"] == []


def test_respond_after_done_409(client, coffee_id):
    sid = client.post("/sessions", json={"dialog_id": coffee_id,
                                         "engine": "cogen"}).json()["session_id"]
    for v in ("small", "dark", "no"):
        client.post(f"/sessions/{sid}/responses", json={"value": v})
    r = client.post(f"/sessions/{sid}/responses", json={"value": "small"})
    assert r.status_code == 409


def test_unknown_ids(client):
    assert client.post("/sessions", json={"dialog_id": "zzz"}).status_code == 404
    assert client.post("/sessions/zzz/responses",
                       json={"value": "x"}).status_code == 404
    assert client.get("/sessions/zzz").status_code == 404
    assert client.get("/dialogs/zzz/artifacts").status_code == 404
    r = client.post("/sessions", json={"dialog_id": "zzz", "engine": "warp"})
    assert r.status_code == 404


def test_unknown_engine_400(client, coffee_id):
    r = client.post("/sessions", json={"dialog_id": coffee_id, "engine": "warp"})
    assert r.status_code == 400


def test_artifacts_endpoint(client, coffee_id):
    r = client.get(f"/dialogs/{coffee_id}/artifacts")
    assert r.status_code == 200
    j = r.json()
    assert j["structural_identity"] is True
    arts = j["artifacts"]
    assert set(arts) == {"dialog", "stager", "stager_compiled", "compiler", "cogen"}
    # the stager does not traverse dialog structure atoms at runtime
    assert "(program" in arts["stager"]
    assert len(j["step_table"]) == 12
    for row in j["step_table"]:
        assert row["stager_steps"] < row["interp_steps"]


def test_journal_replay(tmp_path, shared):
    journal = tmp_path / "journal.jsonl"
    app = create_app(journal=journal)
    c = TestClient(app)
    did = c.post("/dialogs", json={"source": fixture_text("coffee")}).json()["dialog_id"]
    sid = c.post("/sessions", json={"dialog_id": did,
                                    "engine": "stager"}).json()["session_id"]
    c.post(f"/sessions/{sid}/responses", json={"value": "small"})

    # a fresh app over the same journal resumes the same state
    app2 = create_app(journal=journal)
    c2 = TestClient(app2)
    state = c2.get(f"/sessions/{sid}").json()
    assert state["transcript"] == [["size", "small"]]
    assert state["outcome"]["prompt_id"] == "blend"
    r = c2.post(f"/sessions/{sid}/responses", json={"value": "dark"})
    assert r.status_code == 200


def test_fixture_preregistration(shared):
    app = create_app(fixture_sources=[fixture_text("empty")])
    c = TestClient(app)
    dialogs = c.get("/dialogs").json()["dialogs"]
    assert [d["name"] for d in dialogs] == ["empty"]
