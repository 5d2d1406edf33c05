"""Mission service: lifecycle, interactions, state, event stream."""

import json

import pytest
from fastapi.testclient import TestClient

from hotl.server import create_app


@pytest.fixture()
def client():
    app = create_app(tick_seconds=0.0)
    with TestClient(app) as c:
        c.app = app
        yield c


def start(client, scenario, **extra):
    resp = client.post("/missions", json={"scenario": scenario, **extra})
    assert resp.status_code == 200, resp.text
    return resp.json()["mission_id"]


def wait_finished(client, mission_id, timeout=30.0):
    runner = client.app.state.runners[mission_id]
    assert runner.wait_finished(timeout), "mission did not finish in time"


class TestLifecycle:
    def test_create_run_finish(self, client):
        mid = start(client, "s2_strainers")
        wait_finished(client, mid)
        state = client.get(f"/missions/{mid}/state").json()
        assert state["status"] == "finished"
        assert state["seq"] > 0

    def test_unknown_mission_404(self, client):
        assert client.get("/missions/m-99/state").status_code == 404

    def test_bad_scenario_422(self, client):
        assert client.post("/missions", json={"scenario": {"name": "x"}}).status_code == 422

    def test_pause_resume(self, client):
        mid = start(client, "s3_confirmation", start_paused=True)
        state = client.get(f"/missions/{mid}/state").json()
        assert state["status"] == "paused"
        assert state["tick"] == 0
        client.post(f"/missions/{mid}/resume")
        wait_finished(client, mid)


class TestInteractions:
    def test_interaction_ack_and_effect(self, client):
        mid = start(client, "s1_rescue_strategy", start_paused=True)
        resp = client.post(
            f"/missions/{mid}/interactions",
            json={
                "kind": "provided-information",
                "issuer": "op1",
                "belief": {
                    "key": "boat.eta",
                    "level": 3,
                    "value": {"kind": "duration", "value": 600.0},
                    "source": {"kind": "human", "origin": "op1"},
                    "tick": 1,
                },
            },
        )
        assert resp.status_code == 200
        seq = resp.json()["seq"]
        assert seq >= 1
        client.post(f"/missions/{mid}/resume")
        wait_finished(client, mid)
        state = client.get(f"/missions/{mid}/state").json()
        assert state["beliefs"]["uav1"]["boat.eta"]["value"]["value"] == 600.0
        chosen = [d["chosen"] for d in state["decisions"].values()
                  if d["decision_kind"] == "rescue-strategy"]
        assert "deliver-flotation" in chosen

    def test_malformed_interaction_422(self, client):
        mid = start(client, "s2_strainers", start_paused=True)
        resp = client.post(f"/missions/{mid}/interactions", json={"kind": "telepathy"})
        assert resp.status_code == 422

    def test_interaction_after_finish_409(self, client):
        mid = start(client, "s2_strainers")
        wait_finished(client, mid)
        resp = client.post(
            f"/missions/{mid}/interactions",
            json={
                "kind": "issued-command",
                "issuer": "op1",
                "target": "uav1",
                "command": {"kind": "rtl"},
            },
        )
        assert resp.status_code == 409


class TestDecisions:
    def test_decision_lookup(self, client):
        mid = start(client, "s2_strainers")
        wait_finished(client, mid)
        state = client.get(f"/missions/{mid}/state").json()
        some_id = sorted(state["decisions"])[0]
        rec = client.get(f"/missions/{mid}/decisions/{some_id}").json()
        assert rec["decision_id"] == some_id
        assert "rationale" in rec

    def test_unknown_decision_404(self, client):
        mid = start(client, "s2_strainers")
        wait_finished(client, mid)
        assert client.get(f"/missions/{mid}/decisions/d-999").status_code == 404


class TestEventStream:
    def test_full_feed_matches_state_seq(self, client):
        mid = start(client, "s5_rtl_override")
        wait_finished(client, mid)
        events = []
        with client.websocket_connect(f"/missions/{mid}/events?from=1") as ws:
            while True:
                try:
                    events.append(json.loads(ws.receive_text()))
                except Exception:
                    break
        state = client.get(f"/missions/{mid}/state").json()
        assert [e["seq"] for e in events] == list(range(1, state["seq"] + 1))

    def test_resume_from_seq_has_no_gaps(self, client):
        mid = start(client, "s5_rtl_override")
        wait_finished(client, mid)
        with client.websocket_connect(f"/missions/{mid}/events?from=4") as ws:
            first = json.loads(ws.receive_text())
        assert first["seq"] == 4
