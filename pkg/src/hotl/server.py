"""HTTP + WebSocket mission service.

One engine loop per mission runs on a background thread; HTTP handlers
and stream subscribers only synchronize at the mission lock. Pausing
freezes ticks but keeps admitting interactions, which apply on resume.
"""

from __future__ import annotations

import asyncio
import threading
import time
from typing import Any

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from .engine import Mission
from .events import event_to_line
from .interaction import HumanInteraction, MalformedInteraction, NoSuchDecision
from .scenario import (
    SHIPPED_SCENARIOS,
    ScenarioError,
    load_scenario,
    load_shipped,
)


class MissionRunner:
    """Owns one mission and the thread that steps it."""

    def __init__(self, mission_id: str, mission: Mission, tick_seconds: float) -> None:
        self.mission_id = mission_id
        self.mission = mission
        self.tick_seconds = tick_seconds
        self.lock = threading.RLock()
        self.paused = threading.Event()
        self._thread = threading.Thread(target=self._loop, daemon=True)

    def start(self) -> None:
        self._thread.start()

    def _loop(self) -> None:
        while True:
            if self.paused.is_set():
                time.sleep(0.002)
                continue
            with self.lock:
                if self.mission.status != "running":
                    return
                self.mission.step()
            if self.tick_seconds:
                time.sleep(self.tick_seconds)

    @property
    def status(self) -> str:
        if self.mission.status == "running" and self.paused.is_set():
            return "paused"
        return self.mission.status

    def wait_finished(self, timeout: float = 30.0) -> bool:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self.lock:
                if self.mission.status == "finished":
                    return True
            time.sleep(0.002)
        return False


def create_app(tick_seconds: float = 0.0) -> FastAPI:
    app = FastAPI(title="hotl mission service")
    runners: dict[str, MissionRunner] = {}
    counter = {"n": 0}

    def runner_or_404(mission_id: str) -> MissionRunner:
        r = runners.get(mission_id)
        if r is None:
            raise HTTPException(status_code=404, detail=f"no mission {mission_id!r}")
        return r

    @app.post("/missions")
    def create_mission(body: dict[str, Any]) -> dict[str, Any]:
        scenario = body.get("scenario")
        if scenario is None:
            raise HTTPException(status_code=422, detail="body needs a scenario")
        try:
            if isinstance(scenario, str) and scenario in SHIPPED_SCENARIOS:
                spec = load_shipped(scenario)
            else:
                spec = load_scenario(scenario)
        except ScenarioError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        mission = Mission(spec, max_ticks=int(body.get("max_ticks", 300)))
        if body.get("transcript"):
            try:
                mission.add_transcript(
                    [(int(t), HumanInteraction.from_dict(d)) for t, d in body["transcript"]]
                )
            except MalformedInteraction as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        counter["n"] += 1
        mission_id = f"m-{counter['n']}"
        runner = MissionRunner(mission_id, mission, tick_seconds)
        if body.get("start_paused"):
            runner.paused.set()
        runners[mission_id] = runner
        runner.start()
        return {"mission_id": mission_id, "status": runner.status, "scenario": spec.name}

    @app.post("/missions/{mission_id}/interactions")
    def submit(mission_id: str, body: dict[str, Any]) -> dict[str, Any]:
        runner = runner_or_404(mission_id)
        try:
            hi = HumanInteraction.from_dict(body)
        except MalformedInteraction as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        with runner.lock:
            try:
                seq = runner.mission.submit_interaction(hi)
            except MalformedInteraction as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"seq": seq}

    @app.get("/missions/{mission_id}/state")
    def state(mission_id: str) -> dict[str, Any]:
        runner = runner_or_404(mission_id)
        with runner.lock:
            summary = runner.mission.state_summary()
        summary["status"] = runner.status if summary["status"] == "running" else summary["status"]
        summary["mission_id"] = mission_id
        summary["scenario"] = runner.mission.spec.name
        return summary

    @app.get("/missions/{mission_id}/decisions/{decision_id}")
    def decision(mission_id: str, decision_id: str) -> dict[str, Any]:
        runner = runner_or_404(mission_id)
        with runner.lock:
            try:
                return runner.mission.explain(decision_id)
            except NoSuchDecision as exc:
                raise HTTPException(status_code=404, detail=f"no decision {decision_id!r}") from exc

    @app.post("/missions/{mission_id}/pause")
    def pause(mission_id: str) -> dict[str, Any]:
        runner = runner_or_404(mission_id)
        runner.paused.set()
        return {"mission_id": mission_id, "status": runner.status}

    @app.post("/missions/{mission_id}/resume")
    def resume(mission_id: str) -> dict[str, Any]:
        runner = runner_or_404(mission_id)
        runner.paused.clear()
        return {"mission_id": mission_id, "status": runner.status}

    @app.websocket("/missions/{mission_id}/events")
    async def events(ws: WebSocket, mission_id: str) -> None:
        runner = runners.get(mission_id)
        await ws.accept()
        if runner is None:
            await ws.close(code=4404)
            return
        next_seq = int(ws.query_params.get("from", 1))
        try:
            while True:
                with runner.lock:
                    new = [e for e in runner.mission.log if e.seq >= next_seq]
                    finished = runner.mission.status == "finished"
                for ev in new:
                    await ws.send_text(event_to_line(ev))
                    next_seq = ev.seq + 1
                if finished and not new:
                    break
                await asyncio.sleep(0.005)
            await ws.close()
        except WebSocketDisconnect:
            pass

    app.state.runners = runners
    return app
