"""HTTP service for multi-turn guided runs.

Endpoints (all JSON):

    POST /sessions                    -> {session_id}
    GET  /sessions/{sid}              -> session record view
    POST /sessions/{sid}/runs         -> {run_id}; 409 while busy
    GET  /sessions/{sid}/runs/{rid}   -> status or the result payload
    GET  /healthz

A submitted instruction validates its overrides first, then plans through
the guidance backend, then executes the episode on a worker thread; request
handling never blocks on the simulation. Results are read back from the
persisted run log, so every payload value traces to stored artifacts.
"""

from __future__ import annotations

import json
import threading
import traceback
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from ..control.episode import CONTROLLER_KINDS, run_episode
from ..guidance.backends import ChatBackend, MockBackend
from ..guidance.schema import SchemaValidationError
from ..guidance.session import SessionState, apply_executables, digest_run, llm_plan
from ..runlog import RunLog
from ..scenario import FRICTION_CLASSES, FrictionSpec, Scenario, icy_scenario
from .store import SessionRecord, SessionStore

TRAJECTORY_POINT_CAP = 400


class RunRequest(BaseModel):
    instruction: str = Field(min_length=1)
    seed: int = 0
    controller: str = "apsc-filter"
    mc_budget: int | None = Field(default=None, ge=1)
    overrides: dict = Field(default_factory=dict)


_ALLOWED_OVERRIDES = {"duration_s", "road_class"}


def _apply_overrides(base: Scenario, overrides: dict) -> Scenario:
    unknown = set(overrides) - _ALLOWED_OVERRIDES
    if unknown:
        raise HTTPException(status_code=422, detail={
            "code": "invalid_override", "fields": sorted(unknown)})
    sc = base
    if "duration_s" in overrides:
        v = overrides["duration_s"]
        if not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0:
            raise HTTPException(status_code=422, detail={
                "code": "invalid_override", "fields": ["duration_s"]})
        sc = sc.with_updates(duration_s=float(v))
    if "road_class" in overrides:
        v = overrides["road_class"]
        if v not in FRICTION_CLASSES:
            raise HTTPException(status_code=422, detail={
                "code": "invalid_override", "fields": ["road_class"]})
        sc = sc.with_updates(friction=FrictionSpec(kind="class", name=v))
    return sc


def _downsample_indices(abs_e: np.ndarray, cap: int) -> np.ndarray:
    """Uniform picks plus endpoints and the |e| extrema, sorted unique."""
    n = abs_e.size
    if n <= cap:
        return np.arange(n)
    picks = np.linspace(0, n - 1, cap - 2, dtype=int)
    keep = np.concatenate([picks, [0, n - 1, int(abs_e.argmax()), int(abs_e.argmin())]])
    return np.unique(keep)


def result_payload(run_dir: Path) -> dict:
    log = RunLog.read(run_dir)
    guidance = json.loads((run_dir / "guidance.json").read_text())
    rows = log.rows
    abs_e = np.array([abs(r.state[10]) for r in rows])
    idx = _downsample_indices(abs_e, TRAJECTORY_POINT_CAP)
    trajectory = [{
        "t": rows[i].t, "s": rows[i].state[9], "e": rows[i].state[10],
        "v_x": rows[i].state[0], "safety_prob": rows[i].safety_prob,
    } for i in idx]
    posterior = [{"t": r.t, "mean": r.belief_mean, "var": r.belief_var} for r in rows]
    return {
        "rationale": guidance["rationale"],
        "executables": guidance["executables"],
        "instruction": guidance["instruction"],
        "metrics": log.metrics.to_dict(),
        "digest": guidance["digest"],
        "trajectory": trajectory,
        "posterior": posterior,
        "scenario_hash": log.scenario_hash,
        "seed": log.seed,
        "true_mu": log.true_mu,
        "e_max": log.scenario_dict["e_max"],
        "road_segments": log.scenario_dict["road_segments"],
    }


def create_app(data_dir: str | Path, backend: ChatBackend | None = None,
               base_scenario: Scenario | None = None,
               synchronous: bool = False) -> FastAPI:
    """Build the service; synchronous=True runs episodes inline (tests)."""
    store = SessionStore(data_dir)
    store.sweep_interrupted()
    backend = backend or MockBackend()
    base = base_scenario or icy_scenario()
    app = FastAPI(title="psclab session service")
    locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def lock_for(sid: str) -> threading.Lock:
        with locks_guard:
            return locks.setdefault(sid, threading.Lock())

    def get_record(sid: str) -> SessionRecord:
        rec = store.load(sid)
        if rec is None:
            raise HTTPException(status_code=404, detail={"code": "unknown_session"})
        return rec

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/sessions", status_code=201)
    def create_session():
        rec = store.create()
        return {"session_id": rec.session_id}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return get_record(sid).to_dict()

    @app.post("/sessions/{sid}/runs", status_code=202)
    def submit(sid: str, req: RunRequest):
        if req.controller not in CONTROLLER_KINDS:
            raise HTTPException(status_code=422, detail={
                "code": "invalid_controller", "allowed": list(CONTROLLER_KINDS)})
        scenario = _apply_overrides(base, req.overrides)

        with lock_for(sid):
            rec = get_record(sid)
            if rec.status in ("planning", "running"):
                raise HTTPException(status_code=409, detail={"code": "session_busy"})
            rid = f"run{len(rec.runs):03d}"
            rec.status = "planning"
            rec.runs.append({"run_id": rid, "status": "planning",
                             "instruction": req.instruction})
            store.save(rec)

        def execute():
            session = SessionState.from_dict(rec.session) if rec.session else SessionState()
            try:
                rationale, ex = llm_plan(session, req.instruction, backend)
            except (SchemaValidationError, Exception) as e:  # planning failure
                with lock_for(sid):
                    cur = store.load(sid)
                    cur.status = "error"
                    cur.last_error = f"planning failed: {e}"
                    cur.runs[-1]["status"] = "error"
                    cur.runs[-1]["error"] = str(e)
                    store.save(cur)
                return
            sc = apply_executables(scenario, ex)
            with lock_for(sid):
                cur = store.load(sid)
                cur.status = "running"
                cur.runs[-1]["status"] = "running"
                store.save(cur)
            try:
                log = run_episode(sc, req.controller, req.seed, mc_samples=req.mc_budget)
                run_dir = store.run_dir(sid, rid)
                log.write(run_dir)
                digest = digest_run(log)
                (run_dir / "guidance.json").write_text(json.dumps({
                    "instruction": req.instruction,
                    "rationale": rationale,
                    "executables": ex.to_dict(),
                    "digest": digest,
                }, indent=2, sort_keys=True))
                session.record_turn(req.instruction, ex)
                session.record_digest(digest)
                with lock_for(sid):
                    cur = store.load(sid)
                    cur.session = session.to_dict()
                    cur.status = "done"
                    cur.runs[-1]["status"] = "done"
                    store.save(cur)
            except Exception as e:
                with lock_for(sid):
                    cur = store.load(sid)
                    cur.status = "error"
                    cur.last_error = f"run failed: {e}\n{traceback.format_exc()}"
                    cur.runs[-1]["status"] = "error"
                    cur.runs[-1]["error"] = str(e)
                    store.save(cur)

        if synchronous:
            execute()
        else:
            threading.Thread(target=execute, daemon=True).start()
        return {"run_id": rid}

    @app.get("/sessions/{sid}/runs/{rid}")
    def get_run(sid: str, rid: str):
        rec = get_record(sid)
        entry = next((r for r in rec.runs if r["run_id"] == rid), None)
        if entry is None:
            raise HTTPException(status_code=404, detail={"code": "unknown_run"})
        if entry["status"] != "done":
            return {"run_id": rid, "status": entry["status"],
                    "error": entry.get("error")}
        payload = result_payload(store.run_dir(sid, rid))
        payload["run_id"] = rid
        payload["status"] = "done"
        return payload

    return app
