"""HTTP and WebSocket service exposing play sessions.

The engine stays synchronous; endpoints run in the threadpool with one
lock per session. The event stream is a WebSocket that replays history
from a client-chosen sequence number and then follows new events, so a
console can reconnect without losing turns.

Errors surface as problem bodies ``{"code": ..., "message": ...}`` with
the mapped status: unknown things 404, state conflicts 409, finished
sessions 410, bad input 422.
"""

from __future__ import annotations

import asyncio
import threading
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .config import EngineConfig
from .engine import InterviewSession, PlaySession
from .errors import (
    CooldownViolation,
    NotPaused,
    ParseError,
    SessionFinished,
    SessionNotRunning,
    StagecraftError,
    UnknownAct,
    UnknownRole,
    UnknownSession,
    ValidationError,
)
from .gateway import ScriptedBackend
from .record import export_play
from .script import ScriptSetting, load_demo_script

_ERROR_MAP = (
    (SessionFinished, 410, "finished"),
    (CooldownViolation, 409, "cooldown"),
    (SessionNotRunning, 409, "not_running"),
    (NotPaused, 409, "not_paused"),
    (UnknownAct, 404, "unknown_act"),
    (UnknownRole, 404, "unknown_role"),
    (UnknownSession, 404, "unknown_session"),
    (ValidationError, 422, "invalid"),
    (ParseError, 422, "invalid"),
)


def _map_error(exc: StagecraftError) -> tuple[int, str]:
    for kind, status, code in _ERROR_MAP:
        if isinstance(exc, kind):
            return status, code
    return 500, "internal"


def _problem(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


class CreateSessionBody(BaseModel):
    seed: int = 0
    check_policy: str = "after:2"
    config: dict = Field(default_factory=dict)


class AdvanceBody(BaseModel):
    ticks: int = 1


class SpeakBody(BaseModel):
    act_id: str
    text: str


class InterviewBody(BaseModel):
    act_id: str
    role: str
    question: str


class _Entry:
    def __init__(self, session: PlaySession):
        self.session = session
        self.lock = threading.Lock()
        self.interviews: dict[tuple[str, str], InterviewSession] = {}


def _session_overview(session: PlaySession) -> dict:
    return {
        "session_id": session.session_id,
        "title": session.setting.title,
        "status": session.status,
        "tick": session.tick_count,
        "column": session.column,
        "events": len(session.events),
    }


def _session_detail(session: PlaySession) -> dict:
    detail = _session_overview(session)
    detail["player_role"] = session.setting.player_role
    detail["max_column"] = session.setting.max_column
    detail["acts"] = [
        {
            "id": run.act.id,
            "place": run.act.place,
            "column": run.act.column,
            "characters": list(run.act.characters),
            "complete": run.complete,
            "objective_index": run.objective_index,
            "objective_count": len(run.act.objectives),
            "turns_on_objective": run.turns_on_objective,
            "pending_player": run.pending_player is not None,
            "log": [
                {"role": turn.role, "text": turn.utterance, "tick": turn.tick}
                for turn in run.log
            ],
        }
        for run in session.acts
    ]
    return detail


def create_app(
    setting: ScriptSetting | None = None,
    default_config: EngineConfig | None = None,
    backend_factory=None,
    console_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service around one script setting.

    ``backend_factory(config, check_policy)`` supplies the model backend
    for each new session; the default is the deterministic scripted one.
    """
    play_setting = setting if setting is not None else load_demo_script()
    base_config = default_config if default_config is not None else EngineConfig()
    if backend_factory is None:

        def backend_factory(config: EngineConfig, check_policy: str):
            return ScriptedBackend(seed=config.seed, check_policy=check_policy)

    app = FastAPI(title="stagecraft", version="0.1.0")
    entries: dict[str, _Entry] = {}

    @app.exception_handler(StagecraftError)
    async def stagecraft_error(request, exc: StagecraftError):
        status, code = _map_error(exc)
        return _problem(status, code, str(exc))

    def _entry(session_id: str) -> _Entry:
        entry = entries.get(session_id)
        if entry is None:
            raise UnknownSession("no session %r" % session_id)
        return entry

    @app.get("/api/sessions")
    def list_sessions():
        return {
            "sessions": [_session_overview(entry.session) for entry in entries.values()]
        }

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        overrides = dict(body.config)
        overrides["seed"] = body.seed
        config = base_config.replace(**overrides)
        try:
            backend = backend_factory(config, body.check_policy)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        session = PlaySession(play_setting, config=config, backend=backend)
        if session.session_id in entries:
            return _problem(
                409,
                "session_exists",
                "session %r already exists (same seed)" % session.session_id,
            )
        entries[session.session_id] = _Entry(session)
        return _session_detail(session)

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_detail(_entry(session_id).session)

    @app.get("/api/sessions/{session_id}/events")
    def get_events(session_id: str, from_sequence: int = 0):
        """Events with sequence >= from_sequence; 0 replays the whole run."""
        session = _entry(session_id).session
        return {
            "events": [
                event.to_json_obj()
                for event in session.events
                if event.sequence >= from_sequence
            ],
            "status": session.status,
        }

    @app.post("/api/sessions/{session_id}/advance")
    def advance(session_id: str, body: AdvanceBody):
        entry = _entry(session_id)
        ticks = max(1, min(int(body.ticks), 200))
        events = []
        with entry.lock:
            if entry.session.status == "paused":
                raise SessionNotRunning("session is paused")
            if entry.session.status == "finished":
                raise SessionFinished("session has finished")
            for _ in range(ticks):
                # finishing mid-batch is fine; report what was played
                if entry.session.status != "running":
                    break
                events.extend(entry.session.tick())
        return {
            "events": [event.to_json_obj() for event in events],
            "status": entry.session.status,
            "tick": entry.session.tick_count,
        }

    @app.post("/api/sessions/{session_id}/speak")
    def speak(session_id: str, body: SpeakBody):
        entry = _entry(session_id)
        with entry.lock:
            entry.session.player_speak(body.act_id, body.text)
        return {"queued": True, "act_id": body.act_id}

    @app.post("/api/sessions/{session_id}/pause")
    def pause(session_id: str):
        entry = _entry(session_id)
        with entry.lock:
            entry.session.pause()
        return {"status": entry.session.status}

    @app.post("/api/sessions/{session_id}/resume")
    def resume(session_id: str):
        entry = _entry(session_id)
        with entry.lock:
            entry.session.resume()
            entry.interviews.clear()
        return {"status": entry.session.status}

    @app.post("/api/sessions/{session_id}/interview")
    def interview(session_id: str, body: InterviewBody):
        entry = _entry(session_id)
        with entry.lock:
            key = (body.act_id, body.role)
            interview_session = entry.interviews.get(key)
            if interview_session is None:
                interview_session = entry.session.interview(body.act_id, body.role)
                entry.interviews[key] = interview_session
            answer = interview_session.ask(body.question)
        return {
            "act_id": body.act_id,
            "role": body.role,
            "question": body.question,
            "answer": answer,
            "exchanges": len(interview_session.history),
        }

    @app.get("/api/sessions/{session_id}/export")
    def export(session_id: str):
        entry = _entry(session_id)
        with entry.lock:
            return export_play(entry.session)

    @app.websocket("/api/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str, from_sequence: int = 0):
        await websocket.accept()
        entry = entries.get(session_id)
        if entry is None:
            await websocket.send_json(
                {"kind": "Error", "code": "unknown_session", "message": session_id}
            )
            await websocket.close()
            return
        cursor = from_sequence
        try:
            while True:
                # events list is append-only, so scanning without the lock is safe
                pending = [e for e in entry.session.events if e.sequence >= cursor]
                for event in pending:
                    await websocket.send_json(event.to_json_obj())
                    cursor = event.sequence + 1
                if entry.session.status == "finished" and not pending:
                    await websocket.send_json({"kind": "StreamEnd", "sequence": cursor})
                    await websocket.close()
                    return
                await asyncio.sleep(0.05)
        except WebSocketDisconnect:
            return

    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/console", StaticFiles(directory=str(console_dir), html=True), name="console")

        @app.get("/", include_in_schema=False)
        def index():
            return RedirectResponse(url="/console/")

    else:

        @app.get("/", include_in_schema=False)
        def index():
            return {"service": "stagecraft", "title": play_setting.title}

    return app
