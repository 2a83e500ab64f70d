"""Streaming session service: WebSocket events in, engine actions out.

HTTP surface:

* ``POST /sessions`` — create a session, returns ``{"session": id}``.
* ``GET /sessions/{id}/state`` — tree and history snapshot.
* ``GET /healthz`` — liveness probe.
* ``WS /ws`` — client messages route to the session named in each message;
  every action the event produced is sent back as one JSON text frame.
* ``/ui`` — the browser console, when a static directory is provided.

Handling is serialized per session with an asyncio lock, so concurrent
timers and socket reads never interleave inside one session.  Silence
timers are scheduled on the event loop and injected as engine events.
"""

from __future__ import annotations

import asyncio
import json
import logging
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .config import EngineConfig
from .history import Speaker
from .orchestrator import Engine, SequenceError, Session, TimerEvent
from .wire import WireError, decode_client_message, encode_action

logger = logging.getLogger(__name__)


def create_app(config: EngineConfig, *, ui_dir: Path | str | None = None) -> FastAPI:
    app = FastAPI(title="spotdialog engine")
    engine = Engine(config)
    locks: dict[str, asyncio.Lock] = {}
    timers: dict[str, asyncio.Task] = {}
    app.state.engine = engine

    def lock_for(session_id: str) -> asyncio.Lock:
        return locks.setdefault(session_id, asyncio.Lock())

    @app.get("/healthz")
    async def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/sessions")
    async def create_session() -> dict:
        session = engine.create_session()
        return {"session": session.id}

    @app.get("/sessions/{session_id}/state")
    async def session_state(session_id: str) -> dict:
        session = engine.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return {
            "session": session.id,
            "tree": session.tree.to_dict(),
            "history": [
                {
                    "speaker": turn.speaker.value,
                    "text": turn.text,
                    "index": turn.index,
                    "act": turn.act.act_type.value
                    if turn.speaker is Speaker.SYSTEM and turn.act
                    else None,
                }
                for turn in session.history.turns
            ],
        }

    def cancel_timer(session_id: str) -> None:
        task = timers.pop(session_id, None)
        if task is not None:
            task.cancel()

    def arm_timer(websocket: WebSocket, session: Session) -> None:
        cancel_timer(session.id)
        due = engine.next_timer_due(session)
        if due is None:
            return

        async def fire() -> None:
            await asyncio.sleep(config.silence_timeout_ms / 1000.0)
            async with lock_for(session.id):
                actions = engine.handle_event(
                    session, TimerEvent(session_id=session.id, due_ms=due)
                )
                for action in actions:
                    await websocket.send_text(json.dumps(encode_action(action)))
            timers.pop(session.id, None)
            arm_timer(websocket, session)

        timers[session.id] = asyncio.create_task(fire())

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        touched: set[str] = set()
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    message = json.loads(raw)
                    event = decode_client_message(message)
                except (json.JSONDecodeError, WireError) as exc:
                    await websocket.send_text(
                        json.dumps({"type": "error", "message": str(exc)})
                    )
                    continue
                session = engine.sessions.get(event.session_id)
                if session is None:
                    await websocket.send_text(
                        json.dumps(
                            {"type": "error", "message": "unknown session"}
                        )
                    )
                    continue
                touched.add(session.id)
                async with lock_for(session.id):
                    try:
                        actions = engine.handle_event(session, event)
                    except SequenceError as exc:
                        await websocket.send_text(
                            json.dumps({"type": "error", "message": str(exc)})
                        )
                        continue
                    for action in actions:
                        await websocket.send_text(
                            json.dumps(encode_action(action))
                        )
                arm_timer(websocket, session)
        except WebSocketDisconnect:
            for session_id in touched:
                cancel_timer(session_id)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
