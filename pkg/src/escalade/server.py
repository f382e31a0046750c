"""HTTP session API over :mod:`escalade.sessions`.

The server is deliberately thin: request bodies are validated by the session
layer (bad answers surface as 400 with the parse message), and every response
is the session's ``view()`` so clients never assemble state from fragments.
The walkthrough frontend talks only to these endpoints; it never computes a
classification itself.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from . import __version__
from .config import EngineConfig
from .model import ModelError, parse_timestamp
from .sessions import SessionError, SessionStore, UnknownSessionError


def create_app(store: SessionStore | None = None) -> FastAPI:
    if store is None:
        store = SessionStore()

    app = FastAPI(title="escalade session API", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    def _get(session_id: str):
        try:
            return store.get(session_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}") from None

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok", "version": __version__}

    @app.get("/sessions")
    def list_sessions() -> list[dict[str, Any]]:
        return [session.view() for session in store.list_sessions()]

    @app.post("/sessions", status_code=201)
    def create_session(body: Mapping[str, Any]) -> dict[str, Any]:
        try:
            session = store.create(
                title=str(body.get("title", "Untitled incident")),
                occurred_at=parse_timestamp(body.get("occurred_at"), "occurred_at"),
                reported_at=parse_timestamp(body.get("reported_at"), "reported_at"),
                record_id=body.get("record_id"),
            )
        except ModelError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return session.view()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        return _get(session_id).view()

    @app.post("/sessions/{session_id}/answers")
    def post_answer(session_id: str, body: Mapping[str, Any]) -> dict[str, Any]:
        session = _get(session_id)
        gate = body.get("gate")
        if not isinstance(gate, str):
            raise HTTPException(status_code=400, detail="body must name the gate being answered")
        payload = body.get("answer")
        if not isinstance(payload, Mapping):
            raise HTTPException(status_code=400, detail="body must carry an answer object")
        try:
            session = store.answer(session_id, gate, payload)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except ModelError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return session.view()

    @app.get("/sessions/{session_id}/record")
    def get_record(session_id: str) -> dict[str, Any]:
        session = _get(session_id)
        return {
            "complete": session.status == "complete",
            "record": session.build_record().to_dict(),
        }

    @app.post("/sessions/{session_id}/fork", status_code=201)
    def fork_session(session_id: str, body: Mapping[str, Any] | None = None) -> dict[str, Any]:
        body = body or {}
        _get(session_id)
        try:
            fork = store.fork(
                session_id,
                up_to=body.get("up_to"),
                new_title=body.get("title"),
            )
        except SessionError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return fork.view()

    return app


def serve(
    host: str = "127.0.0.1",
    port: int = 8787,
    journal_path: str | Path | None = None,
    config: EngineConfig | None = None,
) -> None:
    """Run the session API under uvicorn (blocking)."""
    import uvicorn

    app = create_app(SessionStore(journal_path=journal_path, config=config))
    uvicorn.run(app, host=host, port=port, log_level="warning")
