"""Session-oriented HTTP API over the engine.

One writer at a time per session (a per-session lock serializes mutating
actions); reads hit the latest immutable state freely. Clients may send
``expected_state_version`` with an action and get a 409 when the session has
moved on under them.

Endpoints:
    POST /sessions                              create a session
    POST /sessions/{id}/actions                 {action, params, expected_state_version}
    GET  /sessions/{id}/state
    GET  /sessions/{id}/log                     replayable action log
    GET  /sessions/{id}/eventbox?...            EventBox payload for query params
    GET  /sessions/{id}/report?format=json|md
    GET  /sessions/{id}/panels/{name}           events|clusters|unique|individual|attributes
"""

from __future__ import annotations

import itertools
import json
import threading
from typing import Any

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from . import engine
from .errors import (
    ConfigError,
    EmptyDatasetError,
    EmptyInputError,
    InsufficientDataError,
    NotFoundError,
    NumericError,
    ParseError,
    QueryTypeError,
    SchemaError,
    SeqboxError,
    StaleSelectionError,
    StateError,
    UnknownAttributeError,
)

_STATUS: list[tuple[type, int]] = [
    (NotFoundError, 404),
    (StaleSelectionError, 409),
    (ParseError, 400),
    (QueryTypeError, 400),
    (UnknownAttributeError, 400),
    (SchemaError, 400),
    (ConfigError, 400),
    (EmptyDatasetError, 400),
    (EmptyInputError, 400),
    (InsufficientDataError, 400),
    (NumericError, 400),
    (StateError, 409),
]


class ActionRequest(BaseModel):
    action: str
    params: dict[str, Any] = {}
    expected_state_version: int | None = None


class SessionRequest(BaseModel):
    snapshot_path: str | None = None


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, engine.Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._counter = itertools.count(1)
        self._guard = threading.Lock()
        self.snapshot_paths: dict[str, str] = {}

    def create(self, snapshot_path: str | None = None) -> engine.Session:
        with self._guard:
            sid = f"session-{next(self._counter)}"
            session = engine.Session(session_id=sid)
            self._sessions[sid] = session
            self._locks[sid] = threading.Lock()
            if snapshot_path:
                self.snapshot_paths[sid] = snapshot_path
            return session

    def get(self, sid: str) -> engine.Session:
        session = self._sessions.get(sid)
        if session is None:
            raise NotFoundError(f"unknown session {sid!r}")
        return session

    def lock(self, sid: str) -> threading.Lock:
        return self._locks[sid]


def _status_for(exc: SeqboxError) -> int:
    for etype, code in _STATUS:
        if isinstance(exc, etype):
            return code
    return 400


def create_app(frontend_dir: str | None = None) -> FastAPI:
    """Build the API app; ``frontend_dir`` also serves the browser UI from /."""
    app = FastAPI(title="seqbox", version="0.1.0")
    store = SessionStore()
    app.state.store = store

    @app.exception_handler(SeqboxError)
    async def _seqbox_error(_request: Request, exc: SeqboxError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.post("/sessions")
    def create_session(body: SessionRequest | None = None):
        session = store.create(body.snapshot_path if body else None)
        return {"session_id": session.session_id, "state_version": session.state_version}

    @app.post("/sessions/{sid}/actions")
    def post_action(sid: str, body: ActionRequest):
        session = store.get(sid)
        if body.action in engine.MUTATING_ACTIONS:
            with store.lock(sid):
                _check_expected(session, body)
                payload = engine.apply_action(session, body.action, body.params)
                _snapshot(store, session)
                return payload
        _check_expected(session, body)
        return engine.apply_action(session, body.action, body.params)

    @app.get("/sessions/{sid}/state")
    def get_state(sid: str):
        return engine.session_state(store.get(sid))

    @app.get("/sessions/{sid}/log")
    def get_log(sid: str):
        session = store.get(sid)
        return {
            "state_version": session.state_version,
            "actions": list(session.action_log),
        }

    @app.get("/sessions/{sid}/eventbox")
    def get_eventbox(
        sid: str,
        event_type: str,
        p_h: str | None = None,
        p_v: str | None = None,
        s_h: str | None = None,
        s_v: str | None = None,
        b: str | None = None,
        bins_h: int | None = None,
        bins_v: int | None = None,
        show_outliers: bool | None = None,
        whisker: float | None = None,
        top_k: int | None = None,
        density_cols: int | None = None,
        density_rows: int | None = None,
    ):
        session = store.get(sid)
        params = {
            "event_type": event_type,
            "p_h": p_h,
            "p_v": p_v,
            "s_h": s_h,
            "s_v": s_v,
            "b": b,
            "bins_h": bins_h,
            "bins_v": bins_v,
            "show_outliers": show_outliers,
            "whisker": whisker,
            "top_k": top_k,
            "density_cols": density_cols,
            "density_rows": density_rows,
        }
        params = {k: v for k, v in params.items() if v is not None}
        return {
            "eventbox": engine.eventbox_payload(session, params),
            "state_version": session.state_version,
        }

    @app.get("/sessions/{sid}/report")
    def get_report(
        sid: str,
        format: str = "json",
        response: str | None = None,
        max_order: int | None = None,
        alpha: float | None = None,
        continuous: str | None = None,
        categorical: str | None = None,
    ):
        session = store.get(sid)
        params: dict[str, Any] = {}
        if response is not None:
            params["response"] = response
        if max_order is not None:
            params["max_order"] = max_order
        if alpha is not None:
            params["alpha"] = alpha
        if continuous is not None:
            params["continuous"] = continuous.split(",")
        if categorical is not None:
            params["categorical"] = categorical.split(",")
        report = engine.build_report(session, params)
        if format == "md":
            return PlainTextResponse(report.to_markdown(), media_type="text/markdown")
        return {"report": report.to_obj(), "state_version": session.state_version}

    @app.get("/sessions/{sid}/panels/{panel}")
    def get_panel(sid: str, panel: str):
        session = store.get(sid)
        handler = engine.PANELS.get(panel)
        if handler is None:
            raise HTTPException(status_code=404, detail=f"unknown panel {panel!r}")
        payload = handler(session)
        payload["state_version"] = session.state_version
        return payload

    if frontend_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app


def _check_expected(session: engine.Session, body: ActionRequest) -> None:
    if (
        body.expected_state_version is not None
        and body.expected_state_version != session.state_version
    ):
        raise StateError(
            f"state version moved to {session.state_version}, "
            f"client expected {body.expected_state_version}"
        )


def _snapshot(store: SessionStore, session: engine.Session) -> None:
    path = store.snapshot_paths.get(session.session_id)
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"actions": session.action_log}, fh, indent=2)


app = create_app()
