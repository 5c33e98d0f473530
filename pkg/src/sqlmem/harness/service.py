"""HTTP+JSON service over the session manager.

Endpoints (all JSON):

- ``POST   /sessions``                      -> {"session_id"}
- ``POST   /sessions/{id}/message``         {"text"} -> {"reply", "trace"}
- ``GET    /sessions/{id}/tables``          -> {"tables": [...]}
- ``GET    /sessions/{id}/tables/{name}``   ?limit= -> {"table","columns","rows","row_count"}
- ``POST   /sessions/{id}/snapshot``        {"label"?} -> {"snapshot": {...}}
- ``POST   /sessions/{id}/rollback``        {"snapshot": seq} -> {"ok", "sequence"}
- ``GET    /sessions/{id}/trace/{turn}``    -> trace document

Errors: 404 unknown session/table/turn/snapshot, 409 when a message is
already in flight for the session, 422 malformed bodies (FastAPI's
validation default).
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from ..errors import RollbackError
from ..planner.base import PlannerConfig
from .sessions import NotFound, SessionBusy, SessionManager


class CreateSessionBody(BaseModel):
    planner: dict = Field(default_factory=dict)


class MessageBody(BaseModel):
    text: str = Field(min_length=1)


class SnapshotBody(BaseModel):
    label: str = ""


class RollbackBody(BaseModel):
    snapshot: int


def create_app(
    state_dir: str | None = None,
    planner_config: PlannerConfig | None = None,
    manager: SessionManager | None = None,
) -> FastAPI:
    app = FastAPI(title="sqlmem", docs_url=None, redoc_url=None)
    # The companion UI may be served from another origin (static file server).
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    mgr = manager or SessionManager(state_dir=state_dir, planner_config=planner_config)
    app.state.manager = mgr

    @app.exception_handler(NotFound)
    async def _not_found(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(SessionBusy)
    async def _busy(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(
            status_code=409, content={"detail": "a message is already in flight for this session"}
        )

    @app.post("/sessions")
    def create_session(body: CreateSessionBody | None = None):
        overrides = body.planner if body is not None else {}
        try:
            session = mgr.create(overrides)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"session_id": session.id}

    @app.post("/sessions/{session_id}/message")
    def post_message(session_id: str, body: MessageBody):
        doc = mgr.message(session_id, body.text)
        return {"reply": doc["reply"], "trace": doc}

    @app.get("/sessions/{session_id}/tables")
    def get_tables(session_id: str):
        return {"tables": mgr.tables(session_id)}

    @app.get("/sessions/{session_id}/tables/{table}")
    def get_table_rows(session_id: str, table: str, limit: int = 50):
        return mgr.table_rows(session_id, table, limit=limit)

    @app.post("/sessions/{session_id}/snapshot")
    def post_snapshot(session_id: str, body: SnapshotBody | None = None):
        label = body.label if body is not None else ""
        return {"snapshot": mgr.snapshot(session_id, label)}

    @app.post("/sessions/{session_id}/rollback")
    def post_rollback(session_id: str, body: RollbackBody):
        try:
            return mgr.rollback(session_id, body.snapshot)
        except RollbackError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/sessions/{session_id}/trace/{turn}")
    def get_trace(session_id: str, turn: int):
        return mgr.trace(session_id, turn)

    return app
