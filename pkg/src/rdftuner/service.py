"""HTTP service over session storage.

Exposes the tuning workflow as a small REST API: create a session,
upload a dataset, a schema, and a workload, launch a background
search, poll its progress log by cursor, then materialize the chosen
views and answer workload queries against them.  All state lives in
the session store's data directory, so the service can be restarted
without losing sessions.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from . import __version__
from .errors import TunerError
from .sessions import SessionStore

_NOT_FOUND = {
    "unknown-session",
    "unknown-job",
    "unknown-query",
    "unknown-id",
    "missing-view",
}
_CONFLICT = {
    "job-in-progress",
    "not-finished",
    "not-materialized",
    "no-feasible-state",
}


def _status_for(code: str) -> int:
    if code in _NOT_FOUND:
        return 404
    if code in _CONFLICT:
        return 409
    return 400


class CreateSessionRequest(BaseModel):
    """Optional body for session creation."""

    id: Optional[str] = None


class SearchRequest(BaseModel):
    """Search configuration; every field has a server-side default."""

    strategy: str = "exhaustive-bfs"
    weights: dict[str, Any] = {}
    space_budget: Optional[Any] = None
    max_states: int = 10000
    timeout: float = 300.0
    allow_property_cuts: bool = False
    branch_cap: int = 1024
    seed: int = 0


class QueryRequest(BaseModel):
    """Evaluate one workload query."""

    name: str
    mode: str = "both"


class MaterializeRequest(BaseModel):
    """Optional body naming the job whose best state to materialize."""

    job: Optional[str] = None


async def _text_body(request: Request) -> str:
    raw = await request.body()
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TunerError(f"request body is not valid UTF-8: {exc}") from exc


def create_app(data_dir: Optional[Path] = None) -> FastAPI:
    """Build the application around one session store."""
    root = Path(data_dir or os.environ.get("RDFTUNER_DATA_DIR", "rdftuner_data"))
    store = SessionStore(root)
    app = FastAPI(title="rdftuner", version=__version__)
    app.state.store = store
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(TunerError)
    async def tuner_error(request: Request, exc: TunerError) -> JSONResponse:
        return JSONResponse(
            status_code=_status_for(exc.code),
            content={"error": exc.code, "message": str(exc)},
        )

    @app.get("/health")
    async def health() -> dict:
        return {"service": "rdftuner", "version": __version__}

    @app.post("/sessions")
    async def create_session(payload: Optional[CreateSessionRequest] = None) -> dict:
        sid = store.create_session(payload.id if payload else None)
        return {"session": sid}

    @app.post("/sessions/{sid}/dataset")
    async def put_dataset(sid: str, request: Request) -> dict:
        return store.put_dataset(sid, await _text_body(request))

    @app.post("/sessions/{sid}/schema")
    async def put_schema(
        sid: str,
        request: Request,
        type: Optional[str] = None,
        subclass: Optional[str] = None,
        subproperty: Optional[str] = None,
        domain: Optional[str] = None,
        range: Optional[str] = None,
    ) -> dict:
        vocabulary = {
            "type": type,
            "subclass": subclass,
            "subproperty": subproperty,
            "domain": domain,
            "range": range,
        }
        return store.put_schema(sid, await _text_body(request), vocabulary)

    @app.put("/sessions/{sid}/workload")
    async def put_workload(sid: str, request: Request) -> dict:
        return store.put_workload(sid, await _text_body(request))

    @app.post("/sessions/{sid}/search")
    async def start_search(sid: str, payload: Optional[SearchRequest] = None) -> dict:
        doc = payload.model_dump() if payload else {}
        job = store.start_search(sid, doc)
        return {"job": job}

    @app.get("/sessions/{sid}/search/{job}/progress")
    async def search_progress(sid: str, job: str, cursor: int = 0) -> dict:
        return store.read_progress(sid, job, cursor)

    @app.get("/sessions/{sid}/search/{job}/result")
    async def search_result(sid: str, job: str) -> dict:
        return store.read_result(sid, job)

    @app.post("/sessions/{sid}/materialize")
    async def materialize(
        sid: str, payload: Optional[MaterializeRequest] = None
    ) -> dict:
        return store.materialize(sid, payload.job if payload else None)

    @app.post("/sessions/{sid}/query")
    async def query(sid: str, payload: QueryRequest) -> dict:
        return store.query(sid, payload.name, payload.mode)

    @app.get("/sessions/{sid}/export/sql")
    async def export_sql(sid: str) -> PlainTextResponse:
        return PlainTextResponse(store.export_sql(sid))

    @app.get("/sessions/{sid}/export/dictionary")
    async def export_dictionary(sid: str) -> PlainTextResponse:
        return PlainTextResponse(store.export_dictionary(sid))

    return app
