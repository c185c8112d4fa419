"""HTTP layer: a static single-page frontend plus the JSON API it consumes.

There is no server-side template rendering. The static page loads once and
the client code drives everything through /api with the magic-link token as
a query parameter; the same page serves annotators and managers, routing
itself by the role reported from /api/session.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .errors import (
    AuthorizationError,
    CampaignParseError,
    CampaignValidationError,
    ConflictError,
    HumevalError,
    InputError,
    LogCorruptionError,
    NotFoundError,
    StateError,
    UnsupportedModeError,
)
from .store import Store

STATIC_DIR = Path(__file__).parent / "static"

_STATUS = {
    AuthorizationError: 401,
    CampaignParseError: 422,
    CampaignValidationError: 422,
    ConflictError: 409,
    UnsupportedModeError: 400,
    InputError: 400,
    NotFoundError: 404,
    StateError: 503,
    LogCorruptionError: 500,
}


def create_app(store: Store) -> FastAPI:
    app = FastAPI(title="humeval", version=__version__, docs_url=None, redoc_url=None)

    @app.exception_handler(HumevalError)
    async def domain_error(_request: Request, exc: HumevalError) -> JSONResponse:
        status = next((s for t, s in _STATUS.items() if isinstance(exc, t)), 400)
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.middleware("http")
    async def no_cache(request: Request, call_next):
        response = await call_next(request)
        if request.url.path.startswith("/api"):
            response.headers["Cache-Control"] = "no-store"
        return response

    @app.get("/healthz")
    async def healthz() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/api/session")
    async def session(token: str = Query(...)) -> dict:
        return store.session_info(token)

    @app.get("/api/next")
    async def next_item(token: str = Query(...)) -> dict:
        return store.next_item(token)

    @app.post("/api/submit")
    async def submit(token: str = Query(...), payload: dict = Body(...)) -> dict:
        return store.submit(token, payload)

    @app.get("/api/dashboard")
    async def dashboard(token: str = Query(...)) -> dict:
        return store.dashboard(token)

    @app.post("/api/results")
    async def reveal_results(token: str = Query(...)) -> dict:
        return store.reveal_results(token)

    @app.post("/api/redistribute")
    async def redistribute(token: str = Query(...), payload: dict = Body(...)) -> dict:
        for key in ("from_user", "to_user", "documents"):
            if key not in payload:
                raise CampaignValidationError(key, "required field is missing")
        return store.redistribute(
            token, payload["from_user"], payload["to_user"], list(payload["documents"])
        )

    @app.get("/api/export")
    async def export(token: str = Query(...)) -> Response:
        return Response(content=store.export_for_token(token), media_type="application/json")

    if STATIC_DIR.is_dir():
        app.mount("/", StaticFiles(directory=STATIC_DIR, html=True), name="static")

    return app


def run_server(store: Store, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")
