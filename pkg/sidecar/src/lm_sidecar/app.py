"""HTTP surface: request validation, error mapping, and lifecycle."""

from __future__ import annotations

import threading
from contextlib import asynccontextmanager
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from lm_sidecar.config import Settings
from lm_sidecar.serving import (
    EmptyTargetError,
    ServedModel,
    TargetTooLongError,
    UnsupportedModeError,
)

DEFAULT_WORKERS = 4


class LogprobsRequest(BaseModel):
    model: str
    mode: Literal["causal", "masked"]
    context: str = ""
    target: str


class LogprobsResponse(BaseModel):
    tokens: list[str]
    logprobs: list[float]
    token_count: int


def create_app(settings: Settings | None = None, workers: int = DEFAULT_WORKERS) -> FastAPI:
    """Build the service around ``settings`` (read from the environment if omitted).

    Checkpoints load on a background thread after startup; /healthz reports 503
    until every configured model is ready, and scoring requests made in that
    interval are refused with 503 rather than queued.
    """
    if settings is None:
        settings = Settings.from_env()

    registry: dict[str, ServedModel] = {}
    state = {"loaded": False, "error": None}
    # Bounds concurrent scoring requests; weights themselves are read-only.
    slots = threading.BoundedSemaphore(workers)

    def load_all() -> None:
        try:
            for entry in settings.models:
                registry[entry.name] = ServedModel(
                    entry.name, entry.path, device=settings.device, max_len=settings.max_len
                )
        except Exception as exc:
            state["error"] = str(exc)
        else:
            state["loaded"] = True

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        thread = threading.Thread(target=load_all, name="model-load", daemon=True)
        thread.start()
        yield

    app = FastAPI(title="lm-sidecar", lifespan=lifespan)

    def require_ready() -> None:
        if state["error"] is not None:
            raise HTTPException(status_code=503, detail=f"model load failed: {state['error']}")
        if not state["loaded"]:
            raise HTTPException(status_code=503, detail="models are still loading")

    @app.get("/healthz")
    def healthz():
        if state["error"] is not None:
            return JSONResponse(
                status_code=503, content={"status": "error", "detail": state["error"]}
            )
        if not state["loaded"]:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return {"status": "ok", "models": sorted(registry)}

    @app.get("/v1/models")
    def models():
        require_ready()
        return {"models": [registry[name].descriptor() for name in sorted(registry)]}

    @app.post("/v1/logprobs", response_model=LogprobsResponse)
    def logprobs(req: LogprobsRequest):
        require_ready()
        served = registry.get(req.model)
        if served is None:
            raise HTTPException(status_code=404, detail=f"unknown model {req.model!r}")
        try:
            with slots:
                tokens, values = served.logprobs(req.mode, req.context, req.target)
        except UnsupportedModeError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except EmptyTargetError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except TargetTooLongError as exc:
            raise HTTPException(status_code=413, detail=str(exc)) from exc
        return LogprobsResponse(tokens=tokens, logprobs=values, token_count=len(tokens))

    return app
