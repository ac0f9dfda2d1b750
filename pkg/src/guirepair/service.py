"""HTTP facade over the shared command handlers."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .handlers import (
    HandlerError,
    handle_calibrate,
    handle_detect,
    handle_eval,
    handle_fix,
    handle_synth,
    handle_train,
)
from .schemas import (
    CalibrateRequest,
    CalibrateResponse,
    DetectRequest,
    DetectResponse,
    EvalRequest,
    EvalResponse,
    FixRequest,
    FixResponse,
    HealthResponse,
    SynthRequest,
    SynthResponse,
    TrainRequest,
    TrainResponse,
)


def _run(handler, req):
    try:
        return handler(req)
    except HandlerError as exc:
        raise HTTPException(status_code=400 if exc.usage else 422, detail=str(exc))


def create_app() -> FastAPI:
    app = FastAPI(title="guirepair", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/detect", response_model=DetectResponse)
    def detect(req: DetectRequest) -> DetectResponse:
        return _run(handle_detect, req)

    @app.post("/train", response_model=TrainResponse)
    def train(req: TrainRequest) -> TrainResponse:
        return _run(handle_train, req)

    @app.post("/calibrate", response_model=CalibrateResponse)
    def calibrate(req: CalibrateRequest) -> CalibrateResponse:
        return _run(handle_calibrate, req)

    @app.post("/fix", response_model=FixResponse)
    def fix(req: FixRequest) -> FixResponse:
        return _run(handle_fix, req)

    @app.post("/eval", response_model=EvalResponse)
    def eval_(req: EvalRequest) -> EvalResponse:
        return _run(handle_eval, req)

    @app.post("/synth", response_model=SynthResponse)
    def synth(req: SynthRequest) -> SynthResponse:
        return _run(handle_synth, req)

    return app


app = create_app()
