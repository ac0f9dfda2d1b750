"""Request and response shapes shared by the HTTP service and the CLI.

Both front ends build the same request models; the CLI normally executes
them in process and the service executes them behind routes, so the wire
format and the library behavior cannot drift apart.
"""

from __future__ import annotations

from pydantic import BaseModel


class IssueModel(BaseModel):
    component_id: str
    kind: str
    measured: float
    threshold: float
    peer_id: str | None = None


class DetectRequest(BaseModel):
    path: str | None = None
    content: str | None = None
    format: str = "json-dump"
    config_path: str | None = None


class DetectResponse(BaseModel):
    issues: list[IssueModel]
    components: int
    containers: int
    unscanned: list[str]


class TrainRequest(BaseModel):
    corpus_dir: str
    out_path: str
    epochs: int | None = None
    dim: int | None = None
    learning_rate: float | None = None
    negative_ratio: int | None = None
    seed: int | None = None
    config_path: str | None = None


class TrainResponse(BaseModel):
    model_path: str
    graphs: int
    epochs_run: int
    final_loss: float


class CurveModel(BaseModel):
    coefficients: tuple[float, float, float]  # a2, a1, a0
    rms: float
    n: int


class CalibrateRequest(BaseModel):
    out_path: str
    corpus_dir: str | None = None
    model_path: str | None = None
    preset: bool = False
    k: int | None = None
    seed: int | None = None
    config_path: str | None = None


class CalibrateResponse(BaseModel):
    calibration_path: str
    provenance: str
    curves: dict[str, CurveModel]


class FixRequest(BaseModel):
    path: str | None = None
    content: str | None = None
    format: str = "json-dump"
    model_path: str = ""
    calibration_path: str = ""
    out_path: str | None = None
    patch_path: str | None = None
    seed: int | None = None
    config_path: str | None = None


class FixResponse(BaseModel):
    patch: dict
    report: dict
    fixed: str
    out_path: str | None = None


class EvalRequest(BaseModel):
    corpus_dir: str
    model_path: str
    calibration_path: str
    seed: int | None = None
    config_path: str | None = None


class EvalResponse(BaseModel):
    report: dict
    text: str


class SynthRequest(BaseModel):
    out_dir: str
    count: int | None = None
    seed: int | None = None
    config_path: str | None = None


class SynthResponse(BaseModel):
    out_dir: str
    screens: int
    issues: dict[str, int]


class HealthResponse(BaseModel):
    status: str
    version: str
