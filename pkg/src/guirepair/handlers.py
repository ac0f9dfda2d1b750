"""Command logic shared by the CLI and the HTTP routes.

Each handler takes a request model and returns a response model; anything
that goes wrong raises HandlerError with a flag separating caller mistakes
(bad paths, bad flags) from data/processing failures, so both front ends
can map errors consistently.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from .calibrate import (
    CalibrationError,
    fit_calibration,
    build_mapping_set,
    dump_calibration,
    parse_calibration,
    preset_calibration,
)
from .config import AppConfig, ConfigError, load_config
from .detect import detect_issues, unscanned_components
from .evaluate import EvalError, evaluate_corpus, render_text
from .fix import PatchError, dump_patch, patch_to_dict, report_to_dict, run_fix
from .graph import GraphError, build_graph
from .ioutil import atomic_write_text
from .layout import ParseError, parse_hierarchy, serialize_hierarchy
from .rgcn import (
    ModelFormatError,
    TrainingDiverged,
    dump_model,
    parse_model,
    train,
)
from .schemas import (
    CalibrateRequest,
    CalibrateResponse,
    CurveModel,
    DetectRequest,
    DetectResponse,
    EvalRequest,
    EvalResponse,
    FixRequest,
    FixResponse,
    IssueModel,
    SynthRequest,
    SynthResponse,
    TrainRequest,
    TrainResponse,
)
from .synth import SynthError, generate_corpus, read_manifest, write_corpus
from .wireframe import wireframe_from_tree

FORMATS = ("json-dump", "xml-dump")


class HandlerError(RuntimeError):
    def __init__(self, message: str, usage: bool = False):
        super().__init__(message)
        self.usage = usage


def _config_from(req) -> AppConfig:
    try:
        return load_config(req.config_path)
    except ConfigError as exc:
        raise HandlerError(str(exc), usage=True) from None


def _seed_of(req, cfg: AppConfig) -> int:
    return cfg.run.seed if req.seed is None else req.seed


def _read_file(path: str, what: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise HandlerError(f"cannot read {what}: {exc}", usage=True) from None


def _load_document(req):
    if (req.path is None) == (req.content is None):
        raise HandlerError("provide exactly one of path or content", usage=True)
    if req.format not in FORMATS:
        raise HandlerError(
            f"unknown format {req.format!r}; expected one of {FORMATS}", usage=True
        )
    raw = _read_file(req.path, "document") if req.path else req.content
    try:
        return parse_hierarchy(raw, req.format)
    except ParseError as exc:
        raise HandlerError(f"cannot parse document: {exc}") from None


def _corpus_documents(corpus_dir: str):
    base = Path(corpus_dir)
    if not base.is_dir():
        raise HandlerError(f"corpus directory not found: {corpus_dir}", usage=True)
    paths: list[Path]
    manifest_path = base / "manifest.json"
    if manifest_path.is_file():
        manifest = read_manifest(manifest_path)
        paths = [
            base / rec["clean"] for _, rec in sorted(manifest["screens"].items())
        ]
    else:
        paths = sorted(p for p in base.glob("*.json") if p.name != "manifest.json")
    if not paths:
        raise HandlerError(f"no documents found under {corpus_dir}", usage=True)
    docs = []
    for p in paths:
        try:
            tree, meta = parse_hierarchy(p.read_text(), "json-dump")
        except (OSError, ParseError) as exc:
            raise HandlerError(f"cannot load {p}: {exc}") from None
        docs.append((p.stem, tree, meta))
    return docs


def _load_model(path: str):
    text = _read_file(path, "model")
    try:
        return parse_model(text)
    except ModelFormatError as exc:
        raise HandlerError(f"bad model file: {exc}") from None


def _load_calibration(path: str):
    text = _read_file(path, "calibration")
    try:
        return parse_calibration(text)
    except CalibrationError as exc:
        raise HandlerError(f"bad calibration file: {exc}") from None


def handle_detect(req: DetectRequest) -> DetectResponse:
    cfg = _config_from(req)
    tree, meta = _load_document(req)
    wf = wireframe_from_tree(tree, meta)
    issues = detect_issues(wf, cfg.thresholds)
    return DetectResponse(
        issues=[
            IssueModel(
                component_id=s.component_id,
                kind=s.kind,
                measured=s.measured,
                threshold=s.threshold,
                peer_id=s.peer_id,
            )
            for s in issues
        ],
        components=len(wf.components),
        containers=len(wf.containers),
        unscanned=unscanned_components(wf),
    )


def handle_train(req: TrainRequest) -> TrainResponse:
    cfg = _config_from(req)
    docs = _corpus_documents(req.corpus_dir)
    graphs = [build_graph(wireframe_from_tree(t, m)) for _, t, m in docs]
    overrides = {
        k: v
        for k, v in {
            "epochs": req.epochs,
            "dim": req.dim,
            "learning_rate": req.learning_rate,
            "negative_ratio": req.negative_ratio,
            "seed": req.seed,
        }.items()
        if v is not None
    }
    tc = replace(cfg.train, **overrides)
    try:
        model = train(graphs, tc)
    except (TrainingDiverged, GraphError, ValueError) as exc:
        raise HandlerError(f"training failed: {exc}") from None
    atomic_write_text(req.out_path, dump_model(model))
    return TrainResponse(
        model_path=req.out_path,
        graphs=len(graphs),
        epochs_run=len(model.loss_history),
        final_loss=model.loss_history[-1],
    )


def _curves_of(cal) -> dict[str, CurveModel]:
    return {
        name: CurveModel(
            coefficients=fit.coefficients, rms=fit.residual_rms, n=fit.sample_count
        )
        for name, fit in (
            ("size", cal.size_curve),
            ("interval", cal.interval_curve),
            ("contrast", cal.contrast_curve),
        )
    }


def handle_calibrate(req: CalibrateRequest) -> CalibrateResponse:
    cfg = _config_from(req)
    if req.preset:
        cal = preset_calibration()
    else:
        if not req.corpus_dir or not req.model_path:
            raise HandlerError(
                "calibrate needs corpus_dir and model_path (or preset)", usage=True
            )
        model = _load_model(req.model_path)
        docs = _corpus_documents(req.corpus_dir)
        wfs = [wireframe_from_tree(t, m) for _, t, m in docs]
        protocol = replace(
            cfg.calibrate,
            k=cfg.calibrate.k if req.k is None else req.k,
            seed=_seed_of(req, cfg) if req.seed is not None else cfg.calibrate.seed,
        )
        try:
            mapping = build_mapping_set(model, wfs, protocol, cfg.thresholds)
            cal = fit_calibration(mapping)
        except CalibrationError as exc:
            raise HandlerError(f"calibration failed: {exc}") from None
    atomic_write_text(req.out_path, dump_calibration(cal))
    return CalibrateResponse(
        calibration_path=req.out_path,
        provenance=cal.provenance,
        curves=_curves_of(cal),
    )


def handle_fix(req: FixRequest) -> FixResponse:
    cfg = _config_from(req)
    if not req.model_path or not req.calibration_path:
        raise HandlerError("fix needs model_path and calibration_path", usage=True)
    tree, meta = _load_document(req)
    model = _load_model(req.model_path)
    cal = _load_calibration(req.calibration_path)
    try:
        run = run_fix(
            tree,
            meta,
            model,
            cal,
            cfg.thresholds,
            seed=_seed_of(req, cfg),
            signal_cfg=cfg.signal,
            max_iterations=cfg.run.max_iterations,
            recolor_mode=cfg.run.recolor_mode,
        )
    except (PatchError, GraphError) as exc:
        raise HandlerError(f"fix failed: {exc}") from None
    fixed_text = serialize_hierarchy(run.fixed_tree, meta)
    if req.out_path:
        atomic_write_text(req.out_path, fixed_text)
    if req.patch_path:
        atomic_write_text(req.patch_path, dump_patch(run.plan.patch))
    return FixResponse(
        patch=patch_to_dict(run.plan.patch),
        report=report_to_dict(run.report),
        fixed=fixed_text,
        out_path=req.out_path,
    )


def handle_eval(req: EvalRequest) -> EvalResponse:
    cfg = _config_from(req)
    model = _load_model(req.model_path)
    cal = _load_calibration(req.calibration_path)
    try:
        report, _ = evaluate_corpus(
            req.corpus_dir,
            model,
            cal,
            cfg.thresholds,
            seed=_seed_of(req, cfg),
            signal_cfg=cfg.signal,
            max_iterations=cfg.run.max_iterations,
            recolor_mode=cfg.run.recolor_mode,
        )
    except FileNotFoundError as exc:
        raise HandlerError(f"cannot read corpus: {exc}", usage=True) from None
    except (EvalError, SynthError, ParseError) as exc:
        raise HandlerError(f"evaluation failed: {exc}") from None
    return EvalResponse(report=report.to_dict(), text=render_text(report))


def handle_synth(req: SynthRequest) -> SynthResponse:
    cfg = _config_from(req)
    overrides = {
        k: v
        for k, v in {"count": req.count, "seed": req.seed}.items()
        if v is not None
    }
    sc = replace(cfg.synth, **overrides)
    try:
        screens = generate_corpus(sc, cfg.thresholds)
    except SynthError as exc:
        raise HandlerError(f"generation failed: {exc}") from None
    write_corpus(screens, req.out_dir)
    counts: dict[str, int] = {}
    for s in screens:
        for issue in s.issues:
            counts[issue.kind] = counts.get(issue.kind, 0) + 1
    return SynthResponse(
        out_dir=req.out_dir, screens=len(screens), issues=dict(sorted(counts.items()))
    )
