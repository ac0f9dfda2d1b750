"""Detect and repair accessibility problems in GUI view hierarchies.

The pipeline: parse a view-hierarchy dump, flatten it to a wireframe, build
a typed component graph, predict the links a damaged region should have,
read a stable per-node signal off the prediction trajectory, map signals to
target attribute values through calibrated curves, and patch the document.
"""

from .calibrate import (
    Calibration,
    CalibrationError,
    MappingProtocol,
    MappingSet,
    PolyFit,
    build_mapping_set,
    dump_calibration,
    fit_calibration,
    fit_poly,
    parse_calibration,
    preset_calibration,
)
from .detect import (
    ISSUE_KINDS,
    Issue,
    KIND_LOW_CONTRAST,
    KIND_NARROW_INTERVAL,
    KIND_SMALL_SIZE,
    Thresholds,
    contrast_ratio,
    contrast_threshold_for,
    detect_issues,
    relative_luminance,
    unscanned_components,
)
from .evaluate import EvalError, EvalReport, evaluate_corpus, render_text
from .fix import (
    FixReport,
    FixRun,
    Patch,
    PatchError,
    apply_patch,
    classify,
    dump_patch,
    dump_report,
    parse_patch,
    plan_fix,
    recolor,
    run_fix,
)
from .geometry import Rect
from .graph import GraphError, GuiGraph, build_graph, remove_edges_for, remove_random_edges
from .layout import (
    ParseError,
    ScreenMeta,
    ViewNode,
    ViewTree,
    parse_hierarchy,
    sample_colors,
    serialize_hierarchy,
)
from .rgcn import (
    ModelFormatError,
    TrainConfig,
    TrainedModel,
    TrainingDiverged,
    dump_model,
    parse_model,
    predict_links,
    reciprocal_ranks,
    train,
)
from .spectral import SignalConfig, SignalMonitor, dft, project, stable_signal
from .synth import InjectedIssue, SynthConfig, generate_corpus, read_manifest, write_corpus
from .wireframe import Wireframe, wireframe_from_tree

__version__ = "0.1.0"

__all__ = [
    "Calibration",
    "CalibrationError",
    "EvalError",
    "EvalReport",
    "FixReport",
    "FixRun",
    "GraphError",
    "GuiGraph",
    "ISSUE_KINDS",
    "InjectedIssue",
    "Issue",
    "KIND_LOW_CONTRAST",
    "KIND_NARROW_INTERVAL",
    "KIND_SMALL_SIZE",
    "MappingProtocol",
    "MappingSet",
    "ModelFormatError",
    "ParseError",
    "Patch",
    "PatchError",
    "PolyFit",
    "Rect",
    "ScreenMeta",
    "SignalConfig",
    "SignalMonitor",
    "SynthConfig",
    "Thresholds",
    "TrainConfig",
    "TrainedModel",
    "TrainingDiverged",
    "ViewNode",
    "ViewTree",
    "Wireframe",
    "apply_patch",
    "build_graph",
    "build_mapping_set",
    "classify",
    "contrast_ratio",
    "contrast_threshold_for",
    "detect_issues",
    "dft",
    "dump_calibration",
    "dump_model",
    "dump_patch",
    "dump_report",
    "evaluate_corpus",
    "fit_calibration",
    "fit_poly",
    "generate_corpus",
    "parse_calibration",
    "parse_hierarchy",
    "parse_model",
    "parse_patch",
    "plan_fix",
    "predict_links",
    "preset_calibration",
    "project",
    "read_manifest",
    "reciprocal_ranks",
    "recolor",
    "relative_luminance",
    "remove_edges_for",
    "remove_random_edges",
    "render_text",
    "run_fix",
    "sample_colors",
    "serialize_hierarchy",
    "stable_signal",
    "train",
    "unscanned_components",
    "wireframe_from_tree",
    "write_corpus",
    "__version__",
]
