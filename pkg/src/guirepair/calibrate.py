"""Calibration: from stable signals to target attribute values.

Three degree-2 curves map signal space to attribute space:

* size:      stable signal of a component        -> its size (dp)
* interval:  |signal difference| of a CC pair    -> their interval (dp)
* contrast:  stable signal of a colored component -> its contrast ratio

Mapping sets are collected on a detector-clean corpus by removing k random
edges per graph, re-predicting links until the signals settle, and pairing
each stable signal with the ground attribute it belongs to.  Curves are
least-squares quadratics; a built-in preset ships usable default
coefficients for all three curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .detect import Thresholds, contrast_ratio, detect_issues
from .graph import REL_CC, GuiGraph, build_graph, remove_random_edges
from .rgcn import TrainedModel, predict_links
from .spectral import SignalConfig
from .wireframe import Wireframe

PROVENANCE_FITTED = "fitted"
PROVENANCE_PRESET = "preset"


class CalibrationError(ValueError):
    def __init__(self, message: str, issues=None):
        super().__init__(message)
        self.issues = issues or []


@dataclass(frozen=True)
class MappingSet:
    """Raw (attribute, signal) observations, one list per curve.

    size_pairs:     (size dp, signal)
    interval_pairs: (interval dp, |signal_a - signal_b|)
    contrast_pairs: (contrast ratio, signal)
    """

    size_pairs: tuple[tuple[float, float], ...]
    interval_pairs: tuple[tuple[float, float], ...]
    contrast_pairs: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class PolyFit:
    """y = a2 x^2 + a1 x + a0 with fit bookkeeping."""

    coefficients: tuple[float, float, float]  # (a2, a1, a0)
    residual_rms: float
    sample_count: int

    def __call__(self, x: float) -> float:
        a2, a1, a0 = self.coefficients
        return (a2 * x + a1) * x + a0


@dataclass(frozen=True)
class Calibration:
    size_curve: PolyFit
    interval_curve: PolyFit
    contrast_curve: PolyFit
    provenance: str = PROVENANCE_FITTED

    def f_size(self, signal: float) -> float:
        return self.size_curve(signal)

    def f_interval(self, signal_a: float, signal_b: float = 0.0) -> float:
        return self.interval_curve(abs(signal_a - signal_b))

    def f_contrast(self, signal: float) -> float:
        return self.contrast_curve(signal)


def preset_calibration() -> Calibration:
    """Built-in default coefficients for the three curves."""
    return Calibration(
        size_curve=PolyFit((0.045, 1.742, -0.0256), 0.0, 0),
        interval_curve=PolyFit((0.042, 1.634, -0.0378), 0.0, 0),
        contrast_curve=PolyFit((1.328, -0.7723, -1.8954), 0.0, 0),
        provenance=PROVENANCE_PRESET,
    )


def fit_poly(points: list[tuple[float, float]], degree: int = 2) -> PolyFit:
    """Least-squares polynomial through (x, y) points.

    Fitting runs on a scaled domain (numpy's Polynomial.fit) which is the
    well-conditioned equivalent of column-scaled normal equations; the
    returned coefficients are in the raw domain.  Needs at least degree+1
    points and more distinct abscissae than the degree.
    """
    if len(points) < degree + 1:
        raise CalibrationError(
            f"need at least {degree + 1} points for degree {degree}, got {len(points)}"
        )
    x = np.array([p[0] for p in points], dtype=np.float64)
    y = np.array([p[1] for p in points], dtype=np.float64)
    if len(np.unique(x)) <= degree:
        raise CalibrationError(
            f"rank-deficient design matrix: {len(np.unique(x))} distinct abscissae "
            f"for degree {degree}"
        )
    poly = Polynomial.fit(x, y, deg=degree).convert()
    coef = list(poly.coef) + [0.0] * (degree + 1 - len(poly.coef))
    a0, a1, a2 = coef[0], coef[1], coef[2]
    resid = y - ((a2 * x + a1) * x + a0)
    rms = float(np.sqrt(np.mean(resid * resid)))
    return PolyFit((float(a2), float(a1), float(a0)), rms, len(points))


@dataclass(frozen=True)
class MappingProtocol:
    k: int = 3
    seed: int = 0
    signal: SignalConfig = field(default_factory=SignalConfig)
    max_iterations: int = 500


def build_mapping_set(
    model: TrainedModel,
    corpus: list[Wireframe],
    protocol: MappingProtocol = MappingProtocol(),
    thresholds: Thresholds = Thresholds(),
) -> MappingSet:
    """Collect (attribute, signal) pairs over a clean corpus.

    The corpus must be detector-clean; any issue aborts with the offending
    list.  Per GUI, min(k, |E|) random edges are removed, link prediction
    runs to signal convergence, and every component contributes a size pair,
    every CC-adjacent pair an interval pair, and every colored component a
    contrast pair.
    """
    dirty: list = []
    for wf in corpus:
        dirty.extend(detect_issues(wf, thresholds))
    if dirty:
        raise CalibrationError(
            f"corpus is not detector-clean ({len(dirty)} issues)", issues=dirty
        )

    size_pairs: list[tuple[float, float]] = []
    interval_pairs: list[tuple[float, float]] = []
    contrast_pairs: list[tuple[float, float]] = []

    for gui_index, wf in enumerate(corpus):
        g = build_graph(wf)
        k_eff = min(protocol.k, len(g.edges))
        damaged, removed = remove_random_edges(g, k_eff, seed=protocol.seed + gui_index)
        result = predict_links(
            model,
            damaged,
            removed,
            signal_cfg=protocol.signal,
            max_iterations=protocol.max_iterations,
            seed=protocol.seed + gui_index,
        )
        signals = {nid: s.value for nid, s in result.monitor.stable_signals().items()}

        for comp in wf.components:
            alpha = signals[comp.id]
            size_pairs.append((min(comp.bounds.w, comp.bounds.h), alpha))
            if comp.color is not None:
                contrast_pairs.append(
                    (contrast_ratio(comp.color, wf.background_color), alpha)
                )
        for (i, j), gap in sorted(g.intervals.items()):
            a_id, b_id = g.nodes[i].id, g.nodes[j].id
            interval_pairs.append((gap, abs(signals[a_id] - signals[b_id])))

    return MappingSet(
        size_pairs=tuple(size_pairs),
        interval_pairs=tuple(interval_pairs),
        contrast_pairs=tuple(contrast_pairs),
    )


def fit_calibration(mapping: MappingSet, degree: int = 2) -> Calibration:
    """Fit the three curves; x = signal, y = attribute."""

    def flip(pairs):
        return [(signal, attr) for attr, signal in pairs]

    return Calibration(
        size_curve=fit_poly(flip(mapping.size_pairs), degree),
        interval_curve=fit_poly(flip(mapping.interval_pairs), degree),
        contrast_curve=fit_poly(flip(mapping.contrast_pairs), degree),
        provenance=PROVENANCE_FITTED,
    )


CALIBRATION_MAGIC = "guirepair-calibration v1"
_CURVES = ("size", "interval", "contrast")


def dump_calibration(cal: Calibration) -> str:
    """Text form: one line per curve with coefficients (a2, a1, a0),
    residual RMS and sample count; units are raw dp / contrast ratio."""
    lines = [CALIBRATION_MAGIC, f"provenance {cal.provenance}", "units raw"]
    for name, curve in zip(_CURVES, (cal.size_curve, cal.interval_curve, cal.contrast_curve)):
        a2, a1, a0 = curve.coefficients
        lines.append(
            f"curve {name} {a2!r} {a1!r} {a0!r} rms={curve.residual_rms!r} n={curve.sample_count}"
        )
    return "\n".join(lines) + "\n"


def parse_calibration(text: str) -> Calibration:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CALIBRATION_MAGIC:
        raise CalibrationError(f"not a calibration file (expected {CALIBRATION_MAGIC!r})")
    provenance = PROVENANCE_FITTED
    curves: dict[str, PolyFit] = {}
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "provenance":
            provenance = parts[1]
        elif parts[0] == "curve":
            name = parts[1]
            a2, a1, a0 = (float(v) for v in parts[2:5])
            rms = float(parts[5].split("=", 1)[1])
            n = int(parts[6].split("=", 1)[1])
            curves[name] = PolyFit((a2, a1, a0), rms, n)
    missing = [c for c in _CURVES if c not in curves]
    if missing:
        raise CalibrationError(f"calibration file missing curves: {missing}")
    return Calibration(
        size_curve=curves["size"],
        interval_curve=curves["interval"],
        contrast_curve=curves["contrast"],
        provenance=provenance,
    )
