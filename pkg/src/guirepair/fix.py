"""Turning stable signals into attribute patches.

Targets come from the calibration curves but are clamped so the result is
actually compliant: sizes to the touch-target floor, intervals to the
spacing floor, contrast to the applicable threshold (capped at 21, the
maximum possible ratio).  Geometry is applied so that repaired attributes
land exactly on or above the detector boundary; every placement aimed at a
gap boundary gets a 1e-9 dp margin so float rounding can never re-trigger
the strict `<` comparison.

Image components are never modified: their rendered content cannot be
re-sized or re-colored from the outside.  Interval issues with one Image
member are fixed by moving the other member only.

After planning, the patch is validated in memory: re-detect, clamp any
freshly introduced violation to its threshold, repeat up to five rounds;
still-offending components have their changes reverted and the patch is
emitted as partial.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .calibrate import Calibration
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
)
from .geometry import Rect, gap_along
from .graph import REL_CC, build_graph, remove_edges_for
from .layout import (
    CLASS_BUTTON,
    CLASS_IMAGE,
    CLASS_TEXT,
    ScreenMeta,
    ViewTree,
    find_node,
    replace_nodes,
)
from .rgcn import PredictResult, TrainedModel, predict_links
from .spectral import SignalConfig
from .wireframe import Wireframe, resolve_overlaps

# Margin added wherever a placement aims exactly at a detector boundary.
BOUNDARY_EPS = 1e-9

MODE_LUMINANCE = "luminance"
MODE_LITERAL = "literal"  # fixed per-channel inversion, kept for comparison

VERDICT_FIXED = "Fixed"
VERDICT_HALF_BAKED = "HalfBaked"
VERDICT_UNFIXED = "Unfixed"


class UnfixableError(RuntimeError):
    def __init__(self, reason: str, max_achievable: float | None = None):
        super().__init__(reason)
        self.reason = reason
        self.max_achievable = max_achievable


@dataclass(frozen=True)
class Change:
    component_id: str
    field: str  # "bounds" | "color"
    old: tuple
    new: tuple
    minor: bool = False
    provenance: dict = field(default_factory=dict)


@dataclass(frozen=True)
class UnfixableEntry:
    component_id: str
    kind: str
    peer_id: str | None
    reason: str


@dataclass(frozen=True)
class Patch:
    changes: tuple[Change, ...]
    unfixable: tuple[UnfixableEntry, ...]
    partial: bool
    seed: int


@dataclass(frozen=True)
class Verdict:
    issue: Issue
    verdict: str


@dataclass(frozen=True)
class FixReport:
    verdicts: tuple[Verdict, ...]
    extra: tuple[Issue, ...]
    partial: bool

    def count(self, verdict: str) -> int:
        return sum(1 for v in self.verdicts if v.verdict == verdict)


# -- target values -----------------------------------------------------------


def target_size(
    signal: float,
    cal: Calibration,
    th: Thresholds,
    size_cap: float = math.inf,
) -> tuple[float, list[str]]:
    """Curve value clamped to the touch floor and capped by available room."""
    if size_cap < th.min_touch_dp:
        raise UnfixableError("container too small for a compliant size")
    raw = cal.f_size(signal)
    clamps = []
    value = raw
    if value < th.min_touch_dp:
        value = th.min_touch_dp
        clamps.append("threshold")
    if value > size_cap:
        value = size_cap
        clamps.append("room")
    return value, clamps


def target_interval(
    signal_a: float, signal_b: float, cal: Calibration, th: Thresholds
) -> tuple[float, list[str]]:
    raw = cal.f_interval(signal_a, signal_b)
    if raw < th.min_interval_dp:
        return th.min_interval_dp, ["threshold"]
    return raw, []


def mean_interval(
    signals: list[float], cal: Calibration, th: Thresholds
) -> tuple[float, list[str]]:
    """Uniform gap for an ordered run of k >= 3 components on one axis:
    the mean of the curve over consecutive signal pairs, clamped."""
    if len(signals) < 3:
        raise ValueError("mean interval needs at least 3 components")
    vals = [cal.f_interval(signals[m], signals[m - 1]) for m in range(1, len(signals))]
    raw = sum(vals) / len(vals)
    if raw < th.min_interval_dp:
        return th.min_interval_dp, ["threshold"]
    return raw, []


def target_contrast(signal, cal: Calibration, th: Thresholds, component) -> tuple[float, list[str]]:
    raw = cal.f_contrast(signal)
    limit = contrast_threshold_for(component, th)
    clamps = []
    value = raw
    if value < limit:
        value = limit
        clamps.append("threshold")
    if value > 21.0:
        value = 21.0
        clamps.append("ceiling")
    return value, clamps


# -- recoloring --------------------------------------------------------------


def _linear_channel(c: int) -> float:
    v = c / 255
    return v / 12.92 if v <= 0.03928 else ((v + 0.055) / 1.055) ** 2.4


def _delinearize(v: float) -> int:
    v = min(max(v, 0.0), 1.0)
    c = v * 12.92 if v <= 0.03928 / 12.92 else 1.055 * v ** (1 / 2.4) - 0.055
    return int(round(min(max(c, 0.0), 1.0) * 255))


@dataclass(frozen=True)
class RecolorResult:
    color: tuple[int, int, int] | None
    achieved: float | None
    feasible: bool
    max_achievable: float | None = None
    gamut_clamped: bool = False


def _luminance_of_linear(lin: np.ndarray) -> np.ndarray:
    return lin @ np.array([0.2126, 0.7152, 0.0722])


def _path_colors(color: tuple[int, int, int], darker: bool, ts: np.ndarray) -> np.ndarray:
    """8-bit colors along the darken (scale to black) or lighten (blend to
    white) path, one row per t."""
    lin = np.array([_linear_channel(c) for c in color])
    if darker:
        lins = ts[:, None] * lin[None, :]
    else:
        lins = lin[None, :] + ts[:, None] * (1.0 - lin[None, :])
    out = np.empty((len(ts), 3), dtype=np.int64)
    for k in range(3):
        v = lins[:, k]
        lo = v <= 0.03928 / 12.92
        c = np.where(lo, v * 12.92, 1.055 * np.maximum(v, 1e-12) ** (1 / 2.4) - 0.055)
        out[:, k] = np.clip(np.round(c * 255), 0, 255).astype(np.int64)
    return out


def recolor(
    color: tuple[int, int, int],
    background: tuple[int, int, int],
    cr: float,
    mode: str = MODE_LUMINANCE,
    at_least: float | None = None,
) -> RecolorResult:
    """Adjust a foreground color to a target contrast ratio against the
    background.

    luminance mode solves for the exact target luminance on the component's
    current side of the background (falling back to the other side), scales
    the linear channels to preserve hue, and refines over the quantized
    darken/lighten path so the achieved ratio lands within +/-0.2 of cr.
    at_least additionally forces achieved >= that floor (used by validation).

    literal mode inverts the target ratio per channel in closed form and
    flags out-of-gamut channels.
    """
    if not 1.0 <= cr <= 21.0:
        raise ValueError(f"target ratio {cr} outside [1, 21]")
    l_bg = relative_luminance(background)

    if mode == MODE_LITERAL:
        # Fixed channel denominators; the green coefficient (0.7125)
        # deliberately differs from the 0.7152 luminance weight used elsewhere.
        num = l_bg + 0.05
        lin = (num / (cr * 0.2126), num / (cr * 0.7125), num / (cr * 0.0722))
        clamped = any(v < 0 or v > 1 for v in lin)
        out = tuple(_delinearize(v) for v in lin)
        return RecolorResult(
            color=out,
            achieved=contrast_ratio(out, background),
            feasible=True,
            gamut_clamped=clamped,
        )
    if mode != MODE_LUMINANCE:
        raise ValueError(f"unknown recolor mode {mode!r}")

    current = contrast_ratio(color, background)
    if cr <= 1.0:
        return RecolorResult(color=color, achieved=current, feasible=True)

    l_cur = relative_luminance(color)
    dark_target = (l_bg + 0.05) / cr - 0.05  # settle darker than the background
    light_target = cr * (l_bg + 0.05) - 0.05  # settle lighter than it
    dark_ok = dark_target >= 0.0
    light_ok = light_target <= 1.0

    # Prefer the side the component already sits on.
    prefer_dark = l_cur <= l_bg
    if not dark_ok and not light_ok:
        # Neither side solves exactly, but the nearer extreme may still land
        # inside the tolerance band; aim at whichever extreme ranks higher
        # and let the sweep below decide feasibility.
        best_dark = (l_bg + 0.05) / 0.05
        best_light = 1.05 / (l_bg + 0.05)
        l_target = 0.0 if best_dark >= best_light else 1.0
    elif prefer_dark:
        l_target = dark_target if dark_ok else light_target
    else:
        l_target = light_target if light_ok else dark_target

    # The color path: scale to black below the current luminance, blend to
    # white above it.  Luminance is strictly monotone along it, the exact
    # parameter solves in closed form, and both extremes (black, white) are
    # on the path, so the best achievable ratio over the path is the best
    # achievable over all colors.
    def evaluate(darken: np.ndarray, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        cols = np.concatenate(
            [
                _path_colors(color, True, darken),
                _path_colors(color, False, ts),
            ]
        )
        lum = np.array([relative_luminance(tuple(c)) for c in cols])
        hi = np.maximum(lum, l_bg)
        lo = np.minimum(lum, l_bg)
        return cols, (hi + 0.05) / (lo + 0.05)

    if l_target <= l_cur:
        t_star = 0.0 if l_cur <= 0 else min(max(l_target / l_cur, 0.0), 1.0)
        cols, ratios = evaluate(np.array([t_star]), np.empty(0))
    else:
        t_star = 0.0 if l_cur >= 1 else min(max((l_target - l_cur) / (1.0 - l_cur), 0.0), 1.0)
        cols, ratios = evaluate(np.empty(0), np.array([t_star]))

    achieved = float(ratios[0])
    candidate = tuple(int(v) for v in cols[0])
    floor = at_least if at_least is not None else -math.inf
    if abs(achieved - cr) <= 0.2 and achieved >= floor:
        return RecolorResult(color=candidate, achieved=achieved, feasible=True)

    # Quantization pushed the analytic point off target: sweep both segments.
    grid = np.linspace(0.0, 1.0, 2001)
    cols, ratios = evaluate(grid, grid)
    ok = ratios >= floor if at_least is not None else np.ones(len(ratios), dtype=bool)
    if ok.any():
        err = np.where(ok, np.abs(ratios - cr), np.inf)
        best_idx = int(np.argmin(err))
        achieved = float(ratios[best_idx])
        candidate = tuple(int(v) for v in cols[best_idx])
        if abs(achieved - cr) <= 0.2 or at_least is not None:
            return RecolorResult(color=candidate, achieved=achieved, feasible=True)
    return RecolorResult(
        color=None, achieved=None, feasible=False, max_achievable=float(ratios.max())
    )


# -- planning ----------------------------------------------------------------


class PatchError(ValueError):
    pass


@dataclass
class FixPlan:
    patch: Patch
    signals: dict[str, float]
    prediction: PredictResult | None


def plan_fix(
    wf: Wireframe,
    issues: list[Issue],
    model: TrainedModel,
    cal: Calibration,
    th: Thresholds = Thresholds(),
    *,
    seed: int = 0,
    signal_cfg: SignalConfig = SignalConfig(),
    max_iterations: int = 500,
    recolor_mode: str = MODE_LUMINANCE,
) -> FixPlan:
    """Plan attribute changes for the detected issues.

    Pipeline: remove edges incident to problem components, run link
    prediction until the per-node signals settle, convert each stable signal
    to a target through the calibration curves, apply targets geometrically,
    co-adjust non-problem components whose signal shifted more than 1%
    (bounded to +/-5%), then validate in memory until re-detection shows no
    freshly introduced issue.
    """
    issues = sorted(issues, key=lambda s: (s.kind, s.component_id, s.peer_id or ""))
    if not issues:
        return FixPlan(Patch((), (), False, seed), {}, None)

    g = build_graph(wf)
    problem_ids = sorted(
        {s.component_id for s in issues} | {s.peer_id for s in issues if s.peer_id}
    )
    damaged, removed = remove_edges_for(g, problem_ids)
    prediction = predict_links(
        model,
        damaged,
        removed,
        signal_cfg=signal_cfg,
        max_iterations=max_iterations,
        seed=seed,
    )
    stable = {nid: s.value for nid, s in prediction.monitor.stable_signals().items()}
    initial = prediction.monitor.initial_values()

    comps = {c.id: c for c in wf.components}
    original_rects = {c.id: c.bounds for c in wf.components}
    original_colors = {c.id: c.color for c in wf.components}
    rects = dict(original_rects)
    colors = dict(original_colors)

    prov: dict[str, dict] = {}
    unfixable: list[UnfixableEntry] = []
    co_adjusted: set[str] = set()
    primary_touched: set[str] = set()
    reverted: set[str] = set()

    def note(cid: str, curve: str, clamps: list[str], signal=None, **extra) -> None:
        entry = prov.setdefault(cid, {"signal": None, "curves": [], "clamps": []})
        if signal is not None:
            entry["signal"] = signal
        if curve not in entry["curves"]:
            entry["curves"].append(curve)
        for c in clamps:
            tag = f"{curve}:{c}"
            if tag not in entry["clamps"]:
                entry["clamps"].append(tag)
        entry.update(extra)

    cc_axis: dict[frozenset, str] = {}
    cc_neighbors: dict[str, list[tuple[str, str]]] = {}
    for i, j, rel in g.edges:
        if rel != REL_CC:
            continue
        a_id, b_id = g.nodes[i].id, g.nodes[j].id
        ax = g.corridor_axes[(i, j)]
        cc_axis[frozenset((a_id, b_id))] = ax
        cc_neighbors.setdefault(a_id, []).append((b_id, ax))
        cc_neighbors.setdefault(b_id, []).append((a_id, ax))

    def container_bounds(cid: str) -> Rect:
        return wf.container(comps[cid].container_id).bounds

    def growth_cap(cid: str) -> float:
        r = rects[cid]
        cont = container_bounds(cid)
        if r.w <= 0 or r.h <= 0:
            return 0.0
        max_w = 2 * min(r.cx - cont.x, cont.right - r.cx)
        max_h = 2 * min(r.cy - cont.y, cont.bottom - r.cy)
        factor = min(max_w / r.w, max_h / r.h)
        for peer_id, ax in cc_neighbors.get(cid, ()):
            gap = gap_along(r, rects[peer_id], ax)
            slack = gap - th.min_interval_dp - BOUNDARY_EPS
            if slack < 0:
                continue  # that pair is itself violating; it gets re-spaced
            if ax == "x":
                factor = min(factor, (r.w + 2 * slack) / r.w)
            else:
                factor = min(factor, (r.h + 2 * slack) / r.h)
        return max(factor, 0.0) * min(r.w, r.h)

    def sized_to(r: Rect, new_min: float) -> Rect:
        # Proportional, centered; the smaller dimension lands on new_min
        # exactly so a boundary target stays exactly on the boundary.
        if r.w <= r.h:
            nw = new_min
            nh = new_min * (r.h / r.w)
        else:
            nh = new_min
            nw = new_min * (r.w / r.h)
        return Rect(r.cx - nw / 2, r.cy - nh / 2, nw, nh)

    def axis_pos(cid: str, axis: str) -> float:
        return rects[cid].x if axis == "x" else rects[cid].y

    def axis_end(cid: str, axis: str) -> float:
        return rects[cid].right if axis == "x" else rects[cid].bottom

    def signed_gap(a: str, b: str, axis: str) -> tuple[str, str, float]:
        """(lead, trail, gap); gap is negative when the boxes overlap."""
        if (axis_pos(a, axis), a) <= (axis_pos(b, axis), b):
            lead, trail = a, b
        else:
            lead, trail = b, a
        return lead, trail, axis_pos(trail, axis) - axis_end(lead, axis)

    def move_room(cid: str, axis: str, direction: int) -> float:
        """How far cid can move along axis without leaving its container or
        squeezing a currently compliant neighbor below the spacing floor."""
        if comps[cid].cls == CLASS_IMAGE:
            return 0.0
        r = rects[cid]
        cont = container_bounds(cid)
        if axis == "x":
            room = (r.x - cont.x) if direction < 0 else (cont.right - r.right)
        else:
            room = (r.y - cont.y) if direction < 0 else (cont.bottom - r.bottom)
        for peer_id, ax in cc_neighbors.get(cid, ()):
            if ax != axis:
                continue
            on_side = (
                axis_pos(peer_id, axis) < axis_pos(cid, axis)
                if direction < 0
                else axis_pos(peer_id, axis) > axis_pos(cid, axis)
            )
            if not on_side:
                continue
            slack = gap_along(r, rects[peer_id], axis) - th.min_interval_dp - BOUNDARY_EPS
            if slack < 0:
                continue
            room = min(room, slack)
        return max(room, 0.0)

    def translate(cid: str, axis: str, delta: float) -> None:
        rects[cid] = (
            rects[cid].translated(delta, 0.0)
            if axis == "x"
            else rects[cid].translated(0.0, delta)
        )

    def separate_pair(a: str, b: str, value: float) -> bool:
        """Push a and b apart to at least `value`; True on success."""
        axis = cc_axis.get(frozenset((a, b)))
        if axis is None:
            ra, rb = rects[a], rects[b]
            axis = "x" if abs(ra.cx - rb.cx) >= abs(ra.cy - rb.cy) else "y"
        lead, trail, gap = signed_gap(a, b, axis)
        needed = value + BOUNDARY_EPS - gap
        if needed <= 0:
            return True
        room_lead = move_room(lead, axis, -1)
        room_trail = move_room(trail, axis, +1)
        if room_lead + room_trail < needed:
            return False
        m_lead = min(needed / 2, room_lead)
        m_trail = needed - m_lead
        if m_trail > room_trail:
            m_trail = room_trail
            m_lead = needed - m_trail
        translate(lead, axis, -m_lead)
        # Place the trailing box absolutely so the measured gap cannot round
        # below the target.
        pos = axis_end(lead, axis) + value + BOUNDARY_EPS
        rects[trail] = (
            replace(rects[trail], x=pos)
            if axis == "x"
            else replace(rects[trail], y=pos)
        )
        return True

    # ---- small sizes ----
    for s in issues:
        if s.kind != KIND_SMALL_SIZE:
            continue
        cid = s.component_id
        if comps[cid].cls == CLASS_IMAGE:
            unfixable.append(
                UnfixableEntry(cid, s.kind, None, "image content cannot be resized")
            )
            continue
        alpha = stable.get(cid, 0.0)
        try:
            value, clamps = target_size(alpha, cal, th, size_cap=growth_cap(cid))
        except UnfixableError as exc:
            unfixable.append(UnfixableEntry(cid, s.kind, None, exc.reason))
            continue
        rects[cid] = sized_to(rects[cid], value)
        primary_touched.add(cid)
        note(cid, "size", clamps, signal=alpha)

    # ---- narrow intervals ----
    handled: set[frozenset] = set()
    for s in issues:
        if s.kind != KIND_NARROW_INTERVAL:
            continue
        a, b = s.component_id, s.peer_id
        key = frozenset((a, b))
        if key in handled:
            continue
        handled.add(key)
        axis = cc_axis.get(key, "x")
        movable_a = comps[a].cls != CLASS_IMAGE
        movable_b = comps[b].cls != CLASS_IMAGE
        if not movable_a and not movable_b:
            unfixable.append(
                UnfixableEntry(min(a, b), s.kind, max(a, b), "both members are images")
            )
            continue

        # Runs of 3+ components chained along the axis get one uniform gap.
        cont_id = comps[a].container_id
        ordered = sorted(
            (c.id for c in wf.components_in(cont_id)),
            key=lambda cid: (axis_pos(cid, axis), cid),
        )
        chain = [a]
        k = ordered.index(a)
        while k > 0 and cc_axis.get(frozenset((ordered[k - 1], ordered[k]))) == axis:
            chain.insert(0, ordered[k - 1])
            k -= 1
        k = ordered.index(a)
        while (
            k < len(ordered) - 1
            and cc_axis.get(frozenset((ordered[k], ordered[k + 1]))) == axis
        ):
            chain.append(ordered[k + 1])
            k += 1

        if (
            len(chain) >= 3
            and b in chain
            and all(comps[cid].cls != CLASS_IMAGE for cid in chain[1:])
        ):
            sigs = [stable.get(cid, 0.0) for cid in chain]
            gap_value, clamps = mean_interval(sigs, cal, th)
            cont = container_bounds(a)
            limit = cont.right if axis == "x" else cont.bottom
            for attempt_value in (gap_value, th.min_interval_dp):
                span = sum(
                    (rects[cid].w if axis == "x" else rects[cid].h) for cid in chain
                ) + (attempt_value + BOUNDARY_EPS) * (len(chain) - 1)
                if axis_pos(chain[0], axis) + span <= limit + 1e-6:
                    if attempt_value != gap_value:
                        clamps = clamps + ["room"]
                    cursor = axis_end(chain[0], axis) + attempt_value + BOUNDARY_EPS
                    for cid in chain[1:]:
                        r = rects[cid]
                        rects[cid] = (
                            replace(r, x=cursor) if axis == "x" else replace(r, y=cursor)
                        )
                        cursor = axis_end(cid, axis) + attempt_value + BOUNDARY_EPS
                    for cid in chain:
                        primary_touched.add(cid)
                        note(cid, "interval", clamps, signal=stable.get(cid))
                    for m, n in zip(chain, chain[1:]):
                        handled.add(frozenset((m, n)))
                    break
            else:
                unfixable.append(
                    UnfixableEntry(
                        min(a, b), s.kind, max(a, b), "insufficient container room"
                    )
                )
            continue

        value, clamps = target_interval(stable.get(a, 0.0), stable.get(b, 0.0), cal, th)
        if separate_pair(a, b, value):
            for cid in (a, b):
                if comps[cid].cls != CLASS_IMAGE:
                    primary_touched.add(cid)
                    note(cid, "interval", clamps, signal=stable.get(cid))
        elif value > th.min_interval_dp and separate_pair(a, b, th.min_interval_dp):
            for cid in (a, b):
                if comps[cid].cls != CLASS_IMAGE:
                    primary_touched.add(cid)
                    note(cid, "interval", clamps + ["room"], signal=stable.get(cid))
        else:
            unfixable.append(
                UnfixableEntry(min(a, b), s.kind, max(a, b), "insufficient container room")
            )

    # ---- low contrast ----
    for s in issues:
        if s.kind != KIND_LOW_CONTRAST:
            continue
        cid = s.component_id
        comp = comps[cid]
        if comp.cls == CLASS_IMAGE:
            unfixable.append(
                UnfixableEntry(cid, s.kind, None, "image content cannot be recolored")
            )
            continue
        alpha = stable.get(cid, 0.0)
        comp_now = replace(comp, bounds=rects[cid])
        value, clamps = target_contrast(alpha, cal, th, comp_now)
        limit = contrast_threshold_for(comp_now, th)
        result = recolor(
            colors[cid], wf.background_color, value, mode=recolor_mode, at_least=limit
        )
        if not result.feasible:
            unfixable.append(
                UnfixableEntry(
                    cid,
                    s.kind,
                    None,
                    f"max achievable contrast {result.max_achievable:.2f}",
                )
            )
            continue
        colors[cid] = result.color
        primary_touched.add(cid)
        note(cid, "contrast", clamps, signal=alpha, achieved=result.achieved)

    # ---- co-adjustments ----
    problem_set = set(problem_ids)
    for comp in wf.components:
        cid = comp.id
        if cid in problem_set or comp.cls == CLASS_IMAGE:
            continue
        f1 = initial.get(cid)
        alpha = stable.get(cid)
        if f1 is None or alpha is None:
            continue
        shift = (alpha - f1) / max(abs(f1), 1e-9)
        if abs(shift) <= 0.01:
            continue
        factor = 1.0 + min(max(shift, -0.05), 0.05)
        r = rects[cid]
        size = min(r.w, r.h)
        if comp.cls == CLASS_BUTTON and size >= th.min_touch_dp:
            factor = max(factor, (th.min_touch_dp + BOUNDARY_EPS) / size)
        if comp.cls == CLASS_TEXT:
            # A height change must not move the text across the large-text
            # boundary; that would silently change its contrast threshold.
            if (r.h >= th.large_text_dp) != (r.h * factor >= th.large_text_dp):
                continue
        cap = growth_cap(cid)
        if size * factor > cap:
            factor = cap / size
        if factor <= 0 or abs(factor - 1.0) < 1e-9:
            continue
        rects[cid] = r.scaled_about_center(factor)
        co_adjusted.add(cid)
        note(cid, "co-adjust", [], signal=alpha, shift=shift)

    # ---- validation ----
    def working_wf() -> Wireframe:
        newc = tuple(
            replace(c, bounds=rects[c.id], color=colors[c.id]) for c in wf.components
        )
        return replace(wf, components=resolve_overlaps(newc))

    def revert(cid: str) -> None:
        rects[cid] = original_rects[cid]
        colors[cid] = original_colors[cid]
        reverted.add(cid)
        prov.pop(cid, None)
        co_adjusted.discard(cid)

    pre_keys = {s.key for s in detect_issues(wf, th)}

    for _round in range(5):
        fresh = [s for s in detect_issues(working_wf(), th) if s.key not in pre_keys]
        if not fresh:
            break
        for s in fresh:
            if s.kind == KIND_SMALL_SIZE:
                cid = s.component_id
                if comps[cid].cls != CLASS_IMAGE and growth_cap(cid) >= th.min_touch_dp:
                    rects[cid] = sized_to(rects[cid], th.min_touch_dp)
                    note(cid, "validation", ["threshold"])
                else:
                    revert(cid)
            elif s.kind == KIND_NARROW_INTERVAL:
                if not separate_pair(s.component_id, s.peer_id, th.min_interval_dp):
                    revert(s.component_id)
                    revert(s.peer_id)
                else:
                    note(s.component_id, "validation", ["threshold"])
                    note(s.peer_id, "validation", ["threshold"])
            else:
                cid = s.component_id
                comp_now = replace(comps[cid], bounds=rects[cid])
                limit = contrast_threshold_for(comp_now, th)
                if comps[cid].cls != CLASS_IMAGE and colors[cid] is not None:
                    result = recolor(
                        colors[cid], wf.background_color, limit, at_least=limit
                    )
                    if result.feasible:
                        colors[cid] = result.color
                        note(cid, "validation", ["threshold"])
                    else:
                        revert(cid)
                else:
                    revert(cid)

    # Last resort: withdraw changes around anything still freshly broken.
    # Terminates because every round restores at least one changed component
    # and an all-original state cannot carry a fresh issue.
    partial = False
    for _ in range(len(wf.components) + 1):
        fresh = [s for s in detect_issues(working_wf(), th) if s.key not in pre_keys]
        if not fresh:
            break
        partial = True
        for s in fresh:
            revert(s.component_id)
            if s.peer_id:
                revert(s.peer_id)

    if reverted:
        for s in issues:
            members = {s.component_id} | ({s.peer_id} if s.peer_id else set())
            if members & reverted:
                partial = True
                unfixable.append(
                    UnfixableEntry(
                        s.component_id, s.kind, s.peer_id, "validation could not converge"
                    )
                )

    # ---- emit ----
    changes: list[Change] = []
    for comp in sorted(wf.components, key=lambda c: c.id):
        cid = comp.id
        minor = cid in co_adjusted and cid not in primary_touched
        if rects[cid] != original_rects[cid]:
            changes.append(
                Change(
                    cid,
                    "bounds",
                    original_rects[cid].as_tuple(),
                    rects[cid].as_tuple(),
                    minor=minor,
                    provenance=prov.get(cid, {}),
                )
            )
        if colors[cid] != original_colors[cid]:
            changes.append(
                Change(
                    cid,
                    "color",
                    tuple(original_colors[cid]),
                    tuple(colors[cid]),
                    minor=minor,
                    provenance=prov.get(cid, {}),
                )
            )

    seen: set[tuple] = set()
    unique_unfixable = []
    for entry in sorted(
        unfixable, key=lambda u: (u.component_id, u.kind, u.peer_id or "", u.reason)
    ):
        k = (entry.component_id, entry.kind, entry.peer_id)
        if k not in seen:
            seen.add(k)
            unique_unfixable.append(entry)

    return FixPlan(
        Patch(tuple(changes), tuple(unique_unfixable), partial, seed),
        stable,
        prediction,
    )


# -- applying and reporting --------------------------------------------------


def apply_patch(tree: ViewTree, patch: Patch) -> ViewTree:
    """Rebuild the hierarchy with patched bounds/colors; shares untouched nodes."""
    updates: dict[str, object] = {}
    for change in patch.changes:
        node = updates.get(change.component_id)
        if node is None:
            node = find_node(tree, change.component_id)
        if node is None:
            raise PatchError(f"patch references unknown component {change.component_id!r}")
        if change.field == "bounds":
            updates[change.component_id] = replace(node, bounds=Rect(*change.new))
        elif change.field == "color":
            updates[change.component_id] = replace(
                node, color=tuple(int(v) for v in change.new)
            )
        else:
            raise PatchError(f"unknown change field {change.field!r}")
    return replace_nodes(tree, updates)


def classify(pre: list[Issue], post: list[Issue], patch: Patch) -> FixReport:
    """Per-issue verdicts: gone entirely, changed but still flagged, or
    untouched; plus any issue present only after the patch."""
    post_keys = {s.key for s in post}
    pre_keys = {s.key for s in pre}
    changed_bounds = {c.component_id for c in patch.changes if c.field == "bounds"}
    changed_color = {c.component_id for c in patch.changes if c.field == "color"}

    verdicts = []
    for s in sorted(pre, key=lambda i: i.key):
        if s.key not in post_keys:
            v = VERDICT_FIXED
        else:
            if s.kind == KIND_LOW_CONTRAST:
                touched = s.component_id in changed_color
            elif s.kind == KIND_NARROW_INTERVAL:
                touched = s.component_id in changed_bounds or s.peer_id in changed_bounds
            else:
                touched = s.component_id in changed_bounds
            v = VERDICT_HALF_BAKED if touched else VERDICT_UNFIXED
        verdicts.append(Verdict(s, v))

    extra = tuple(s for s in post if s.key not in pre_keys)
    return FixReport(tuple(verdicts), extra, patch.partial)


def _issue_dict(s: Issue) -> dict:
    return {
        "component_id": s.component_id,
        "kind": s.kind,
        "measured": s.measured,
        "threshold": s.threshold,
        "peer_id": s.peer_id,
    }


def _issue_from_dict(d: dict) -> Issue:
    return Issue(
        component_id=d["component_id"],
        kind=d["kind"],
        measured=d["measured"],
        threshold=d["threshold"],
        peer_id=d.get("peer_id"),
    )


def patch_to_dict(patch: Patch) -> dict:
    return {
        "changes": [
            {
                "component_id": c.component_id,
                "field": c.field,
                "old": list(c.old),
                "new": list(c.new),
                "minor": c.minor,
                "provenance": c.provenance,
            }
            for c in patch.changes
        ],
        "unfixable": [
            {
                "component_id": u.component_id,
                "kind": u.kind,
                "peer_id": u.peer_id,
                "reason": u.reason,
            }
            for u in patch.unfixable
        ],
        "partial": patch.partial,
        "seed": patch.seed,
    }


def dump_patch(patch: Patch) -> str:
    return json.dumps(patch_to_dict(patch), sort_keys=True, indent=2) + "\n"


def parse_patch(text: str) -> Patch:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PatchError(f"patch is not valid JSON: {exc}") from None
    try:
        changes = tuple(
            Change(
                component_id=c["component_id"],
                field=c["field"],
                old=tuple(c["old"]),
                new=tuple(c["new"]),
                minor=bool(c.get("minor", False)),
                provenance=c.get("provenance", {}),
            )
            for c in d["changes"]
        )
        unfixable = tuple(
            UnfixableEntry(u["component_id"], u["kind"], u.get("peer_id"), u["reason"])
            for u in d["unfixable"]
        )
        return Patch(changes, unfixable, bool(d["partial"]), int(d["seed"]))
    except (KeyError, TypeError) as exc:
        raise PatchError(f"patch is missing field: {exc}") from None


def report_to_dict(report: FixReport) -> dict:
    return {
        "verdicts": [
            {"issue": _issue_dict(v.issue), "verdict": v.verdict}
            for v in report.verdicts
        ],
        "extra": [_issue_dict(s) for s in report.extra],
        "partial": report.partial,
        "counts": {
            VERDICT_FIXED: report.count(VERDICT_FIXED),
            VERDICT_HALF_BAKED: report.count(VERDICT_HALF_BAKED),
            VERDICT_UNFIXED: report.count(VERDICT_UNFIXED),
            "Extra": len(report.extra),
        },
    }


def dump_report(report: FixReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"


def parse_report(text: str) -> FixReport:
    d = json.loads(text)
    verdicts = tuple(
        Verdict(_issue_from_dict(v["issue"]), v["verdict"]) for v in d["verdicts"]
    )
    extra = tuple(_issue_from_dict(s) for s in d["extra"])
    return FixReport(verdicts, extra, bool(d["partial"]))


@dataclass
class FixRun:
    wireframe: Wireframe
    issues: list[Issue]
    plan: FixPlan
    fixed_tree: ViewTree
    post_issues: list[Issue]
    report: FixReport


def run_fix(
    tree: ViewTree,
    meta: ScreenMeta,
    model: TrainedModel,
    cal: Calibration,
    th: Thresholds = Thresholds(),
    *,
    seed: int = 0,
    signal_cfg: SignalConfig = SignalConfig(),
    max_iterations: int = 500,
    recolor_mode: str = MODE_LUMINANCE,
) -> FixRun:
    """Detect, plan, apply, re-detect, classify: the whole loop for one screen."""
    from .wireframe import wireframe_from_tree

    wf = wireframe_from_tree(tree, meta)
    issues = detect_issues(wf, th)
    plan = plan_fix(
        wf,
        issues,
        model,
        cal,
        th,
        seed=seed,
        signal_cfg=signal_cfg,
        max_iterations=max_iterations,
        recolor_mode=recolor_mode,
    )
    fixed = apply_patch(tree, plan.patch)
    post = detect_issues(wireframe_from_tree(fixed, meta), th)
    return FixRun(wf, issues, plan, fixed, post, classify(issues, post, plan.patch))
