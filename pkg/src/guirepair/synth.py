"""Synthetic screen corpus with known-good and known-broken variants.

Every generated screen is compliant by construction (and re-checked with the
detector before it is accepted).  The broken variant of a screen carries a
small number of injected violations; each injection is verified by running
the detector and requiring that its findings match the injected set exactly,
so the manifest is ground truth by construction rather than by trust.

Injection choices deliberately avoid images for size and contrast targets:
image content cannot be resized or recolored, so such violations could never
be repaired and would only measure the generator, not the repair pipeline.
Spacing injections may involve an image as the anchored member.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .detect import (
    KIND_LOW_CONTRAST,
    KIND_NARROW_INTERVAL,
    KIND_SMALL_SIZE,
    Thresholds,
    contrast_ratio,
    contrast_threshold_for,
    detect_issues,
)
from .geometry import Rect
from .graph import REL_CC, build_graph
from .layout import (
    CLASS_BUTTON,
    CLASS_IMAGE,
    CLASS_TEXT,
    CLASS_VIEWGROUP,
    ScreenMeta,
    ViewNode,
    ViewTree,
    replace_nodes,
    serialize_hierarchy,
)
from .wireframe import wireframe_from_tree

# Dark shades whose contrast against a white background clears the strictest
# text threshold with margin.
PALETTE = (
    (33, 33, 33),
    (55, 71, 79),
    (78, 52, 46),
    (21, 101, 192),
    (46, 125, 50),
    (183, 28, 28),
    (106, 27, 154),
    (0, 105, 92),
    (69, 39, 160),
    (191, 54, 12),
)

# Node classes are stored in their inferred category form; parsing any
# document normalizes to the same categories, so the corpus round-trips.
CLS_BUTTON = CLASS_BUTTON
CLS_TEXT = CLASS_TEXT
CLS_IMAGE = CLASS_IMAGE
CLS_PANEL = CLASS_VIEWGROUP
CLS_ROOT = CLASS_VIEWGROUP


class SynthError(RuntimeError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    count: int = 20
    seed: int = 0
    screen_w: float = 360.0
    screen_h: float = 640.0
    density: float = 2.0
    background: tuple[int, int, int] = (255, 255, 255)
    issues_min: int = 1
    issues_max: int = 3
    image_share: float = 0.1
    panels_min: int = 2
    panels_max: int = 3


@dataclass(frozen=True)
class InjectedIssue:
    component_id: str
    kind: str
    peer_id: str | None = None

    @property
    def key(self) -> tuple:
        return (self.component_id, self.kind, self.peer_id)


@dataclass
class SynthScreen:
    name: str
    clean: ViewTree
    broken: ViewTree
    meta: ScreenMeta
    issues: tuple[InjectedIssue, ...]


def _rng(cfg: SynthConfig, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, *path]))


def _pick(rng: np.random.Generator, seq):
    return seq[int(rng.integers(len(seq)))]


def _leaf(rng: np.random.Generator, cfg: SynthConfig, counters: dict) -> tuple[str, str]:
    """(node id, raw class) for the next leaf."""
    roll = float(rng.uniform())
    if roll < cfg.image_share:
        kind, cls = "img", CLS_IMAGE
    elif roll < cfg.image_share + 0.55:
        kind, cls = "btn", CLS_BUTTON
    else:
        kind, cls = "txt", CLS_TEXT
    counters[kind] = counters.get(kind, 0) + 1
    return f"{kind}{counters[kind]:02d}", cls


def _make_node(nid: str, cls: str, bounds: Rect, rng: np.random.Generator) -> ViewNode:
    if cls == CLS_IMAGE:
        return ViewNode(nid, cls, bounds)
    color = _pick(rng, PALETTE)
    text = f"{nid} label"
    return ViewNode(nid, cls, bounds, color=color, text=text)


def _fill_row(rng, cfg, counters, inner: Rect) -> list[ViewNode]:
    n = int(rng.integers(2, 5))
    gap = float(rng.uniform(10, 24))
    h = float(rng.uniform(48, min(72, inner.h)))
    width_each = (inner.w - gap * (n - 1)) / n
    while width_each < 48 and n > 2:
        n -= 1
        width_each = (inner.w - gap * (n - 1)) / n
    nodes = []
    x = inner.x
    y = inner.y + (inner.h - h) / 2
    for _ in range(n):
        nid, cls = _leaf(rng, cfg, counters)
        nodes.append(_make_node(nid, cls, Rect(x, y, width_each, h), rng))
        x += width_each + gap
    return nodes


def _fill_column(rng, cfg, counters, inner: Rect) -> list[ViewNode]:
    gap = float(rng.uniform(10, 20))
    nodes = []
    y = inner.y
    while True:
        nid, cls = _leaf(rng, cfg, counters)
        if cls == CLS_TEXT:
            h = float(_pick(rng, (14.0, 16.0, 20.0, 24.0)))
        else:
            h = float(rng.uniform(48, 64))
        if y + h > inner.bottom or len(nodes) >= 6:
            break
        nodes.append(_make_node(nid, cls, Rect(inner.x, y, inner.w, h), rng))
        y += h + gap
        if y + 48 > inner.bottom and len(nodes) >= 2:
            break
    return nodes


def _fill_grid(rng, cfg, counters, inner: Rect) -> list[ViewNode]:
    gap_x = float(rng.uniform(10, 20))
    gap_y = float(rng.uniform(10, 20))
    rows = 3 if inner.h >= 3 * 48 + 2 * gap_y else 2
    cell_w = (inner.w - gap_x) / 2
    cell_h = float(rng.uniform(48, min(64, (inner.h - gap_y * (rows - 1)) / rows)))
    nodes = []
    for row in range(rows):
        for col in range(2):
            nid, cls = _leaf(rng, cfg, counters)
            x = inner.x + col * (cell_w + gap_x)
            y = inner.y + row * (cell_h + gap_y)
            nodes.append(_make_node(nid, cls, Rect(x, y, cell_w, cell_h), rng))
    return nodes


def _generate_clean(cfg: SynthConfig, index: int) -> tuple[ViewTree, ScreenMeta]:
    rng = _rng(cfg, 0, index)
    margin = 16.0
    panel_gap = 24.0
    padding = 12.0
    n_panels = int(rng.integers(cfg.panels_min, cfg.panels_max + 1))
    usable = cfg.screen_h - 2 * margin - panel_gap * (n_panels - 1)
    weights = rng.uniform(0.8, 1.2, size=n_panels)
    heights = usable * weights / weights.sum()

    counters: dict[str, int] = {}
    panels = []
    y = margin
    for p in range(n_panels):
        ph = float(heights[p])
        panel_bounds = Rect(margin, y, cfg.screen_w - 2 * margin, ph)
        inner = Rect(
            panel_bounds.x + padding,
            panel_bounds.y + padding,
            panel_bounds.w - 2 * padding,
            panel_bounds.h - 2 * padding,
        )
        pattern = _pick(rng, ("row", "column", "grid"))
        # grid needs two 48dp rows plus the largest possible row gap
        if pattern == "grid" and inner.h < 48 * 2 + 20:
            pattern = "row"
        if pattern == "row":
            leaves = _fill_row(rng, cfg, counters, inner)
        elif pattern == "column":
            leaves = _fill_column(rng, cfg, counters, inner)
        else:
            leaves = _fill_grid(rng, cfg, counters, inner)
        if leaves:
            panels.append(
                ViewNode(f"panel{p}", CLS_PANEL, panel_bounds, children=tuple(leaves))
            )
        y += ph + panel_gap

    root = ViewNode(
        "screen", CLS_ROOT, Rect(0, 0, cfg.screen_w, cfg.screen_h), children=tuple(panels)
    )
    meta = ScreenMeta(
        width_px=int(round(cfg.screen_w * cfg.density)),
        height_px=int(round(cfg.screen_h * cfg.density)),
        density=cfg.density,
        background_color=cfg.background,
    )
    return root, meta


# -- injections --------------------------------------------------------------


def _inject_size(rng, tree, wf, th) -> tuple[dict, InjectedIssue] | None:
    buttons = sorted(
        c.id
        for c in wf.components
        if c.cls == "Button" and min(c.bounds.w, c.bounds.h) >= th.min_touch_dp
    )
    if not buttons:
        return None
    cid = _pick(rng, buttons)
    comp = wf.component(cid)
    target = float(rng.uniform(24, 44))
    scale = target / min(comp.bounds.w, comp.bounds.h)
    new_bounds = comp.bounds.scaled_about_center(scale)
    return {cid: new_bounds}, InjectedIssue(cid, KIND_SMALL_SIZE)


def _inject_interval(rng, tree, wf, th) -> tuple[dict, InjectedIssue] | None:
    g = build_graph(wf)
    pairs = []
    for i, j, rel in g.edges:
        if rel != REL_CC:
            continue
        a, b = g.nodes[i].id, g.nodes[j].id
        ca, cb = wf.component(a), wf.component(b)
        if ca.cls == "Image" and cb.cls == "Image":
            continue
        pairs.append((min(a, b), max(a, b), g.corridor_axes[(i, j)]))
    if not pairs:
        return None
    a, b, axis = _pick(rng, sorted(pairs))
    ca, cb = wf.component(a), wf.component(b)
    # move the later box toward the earlier one; prefer a non-image mover
    mover, anchor = (b, a)
    if wf.component(mover).cls == "Image":
        mover, anchor = (a, b)
    rm, ra = wf.component(mover).bounds, wf.component(anchor).bounds
    if axis == "x":
        gap = max(ra.x - rm.right, rm.x - ra.right)
    else:
        gap = max(ra.y - rm.bottom, rm.y - ra.bottom)
    target_gap = float(rng.uniform(1.0, 6.5))
    delta = gap - target_gap
    if delta <= 0:
        return None
    sign = 1.0 if (ra.x > rm.x if axis == "x" else ra.y > rm.y) else -1.0
    moved = rm.translated(sign * delta, 0) if axis == "x" else rm.translated(0, sign * delta)
    return {mover: moved}, InjectedIssue(min(a, b), KIND_NARROW_INTERVAL, max(a, b))


def _inject_contrast(rng, tree, wf, th, background) -> tuple[dict, InjectedIssue] | None:
    colored = sorted(
        c.id for c in wf.components if c.color is not None and c.cls != "Image"
    )
    if not colored:
        return None
    cid = _pick(rng, colored)
    comp = wf.component(cid)
    limit = contrast_threshold_for(comp, th)
    base = np.array(comp.color, dtype=float)
    bg = np.array(background, dtype=float)
    choices = []
    for t in np.linspace(0.0, 1.0, 101):
        cand = tuple(int(round(v)) for v in (base + t * (bg - base)))
        ratio = contrast_ratio(cand, background)
        if 1.3 <= ratio <= limit - 0.3:
            choices.append(cand)
    if not choices:
        return None
    washed = _pick(rng, choices)
    return {cid: washed}, InjectedIssue(cid, KIND_LOW_CONTRAST)


def inject_issues(
    tree: ViewTree,
    meta: ScreenMeta,
    cfg: SynthConfig,
    index: int,
    th: Thresholds = Thresholds(),
) -> tuple[ViewTree, tuple[InjectedIssue, ...]]:
    """Corrupt a clean screen; returns the broken tree and the verified issue
    list.  Each candidate injection is applied, the screen re-detected, and
    the injection kept only if the detector finds exactly the injected set."""
    rng = _rng(cfg, 1, index)
    n_target = int(rng.integers(cfg.issues_min, cfg.issues_max + 1))
    kinds = [KIND_SMALL_SIZE, KIND_NARROW_INTERVAL, KIND_LOW_CONTRAST]

    current = tree
    injected: list[InjectedIssue] = []
    used: set[str] = set()
    attempts = 0
    while len(injected) < n_target and attempts < 24:
        attempts += 1
        wf = wireframe_from_tree(current, meta)
        kind = kinds[int(rng.integers(3))]
        if kind == KIND_SMALL_SIZE:
            out = _inject_size(rng, current, wf, th)
        elif kind == KIND_NARROW_INTERVAL:
            out = _inject_interval(rng, current, wf, th)
        else:
            out = _inject_contrast(rng, current, wf, th, meta.background_color)
        if out is None:
            continue
        patch, issue = out
        members = {issue.component_id} | ({issue.peer_id} if issue.peer_id else set())
        if members & used:
            continue
        updates = {}
        for nid, value in patch.items():
            node = _find(current, nid)
            if isinstance(value, Rect):
                updates[nid] = _replace_bounds(node, value)
            else:
                updates[nid] = _replace_color(node, value)
        candidate = replace_nodes(current, updates)
        found = {
            (s.component_id, s.kind, s.peer_id)
            for s in detect_issues(wireframe_from_tree(candidate, meta), th)
        }
        expected = {i.key for i in injected} | {issue.key}
        if found != expected:
            continue
        current = candidate
        injected.append(issue)
        used |= members
    if not injected:
        raise SynthError(f"could not inject any issue into screen {index}")
    return current, tuple(sorted(injected, key=lambda i: i.key))


def _find(tree: ViewTree, nid: str) -> ViewNode:
    for node in tree.walk():
        if node.id == nid:
            return node
    raise SynthError(f"no node {nid!r}")


def _replace_bounds(node: ViewNode, bounds: Rect) -> ViewNode:
    return ViewNode(node.id, node.cls, bounds, node.color, node.text, node.children)


def _replace_color(node: ViewNode, color) -> ViewNode:
    return ViewNode(node.id, node.cls, node.bounds, tuple(color), node.text, node.children)


# -- corpus ------------------------------------------------------------------


def generate_corpus(cfg: SynthConfig, th: Thresholds = Thresholds()) -> list[SynthScreen]:
    screens = []
    for index in range(cfg.count):
        clean = None
        # Construction should already be compliant; the re-roll loop only
        # guards against a pathological random draw.
        for retry in range(8):
            tree, meta = _generate_clean(cfg, index + retry * 100003)
            wf = wireframe_from_tree(tree, meta)
            if len(wf.components) >= 4 and not detect_issues(wf, th):
                clean = (tree, meta)
                break
        if clean is None:
            raise SynthError(f"could not generate a compliant screen for index {index}")
        tree, meta = clean
        broken, issues = inject_issues(tree, meta, cfg, index, th)
        screens.append(SynthScreen(f"gui_{index:03d}", tree, broken, meta, issues))
    return screens


def write_corpus(screens: list[SynthScreen], out_dir) -> dict:
    """Write clean/, broken/ and manifest.json under out_dir; returns the
    manifest dict."""
    from pathlib import Path

    from .ioutil import atomic_write_text

    out = Path(out_dir)
    (out / "clean").mkdir(parents=True, exist_ok=True)
    (out / "broken").mkdir(parents=True, exist_ok=True)
    manifest: dict = {"screens": {}}
    for s in screens:
        clean_rel = f"clean/{s.name}.json"
        broken_rel = f"broken/{s.name}.json"
        atomic_write_text(out / clean_rel, serialize_hierarchy(s.clean, s.meta))
        atomic_write_text(out / broken_rel, serialize_hierarchy(s.broken, s.meta))
        manifest["screens"][s.name] = {
            "clean": clean_rel,
            "broken": broken_rel,
            "issues": [
                {"component_id": i.component_id, "kind": i.kind, "peer_id": i.peer_id}
                for i in s.issues
            ],
        }
    atomic_write_text(
        out / "manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    )
    return manifest


def read_manifest(path) -> dict:
    from pathlib import Path

    text = Path(path).read_text()
    manifest = json.loads(text)
    if "screens" not in manifest or not isinstance(manifest["screens"], dict):
        raise SynthError("manifest has no screens table")
    return manifest
