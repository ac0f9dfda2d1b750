"""Ingestion of GUI hierarchy dumps.

Two input formats are supported:

* ``xml-dump`` -- the UIAutomator style ``<node bounds="[l,t][r,b]" .../>``
  hierarchy, bounds in raw pixels.  Screen metadata may be carried as
  attributes on the root element (``width``, ``height``, ``density``,
  ``background``); width/height default to the outermost node's extent,
  density to 1.0 and background to white.
* ``json-dump`` -- the canonical form emitted by this package: a ``screen``
  block (pixel dimensions, density, background color) plus a ``root`` node
  tree whose bounds are ``[left, top, width, height]`` in dp.

All downstream geometry is dp; pixel bounds are divided by density exactly
once, at parse time.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .geometry import Rect

CLASS_BUTTON = "Button"
CLASS_TEXT = "Text"
CLASS_IMAGE = "Image"
CLASS_VIEWGROUP = "ViewGroup"
CLASS_OTHER = "Other"

COMPONENT_CLASSES = (CLASS_BUTTON, CLASS_TEXT, CLASS_IMAGE)

# Substring rules applied in order; first hit wins.
_CLASS_RULES = (
    ("Button", CLASS_BUTTON),
    ("Text", CLASS_TEXT),
    ("Image", CLASS_IMAGE),
    ("Layout", CLASS_VIEWGROUP),
    ("ViewGroup", CLASS_VIEWGROUP),
    ("Recycler", CLASS_VIEWGROUP),
)

_BOUNDS_RE = re.compile(r"\[(-?\d+),(-?\d+)\]\[(-?\d+),(-?\d+)\]")


class ParseError(ValueError):
    """Malformed or inconsistent hierarchy dump."""


def infer_class(raw_class: str) -> str:
    for needle, cls in _CLASS_RULES:
        if needle in raw_class:
            return cls
    return CLASS_OTHER


@dataclass(frozen=True)
class ScreenMeta:
    width_px: int
    height_px: int
    density: float
    background_color: tuple[int, int, int]

    @property
    def width_dp(self) -> float:
        return self.width_px / self.density

    @property
    def height_dp(self) -> float:
        return self.height_px / self.density


@dataclass(frozen=True)
class ViewNode:
    """One view in the hierarchy; bounds are dp."""

    id: str
    cls: str
    bounds: Rect
    color: tuple[int, int, int] | None = None
    text: str | None = None
    children: tuple["ViewNode", ...] = ()

    def walk(self) -> Iterator["ViewNode"]:
        yield self
        for child in self.children:
            yield from child.walk()


# The tree is just its root node.
ViewTree = ViewNode


def _parse_color(value) -> tuple[int, int, int]:
    if isinstance(value, str):
        s = value.lstrip("#")
        if len(s) != 6:
            raise ParseError(f"bad color literal {value!r}")
        return (int(s[0:2], 16), int(s[2:4], 16), int(s[4:6], 16))
    if isinstance(value, (list, tuple)) and len(value) == 3:
        rgb = []
        for c in value:
            if not isinstance(c, (int, float)) or isinstance(c, bool):
                raise ParseError(f"non-numeric color channel {c!r}")
            ci = int(c)
            if not 0 <= ci <= 255:
                raise ParseError(f"color channel out of range: {c!r}")
            rgb.append(ci)
        return tuple(rgb)
    raise ParseError(f"bad color value {value!r}")


def _check_number(value, what: str, node_id: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"non-numeric {what} at node {node_id}")
    v = float(value)
    if not np.isfinite(v):
        raise ParseError(f"non-finite {what} at node {node_id}")
    return v


def _parse_xml(raw: str) -> tuple[ViewNode, ScreenMeta]:
    try:
        root_el = ET.fromstring(raw)
    except ET.ParseError as exc:
        raise ParseError(f"malformed xml document: {exc}") from None

    # UIAutomator wraps everything in <hierarchy>; accept a bare <node> too.
    if root_el.tag == "node":
        top_nodes = [root_el]
        meta_el = None
    else:
        meta_el = root_el
        top_nodes = [el for el in root_el if el.tag == "node"]
        if not top_nodes:
            raise ParseError("no <node> elements in document")
    if len(top_nodes) != 1:
        raise ParseError("expected exactly one root <node>")

    density = 1.0
    background = (255, 255, 255)
    width_px = height_px = None
    if meta_el is not None:
        if "density" in meta_el.attrib:
            try:
                density = float(meta_el.attrib["density"])
            except ValueError:
                raise ParseError("non-numeric density") from None
        if "width" in meta_el.attrib:
            width_px = int(meta_el.attrib["width"])
        if "height" in meta_el.attrib:
            height_px = int(meta_el.attrib["height"])
        if "background" in meta_el.attrib:
            background = _parse_color(meta_el.attrib["background"])
    if density <= 0:
        raise ParseError(f"density must be positive, got {density}")

    counter = [0]
    seen_ids: set[str] = set()

    def build(el: ET.Element) -> ViewNode:
        idx = counter[0]
        counter[0] += 1
        rid = el.attrib.get("resource-id", "").strip()
        node_id = rid if rid and rid not in seen_ids else f"node{idx}"
        if node_id in seen_ids:
            node_id = f"node{idx}"
        seen_ids.add(node_id)

        raw_bounds = el.attrib.get("bounds")
        if not raw_bounds:
            raise ParseError(f"missing bounds at node {node_id}")
        m = _BOUNDS_RE.fullmatch(raw_bounds.strip())
        if not m:
            raise ParseError(f"non-numeric or malformed bounds at node {node_id}")
        l, t, r, b = (int(g) for g in m.groups())
        bounds = Rect(l / density, t / density, (r - l) / density, (b - t) / density)

        color = None
        if "color" in el.attrib:
            color = _parse_color(el.attrib["color"])
        text = el.attrib.get("text") or None
        children = tuple(build(c) for c in el if c.tag == "node")
        return ViewNode(
            id=node_id,
            cls=infer_class(el.attrib.get("class", "")),
            bounds=bounds,
            color=color,
            text=text,
            children=children,
        )

    root = build(top_nodes[0])
    if width_px is None:
        width_px = int(round(root.bounds.right * density))
    if height_px is None:
        height_px = int(round(root.bounds.bottom * density))
    meta = ScreenMeta(width_px, height_px, density, background)
    return root, meta


def _parse_json(raw: str) -> tuple[ViewNode, ScreenMeta]:
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed json document: {exc}") from None
    if not isinstance(doc, dict) or "screen" not in doc or "root" not in doc:
        raise ParseError("document must carry 'screen' and 'root'")

    s = doc["screen"]
    try:
        density = _check_number(s["density"], "density", "<screen>")
        width_px = int(_check_number(s["width_px"], "width_px", "<screen>"))
        height_px = int(_check_number(s["height_px"], "height_px", "<screen>"))
    except KeyError as exc:
        raise ParseError(f"screen block missing {exc.args[0]}") from None
    if density <= 0:
        raise ParseError(f"density must be positive, got {density}")
    background = _parse_color(s.get("background_color", [255, 255, 255]))
    meta = ScreenMeta(width_px, height_px, density, background)

    counter = [0]
    seen_ids: set[str] = set()

    def build(obj) -> ViewNode:
        if not isinstance(obj, dict):
            raise ParseError("node must be an object")
        idx = counter[0]
        counter[0] += 1
        node_id = str(obj.get("id") or f"node{idx}")
        if node_id in seen_ids:
            raise ParseError(f"duplicate id {node_id!r}")
        seen_ids.add(node_id)

        if "bounds" not in obj:
            raise ParseError(f"missing bounds at node {node_id}")
        b = obj["bounds"]
        if not isinstance(b, (list, tuple)) or len(b) != 4:
            raise ParseError(f"missing bounds at node {node_id}")
        x, y, w, h = (_check_number(v, "bounds", node_id) for v in b)

        color = None
        if obj.get("color") is not None:
            color = _parse_color(obj["color"])
        children = tuple(build(c) for c in obj.get("children", []))
        return ViewNode(
            id=node_id,
            cls=infer_class(str(obj.get("class", ""))),
            bounds=Rect(x, y, w, h),
            color=color,
            text=obj.get("text"),
            children=children,
        )

    return build(doc["root"]), meta


def parse_hierarchy(raw: str | bytes, format: str) -> tuple[ViewTree, ScreenMeta]:
    """Parse a hierarchy dump into a validated view tree.

    format is "xml-dump" or "json-dump".  Raises ParseError on malformed
    documents, missing bounds, non-numeric geometry or density <= 0.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    if format == "xml-dump":
        return _parse_xml(raw)
    if format == "json-dump":
        return _parse_json(raw)
    raise ParseError(f"unknown format {format!r}")


def _node_to_obj(node: ViewNode) -> dict:
    obj: dict = {
        "id": node.id,
        "class": node.cls,
        "bounds": [node.bounds.x, node.bounds.y, node.bounds.w, node.bounds.h],
        "color": list(node.color) if node.color is not None else None,
        "text": node.text,
    }
    obj["children"] = [_node_to_obj(c) for c in node.children]
    return obj


def serialize_hierarchy(tree: ViewTree, meta: ScreenMeta) -> str:
    """Render the tree in the canonical json-dump form (bounds in dp)."""
    doc = {
        "screen": {
            "width_px": meta.width_px,
            "height_px": meta.height_px,
            "density": meta.density,
            "background_color": list(meta.background_color),
        },
        "root": _node_to_obj(tree),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def count_nodes(tree: ViewTree) -> int:
    return sum(1 for _ in tree.walk())


def find_node(tree: ViewTree, node_id: str) -> ViewNode | None:
    for n in tree.walk():
        if n.id == node_id:
            return n
    return None


def replace_nodes(tree: ViewTree, updates: dict[str, ViewNode]) -> ViewTree:
    """Return a tree with the given nodes swapped in; untouched nodes are reused."""
    if not updates:
        return tree

    def rebuild(node: ViewNode) -> ViewNode:
        new_children = tuple(rebuild(c) for c in node.children)
        base = updates.get(node.id, node)
        if base is node and all(a is b for a, b in zip(new_children, node.children)):
            return node
        return replace(base, children=new_children)

    return rebuild(tree)


def sample_colors(
    raster: np.ndarray,
    region: tuple[int, int, int, int],
    exclusions: tuple[tuple[int, int, int, int], ...] = (),
) -> tuple[int, int, int]:
    """Dominant color of a screenshot region.

    raster is HxWx3 (or HxWx4) uint8; region and exclusions are (x, y, w, h)
    in pixels.  Pixels are grouped by quantizing each channel into 16 buckets;
    the winning bucket is the most populated one (ties to the lowest packed
    RGB) and the returned color is the most frequent exact color inside it.
    """
    if raster.ndim != 3 or raster.shape[2] < 3:
        raise ValueError("raster must be HxWx3 or HxWx4")
    x, y, w, h = region
    if w <= 0 or h <= 0:
        raise ValueError("empty region")
    sub = raster[y : y + h, x : x + w, :3]
    hh, ww = sub.shape[:2]
    if hh == 0 or ww == 0:
        raise ValueError("region outside raster")
    patch = sub.reshape(-1, 3).astype(np.int64)

    keep = np.ones(patch.shape[0], dtype=bool)
    xs = np.tile(np.arange(x, x + ww), hh)
    ys = np.repeat(np.arange(y, y + hh), ww)
    for ex, ey, ew, eh in exclusions:
        inside = (xs >= ex) & (xs < ex + ew) & (ys >= ey) & (ys < ey + eh)
        keep &= ~inside
    patch = patch[keep]
    if patch.shape[0] == 0:
        raise ValueError("all pixels excluded")

    packed = patch[:, 0] * 65536 + patch[:, 1] * 256 + patch[:, 2]
    buckets = (patch // 16)
    bucket_key = buckets[:, 0] * 256 + buckets[:, 1] * 16 + buckets[:, 2]

    keys, counts = np.unique(bucket_key, return_counts=True)
    best = counts.max()
    winner = keys[counts == best].min()

    member = packed[bucket_key == winner]
    colors, ccounts = np.unique(member, return_counts=True)
    cbest = ccounts.max()
    chosen = int(colors[ccounts == cbest].min())
    return (chosen >> 16 & 255, chosen >> 8 & 255, chosen & 255)
