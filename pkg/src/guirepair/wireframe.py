"""Flattening a view tree into components and containers.

Deep hierarchies are mostly invisible wrapper layouts.  What matters for
accessibility scanning is the set of visible widgets (Button/Text/Image with
positive area) and the layout groups that directly hold them; everything else
is dropped.  Each component is assigned to the smallest ViewGroup whose
bounds contain the component's center; a component covered by no ViewGroup
falls back to an implicit container spanning the whole screen.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Iterable

from .geometry import Rect
from .layout import (
    CLASS_VIEWGROUP,
    COMPONENT_CLASSES,
    ScreenMeta,
    ViewNode,
    ViewTree,
)

log = logging.getLogger(__name__)

IMPLICIT_ROOT_ID = "__root__"


@dataclass(frozen=True)
class Component:
    id: str
    cls: str
    bounds: Rect
    color: tuple[int, int, int] | None
    container_id: str
    contained_by: str | None = None


@dataclass(frozen=True)
class Container:
    id: str
    bounds: Rect


@dataclass(frozen=True)
class Wireframe:
    components: tuple[Component, ...]
    containers: tuple[Container, ...]
    background_color: tuple[int, int, int]
    screen_w: float
    screen_h: float

    def component(self, cid: str) -> Component:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def container(self, cid: str) -> Container:
        for c in self.containers:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def components_in(self, container_id: str) -> tuple[Component, ...]:
        return tuple(c for c in self.components if c.container_id == container_id)


def flatten(tree: ViewTree, meta: ScreenMeta) -> Wireframe:
    """Collapse a hierarchy into its visible components and their containers."""
    groups: list[tuple[ViewNode, int]] = []
    leaves: list[ViewNode] = []

    def visit(node: ViewNode, depth: int) -> None:
        if node.cls == CLASS_VIEWGROUP:
            groups.append((node, depth))
        elif node.cls in COMPONENT_CLASSES and node.bounds.w > 0 and node.bounds.h > 0:
            leaves.append(node)
        for child in node.children:
            visit(child, depth + 1)

    visit(tree, 0)

    screen_w = meta.width_dp
    screen_h = meta.height_dp

    assigned: dict[str, str] = {}
    used_implicit = False
    for comp in leaves:
        cx, cy = comp.bounds.cx, comp.bounds.cy
        candidates = [
            (g.bounds.area, -depth, g.id)
            for g, depth in groups
            if g.bounds.contains_point(cx, cy)
        ]
        if candidates:
            candidates.sort()
            assigned[comp.id] = candidates[0][2]
        else:
            assigned[comp.id] = IMPLICIT_ROOT_ID
            if not used_implicit:
                used_implicit = True
                log.warning(
                    "component %s covered by no ViewGroup; using implicit root container",
                    comp.id,
                )

    container_ids = {assigned[c.id] for c in leaves}
    bounds_by_id = {g.id: g.bounds for g, _ in groups}
    if used_implicit:
        bounds_by_id[IMPLICIT_ROOT_ID] = Rect(0.0, 0.0, screen_w, screen_h)

    # Reading order: top edge, then left edge, then id.
    containers = tuple(
        Container(cid, bounds_by_id[cid])
        for cid in sorted(
            container_ids,
            key=lambda cid: (bounds_by_id[cid].y, bounds_by_id[cid].x, cid),
        )
    )
    # Reading order for components too; document order carries z-stacking,
    # which nothing downstream consumes, and a canonical order makes
    # flatten(to_tree(flatten(t))) an exact fixed point.
    leaves.sort(key=lambda n: (n.bounds.y, n.bounds.x, n.id))
    components = tuple(
        Component(
            id=c.id,
            cls=c.cls,
            bounds=c.bounds,
            color=c.color,
            container_id=assigned[c.id],
        )
        for c in leaves
    )
    return Wireframe(
        components=components,
        containers=containers,
        background_color=meta.background_color,
        screen_w=screen_w,
        screen_h=screen_h,
    )


def resolve_overlaps(components: Iterable[Component]) -> tuple[Component, ...]:
    """Mark full-containment pairs; both components survive.

    A component completely inside a larger one keeps its own bounds and gets
    ``contained_by`` pointing at the smallest enclosing component.  Partial
    overlaps are left untouched (the detector deals with those).
    """
    comps = tuple(components)
    out = []
    for c in comps:
        enclosing = [
            o
            for o in comps
            if o.id != c.id and o.bounds.area > c.bounds.area and o.bounds.contains_rect(c.bounds)
        ]
        if enclosing:
            smallest = min(enclosing, key=lambda o: (o.bounds.area, o.id))
            out.append(replace(c, contained_by=smallest.id))
        else:
            out.append(replace(c, contained_by=None))
    return tuple(out)


def wireframe_from_tree(tree: ViewTree, meta: ScreenMeta) -> Wireframe:
    """flatten + overlap resolution in one step; the usual entry point."""
    wf = flatten(tree, meta)
    return replace(wf, components=resolve_overlaps(wf.components))


def to_tree(wf: Wireframe) -> ViewTree:
    """Rebuild a minimal hierarchy from a wireframe (root > containers > leaves)."""
    children = []
    for cont in wf.containers:
        leaves = tuple(
            ViewNode(id=c.id, cls=c.cls, bounds=c.bounds, color=c.color)
            for c in wf.components_in(cont.id)
        )
        children.append(
            ViewNode(id=cont.id, cls=CLASS_VIEWGROUP, bounds=cont.bounds, children=leaves)
        )
    root_bounds = Rect(0.0, 0.0, wf.screen_w, wf.screen_h)
    return ViewNode(id="__tree_root__", cls=CLASS_VIEWGROUP, bounds=root_bounds, children=tuple(children))


def flat_form(wf: Wireframe, meta: ScreenMeta) -> dict:
    """Flat serialization mirroring the canonical dump's screen block."""
    return {
        "screen": {
            "width_px": meta.width_px,
            "height_px": meta.height_px,
            "density": meta.density,
            "background_color": list(meta.background_color),
        },
        "containers": [
            {"id": c.id, "bounds": list(c.bounds.as_tuple())} for c in wf.containers
        ],
        "components": [
            {
                "id": c.id,
                "class": c.cls,
                "bounds": list(c.bounds.as_tuple()),
                "color": list(c.color) if c.color else None,
                "container_id": c.container_id,
                "contained_by": c.contained_by,
            }
            for c in wf.components
        ],
    }
