"""Typed GUI-graph over a wireframe.

Nodes are components and containers.  Three undirected relations:

* CC -- two components in the same container whose axis projections overlap
  and whose corridor (the rectangle between their facing sides) is free of
  any third component of that container.  Fully contained pairs are recorded
  as containment upstream and are not CC edges.
* CV -- a container and each component it holds.
* VV -- containers chained in reading order (top edge, then left edge), with
  the chain closed into a cycle when three or more containers exist.

Each node carries a 10-slot attribute vector:
x, y, w, h, r, g, b, size, min_interval, contrast -- geometry in dp, size =
min(w, h), min_interval = smallest interval to a CC-adjacent peer (screen
diagonal when there is none), contrast measured against the wireframe
background.  Containers carry all-zero vectors.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .geometry import Rect, diagonal, gap_along, x_overlap, y_overlap
from .wireframe import Component, Container, Wireframe

REL_CC = "CC"
REL_CV = "CV"
REL_VV = "VV"
RELATIONS = (REL_CC, REL_CV, REL_VV)

ATTR_NAMES = ("x", "y", "w", "h", "r", "g", "b", "size", "min_interval", "contrast")
ATTR_DIM = len(ATTR_NAMES)

KIND_COMPONENT = "component"
KIND_CONTAINER = "container"

Edge = tuple[int, int, str]  # (i, j, relation) with i < j


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class GraphNode:
    id: str
    kind: str
    attrs: tuple[float, ...] = field(default=(0.0,) * ATTR_DIM)


@dataclass(frozen=True)
class GuiGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[Edge, ...]  # sorted, i < j
    intervals: dict[tuple[int, int], float] = field(default_factory=dict, compare=False)
    corridor_axes: dict[tuple[int, int], str] = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def index_of(self, node_id: str) -> int:
        for i, node in enumerate(self.nodes):
            if node.id == node_id:
                return i
        raise GraphError(f"unknown node id {node_id!r}")

    def edges_of(self, relation: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e[2] == relation)

    def cc_neighbors(self, i: int) -> tuple[int, ...]:
        out = []
        for a, b, rel in self.edges:
            if rel != REL_CC:
                continue
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return tuple(out)


def corridor_between(a: Rect, b: Rect) -> tuple[str, float, Rect | None]:
    """Corridor axis, gap, and the corridor rectangle between two boxes.

    Returns (axis, gap, rect); axis is the direction along which the boxes
    face each other.  rect is None when the boxes touch or overlap (there is
    no room for a blocker).  Diagonal placement yields ("", -1, None).
    """
    ox = x_overlap(a, b)
    oy = y_overlap(a, b)
    if ox > 0 and oy > 0:
        # Overlapping boxes: facing axis taken from the larger center offset.
        axis = "x" if abs(a.cx - b.cx) >= abs(a.cy - b.cy) else "y"
        return axis, 0.0, None
    if ox > 0:
        gap = gap_along(a, b, "y")
        if gap == 0:
            return "y", 0.0, None
        top = a if a.bottom <= b.y else b
        bot = b if top is a else a
        left = max(a.x, b.x)
        return "y", gap, Rect(left, top.bottom, ox, bot.y - top.bottom)
    if oy > 0:
        gap = gap_along(a, b, "x")
        if gap == 0:
            return "x", 0.0, None
        lead = a if a.right <= b.x else b
        trail = b if lead is a else a
        top = max(a.y, b.y)
        return "x", gap, Rect(lead.right, top, trail.x - lead.right, oy)
    return "", -1.0, None


def cc_pairs(wf: Wireframe) -> list[tuple[Component, Component, str, float]]:
    """All CC-adjacent pairs with corridor axis and interval."""
    out = []
    for cont in wf.containers:
        members = wf.components_in(cont.id)
        for idx_a in range(len(members)):
            for idx_b in range(idx_a + 1, len(members)):
                a, b = members[idx_a], members[idx_b]
                if a.contained_by == b.id or b.contained_by == a.id:
                    continue  # containment is its own relation
                axis, gap, corridor = corridor_between(a.bounds, b.bounds)
                if not axis:
                    continue
                if corridor is not None:
                    blocked = any(
                        m.id not in (a.id, b.id) and m.bounds.intersects(corridor)
                        for m in members
                    )
                    if blocked:
                        continue
                out.append((a, b, axis, gap))
    return out


def reading_order(containers: tuple[Container, ...]) -> list[Container]:
    return sorted(containers, key=lambda c: (c.bounds.y, c.bounds.x, c.id))


def contrast_of(color: tuple[int, int, int] | None, background: tuple[int, int, int]) -> float:
    from .detect import contrast_ratio  # local import; detect owns the WCAG math

    if color is None:
        return 1.0
    return contrast_ratio(color, background)


def build_graph(wf: Wireframe) -> GuiGraph:
    comp_ids = [c.id for c in wf.components]
    cont_ids = [c.id for c in reading_order(wf.containers)]
    order = comp_ids + cont_ids
    index = {nid: i for i, nid in enumerate(order)}
    if len(index) != len(order):
        raise GraphError("duplicate node ids across components/containers")

    pairs = cc_pairs(wf)
    intervals: dict[tuple[int, int], float] = {}
    axes: dict[tuple[int, int], str] = {}
    edges: set[Edge] = set()
    for a, b, axis, gap in pairs:
        i, j = sorted((index[a.id], index[b.id]))
        edges.add((i, j, REL_CC))
        intervals[(i, j)] = gap
        axes[(i, j)] = axis

    for cont in wf.containers:
        ci = index[cont.id]
        for comp in wf.components_in(cont.id):
            i, j = sorted((index[comp.id], ci))
            edges.add((i, j, REL_CV))

    chain = [index[cid] for cid in cont_ids]
    if len(chain) >= 2:
        for a, b in zip(chain, chain[1:]):
            i, j = sorted((a, b))
            edges.add((i, j, REL_VV))
        if len(chain) >= 3:
            i, j = sorted((chain[0], chain[-1]))
            edges.add((i, j, REL_VV))

    # Attribute rows.
    min_gap: dict[str, float] = {}
    for a, b, _axis, gap in pairs:
        for cid in (a.id, b.id):
            min_gap[cid] = min(min_gap.get(cid, np.inf), gap)
    screen_diag = diagonal(wf.screen_w, wf.screen_h)

    nodes: list[GraphNode] = []
    for c in wf.components:
        color = c.color if c.color is not None else wf.background_color
        attrs = (
            c.bounds.x,
            c.bounds.y,
            c.bounds.w,
            c.bounds.h,
            float(color[0]),
            float(color[1]),
            float(color[2]),
            min(c.bounds.w, c.bounds.h),
            float(min_gap.get(c.id, screen_diag)),
            contrast_of(c.color, wf.background_color),
        )
        nodes.append(GraphNode(c.id, KIND_COMPONENT, attrs))
    for cid in cont_ids:
        nodes.append(GraphNode(cid, KIND_CONTAINER))

    return GuiGraph(
        nodes=tuple(nodes),
        edges=tuple(sorted(edges)),
        intervals=intervals,
        corridor_axes=axes,
    )


def adjacency(g: GuiGraph, relation: str) -> np.ndarray:
    a = np.zeros((g.n, g.n))
    for i, j, rel in g.edges:
        if rel == relation:
            a[i, j] = a[j, i] = 1.0
    return a


def union_adjacency(g: GuiGraph) -> np.ndarray:
    a = np.zeros((g.n, g.n))
    for i, j, _rel in g.edges:
        a[i, j] = a[j, i] = 1.0
    return a


def normalized_laplacian(g: GuiGraph) -> np.ndarray:
    """I - D^(-1/2) A D^(-1/2) over the union adjacency.

    Isolated nodes take the D^(-1/2) = 0 convention: their rows (diagonal
    included) are all zero.
    """
    a = union_adjacency(g)
    deg = a.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    lap = -a * np.outer(inv_sqrt, inv_sqrt)
    lap[np.arange(g.n), np.arange(g.n)] = np.where(deg > 0, 1.0, 0.0)
    return lap


def attribute_matrix(g: GuiGraph) -> np.ndarray:
    return np.array([n.attrs for n in g.nodes], dtype=np.float64)


@dataclass(frozen=True)
class Normalizer:
    """Per-column min-max statistics, frozen over a training corpus."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    @classmethod
    def fit(cls, graphs: list[GuiGraph]) -> "Normalizer":
        rows = []
        for g in graphs:
            for node in g.nodes:
                if node.kind == KIND_COMPONENT:
                    rows.append(node.attrs)
        if not rows:
            raise GraphError("cannot fit normalization on a corpus with no components")
        x = np.array(rows)
        # plain floats: these round-trip through repr in model files
        return cls(
            tuple(float(v) for v in x.min(axis=0)),
            tuple(float(v) for v in x.max(axis=0)),
        )

    def transform(self, g: GuiGraph) -> np.ndarray:
        x = attribute_matrix(g)
        mins = np.array(self.mins)
        span = np.array(self.maxs) - mins
        span = np.where(span > 0, span, 1.0)
        out = (x - mins) / span
        # Containers stay all-zero by contract, not shifted by column minima.
        for i, node in enumerate(g.nodes):
            if node.kind == KIND_CONTAINER:
                out[i, :] = 0.0
        return out


def matrices(
    g: GuiGraph, normalizer: Normalizer | None = None
) -> tuple[dict[str, np.ndarray], np.ndarray, np.ndarray]:
    """(per-relation adjacency, attribute matrix, normalized Laplacian).

    The attribute matrix is min-max normalized when a Normalizer is given,
    raw otherwise.  Row order equals node order.
    """
    adj = {rel: adjacency(g, rel) for rel in RELATIONS}
    x = normalizer.transform(g) if normalizer else attribute_matrix(g)
    return adj, x, normalized_laplacian(g)


def remove_edges_for(g: GuiGraph, node_ids: list[str]) -> tuple[GuiGraph, list[Edge]]:
    """Drop every edge incident to the named nodes; returns (graph, removed).

    Removal set semantics: an edge shared by two named nodes appears once.
    """
    idx = {g.index_of(nid) for nid in node_ids}
    removed = sorted(e for e in g.edges if e[0] in idx or e[1] in idx)
    kept = tuple(e for e in g.edges if not (e[0] in idx or e[1] in idx))
    return (
        GuiGraph(g.nodes, kept, dict(g.intervals), dict(g.corridor_axes)),
        removed,
    )


def remove_random_edges(g: GuiGraph, k: int, seed: int) -> tuple[GuiGraph, list[Edge]]:
    if k > len(g.edges):
        raise GraphError(f"cannot remove {k} edges from a graph with {len(g.edges)}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, len(g.edges)]))
    pick = rng.choice(len(g.edges), size=k, replace=False)
    removed = sorted(g.edges[i] for i in pick)
    kept = tuple(e for e in g.edges if e not in set(removed))
    return (
        GuiGraph(g.nodes, kept, dict(g.intervals), dict(g.corridor_axes)),
        removed,
    )


def serialize_graph(g: GuiGraph) -> str:
    """Edge-list text form: one node line per node, one edge line per edge."""
    lines = [f"node {n.id} {n.kind}" for n in g.nodes]
    lines += [f"edge {g.nodes[i].id} {g.nodes[j].id} {rel}" for i, j, rel in g.edges]
    return "\n".join(lines) + "\n"


def attribute_csv(g: GuiGraph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("id", "kind") + ATTR_NAMES)
    for n in g.nodes:
        writer.writerow((n.id, n.kind) + tuple(repr(float(v)) for v in n.attrs))
    return buf.getvalue()
