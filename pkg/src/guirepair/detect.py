"""Accessibility scanning: small touch targets, narrow intervals, low contrast.

Contrast follows the WCAG 2.x definitions:
https://www.w3.org/TR/WCAG21/#dfn-relative-luminance
https://www.w3.org/TR/WCAG21/#dfn-contrast-ratio
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import REL_CC, build_graph
from .layout import CLASS_BUTTON, CLASS_IMAGE, CLASS_TEXT
from .wireframe import Component, Wireframe

KIND_SMALL_SIZE = "SmallSize"
KIND_NARROW_INTERVAL = "NarrowInterval"
KIND_LOW_CONTRAST = "LowContrast"
ISSUE_KINDS = (KIND_SMALL_SIZE, KIND_NARROW_INTERVAL, KIND_LOW_CONTRAST)


@dataclass(frozen=True)
class Thresholds:
    min_touch_dp: float = 48.0
    min_interval_dp: float = 8.0
    min_text_contrast: float = 4.5
    min_large_text_contrast: float = 3.0
    large_text_dp: float = 18.0
    min_nontext_contrast: float = 3.0


@dataclass(frozen=True)
class Issue:
    component_id: str
    kind: str
    measured: float
    threshold: float
    peer_id: str | None = None

    @property
    def key(self) -> tuple[str, str, str | None]:
        return (self.component_id, self.kind, self.peer_id)


def _linear(channel: int) -> float:
    c = channel / 255
    # 0.03928 cutoff per WCAG 2.0 (kept in 2.1 for compatibility)
    return c / 12.92 if c <= 0.03928 else ((c + 0.055) / 1.055) ** 2.4


def relative_luminance(color: tuple[int, int, int]) -> float:
    r, g, b = color
    return 0.2126 * _linear(r) + 0.7152 * _linear(g) + 0.0722 * _linear(b)


def contrast_ratio(a: tuple[int, int, int], b: tuple[int, int, int]) -> float:
    la, lb = relative_luminance(a), relative_luminance(b)
    lighter, darker = max(la, lb), min(la, lb)
    return (lighter + 0.05) / (darker + 0.05)


def contrast_threshold_for(component: Component, th: Thresholds) -> float:
    if component.cls == CLASS_TEXT:
        if component.bounds.h >= th.large_text_dp:
            return th.min_large_text_contrast
        return th.min_text_contrast
    return th.min_nontext_contrast


def detect_issues(wf: Wireframe, th: Thresholds = Thresholds()) -> list[Issue]:
    """Scan a wireframe; one Issue per violation.

    NarrowInterval is reported once per unordered CC-adjacent pair, anchored
    at the lexicographically smaller component id with the other as peer.
    SmallSize applies to Buttons always and to Images only when they are a
    peer control (i.e. have a CC edge).  Components without a declared color
    cannot be contrast-scanned and are skipped; see unscanned_components.
    """
    g = build_graph(wf)
    issues: list[Issue] = []

    cc_partnered: set[str] = set()
    for i, j, rel in g.edges:
        if rel == REL_CC:
            cc_partnered.add(g.nodes[i].id)
            cc_partnered.add(g.nodes[j].id)

    for c in wf.components:
        size = min(c.bounds.w, c.bounds.h)
        interactive = c.cls == CLASS_BUTTON or (
            c.cls == CLASS_IMAGE and c.id in cc_partnered
        )
        if interactive and size < th.min_touch_dp:
            issues.append(Issue(c.id, KIND_SMALL_SIZE, size, th.min_touch_dp))

        if c.color is not None:
            limit = contrast_threshold_for(c, th)
            ratio = contrast_ratio(c.color, wf.background_color)
            if ratio < limit:
                issues.append(Issue(c.id, KIND_LOW_CONTRAST, ratio, limit))

    for (i, j), gap in sorted(g.intervals.items()):
        if gap < th.min_interval_dp:
            a, b = sorted((g.nodes[i].id, g.nodes[j].id))
            issues.append(Issue(a, KIND_NARROW_INTERVAL, gap, th.min_interval_dp, peer_id=b))

    issues.sort(key=lambda s: (s.kind, s.component_id, s.peer_id or ""))
    return issues


def unscanned_components(wf: Wireframe) -> list[str]:
    """Components with no declared color; contrast cannot be measured."""
    return [c.id for c in wf.components if c.color is None]
