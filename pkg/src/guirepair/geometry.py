"""Axis-aligned rectangles in dp. Shared by every layer that touches bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        # int coordinates would serialize differently than floats
        for f in ("x", "y", "w", "h"):
            object.__setattr__(self, f, float(getattr(self, f)))

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    @property
    def cx(self) -> float:
        return self.x + self.w / 2

    @property
    def cy(self) -> float:
        return self.y + self.h / 2

    @property
    def area(self) -> float:
        return self.w * self.h

    def contains_point(self, px: float, py: float) -> bool:
        return self.x <= px <= self.right and self.y <= py <= self.bottom

    def contains_rect(self, other: "Rect") -> bool:
        return (
            self.x <= other.x
            and self.y <= other.y
            and self.right >= other.right
            and self.bottom >= other.bottom
        )

    def intersects(self, other: "Rect") -> bool:
        """Positive-area intersection; touching edges do not count."""
        return (
            self.x < other.right
            and other.x < self.right
            and self.y < other.bottom
            and other.y < self.bottom
        )

    def translated(self, dx: float, dy: float) -> "Rect":
        return Rect(self.x + dx, self.y + dy, self.w, self.h)

    def scaled_about_center(self, factor: float) -> "Rect":
        nw, nh = self.w * factor, self.h * factor
        return Rect(self.cx - nw / 2, self.cy - nh / 2, nw, nh)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


def overlap_1d(a0: float, a1: float, b0: float, b1: float) -> float:
    """Length of the overlap of [a0,a1] and [b0,b1]; <= 0 means disjoint or touching."""
    return min(a1, b1) - max(a0, b0)


def x_overlap(a: Rect, b: Rect) -> float:
    return overlap_1d(a.x, a.right, b.x, b.right)


def y_overlap(a: Rect, b: Rect) -> float:
    return overlap_1d(a.y, a.bottom, b.y, b.bottom)


def gap_along(a: Rect, b: Rect, axis: str) -> float:
    """Distance between facing sides along `axis`; 0 when the boxes touch or overlap."""
    if axis == "x":
        return max(max(a.x, b.x) - min(a.right, b.right), 0.0)
    return max(max(a.y, b.y) - min(a.bottom, b.bottom), 0.0)


def diagonal(w: float, h: float) -> float:
    return math.hypot(w, h)
