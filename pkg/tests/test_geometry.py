import math

from hypothesis import given
from hypothesis import strategies as st

from guirepair.geometry import (
    Rect,
    diagonal,
    gap_along,
    overlap_1d,
    x_overlap,
    y_overlap,
)

coords = st.floats(-500, 500, allow_nan=False)
sizes = st.floats(0.1, 400, allow_nan=False)
rects = st.builds(Rect, coords, coords, sizes, sizes)


def test_rect_edges_and_center():
    r = Rect(10, 20, 30, 40)
    assert (r.right, r.bottom) == (40, 60)
    assert (r.cx, r.cy) == (25, 40)
    assert r.area == 1200
    assert r.as_tuple() == (10, 20, 30, 40)


def test_containment_and_intersection():
    outer = Rect(0, 0, 100, 100)
    inner = Rect(10, 10, 20, 20)
    assert outer.contains_rect(inner)
    assert not inner.contains_rect(outer)
    assert outer.contains_point(50, 50)
    assert not outer.contains_point(150, 50)
    assert outer.intersects(inner)
    assert not Rect(0, 0, 10, 10).intersects(Rect(20, 20, 5, 5))


def test_edge_touching_rects_do_not_intersect():
    # shared edge has zero overlap area
    assert not Rect(0, 0, 10, 10).intersects(Rect(10, 0, 10, 10))


def test_translated_and_scaled():
    r = Rect(10, 10, 20, 40)
    assert r.translated(5, -5) == Rect(15, 5, 20, 40)
    s = r.scaled_about_center(0.5)
    assert (s.w, s.h) == (10, 20)
    assert (s.cx, s.cy) == (r.cx, r.cy)


def test_overlap_1d_cases():
    assert overlap_1d(0, 10, 5, 15) == 5
    assert overlap_1d(0, 10, 10, 20) == 0
    # disjoint spans go negative (signed overlap)
    assert overlap_1d(0, 10, 12, 20) == -2
    assert overlap_1d(0, 10, 2, 8) == 6


def test_axis_overlaps():
    a = Rect(0, 0, 10, 10)
    b = Rect(5, 20, 10, 10)
    assert x_overlap(a, b) == 5
    assert y_overlap(a, b) == -10


def test_gap_along():
    a = Rect(0, 0, 10, 10)
    b = Rect(15, 0, 10, 10)
    assert gap_along(a, b, "x") == 5
    assert gap_along(b, a, "x") == 5
    # gap clamps to zero for touching or overlapping boxes
    assert gap_along(a, Rect(8, 0, 10, 10), "x") == 0
    assert gap_along(a, Rect(0, 30, 10, 10), "y") == 20


def test_diagonal():
    assert diagonal(3, 4) == 5
    assert diagonal(360, 640) == math.hypot(360, 640)


@given(rects, rects)
def test_overlap_symmetry(a, b):
    assert x_overlap(a, b) == x_overlap(b, a)
    assert y_overlap(a, b) == y_overlap(b, a)
    assert math.isclose(gap_along(a, b, "x"), gap_along(b, a, "x"), abs_tol=1e-9)


@given(rects, rects)
def test_intersects_iff_both_axes_overlap(a, b):
    assert a.intersects(b) == (x_overlap(a, b) > 0 and y_overlap(a, b) > 0)


@given(rects, st.floats(0.1, 3.0))
def test_scale_preserves_center(r, f):
    s = r.scaled_about_center(f)
    assert math.isclose(s.cx, r.cx, rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(s.cy, r.cy, rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(s.w, r.w * f, rel_tol=1e-9)
