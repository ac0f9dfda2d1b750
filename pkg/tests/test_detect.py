"""Accessibility scanning: touch size, spacing, contrast."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from guirepair.detect import (
    ISSUE_KINDS,
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
from guirepair.geometry import Rect
from guirepair.layout import CLASS_BUTTON, CLASS_IMAGE, CLASS_TEXT, ScreenMeta, ViewNode
from guirepair.wireframe import wireframe_from_tree

from test_wireframe import META, leaf, vg

channels = st.integers(0, 255)
colors = st.tuples(channels, channels, channels)


def test_luminance_extremes():
    assert relative_luminance((0, 0, 0)) == 0.0
    assert relative_luminance((255, 255, 255)) == pytest.approx(1.0, abs=1e-12)


def test_luminance_weights():
    # green dominates, blue is weakest
    lr = relative_luminance((255, 0, 0))
    lg = relative_luminance((0, 255, 0))
    lb = relative_luminance((0, 0, 255))
    assert lg > lr > lb
    assert lr == pytest.approx(0.2126, abs=1e-12)
    assert lg == pytest.approx(0.7152, abs=1e-12)
    assert lb == pytest.approx(0.0722, abs=1e-12)


def test_contrast_known_values():
    assert contrast_ratio((0, 0, 0), (255, 255, 255)) == pytest.approx(21.0, abs=1e-9)
    assert contrast_ratio((255, 255, 255), (255, 255, 255)) == 1.0
    # mid gray vs white, a standard checker value
    assert contrast_ratio((119, 119, 119), (255, 255, 255)) == pytest.approx(4.478, abs=5e-4)


@given(colors, colors)
def test_contrast_symmetric_and_bounded(a, b):
    r = contrast_ratio(a, b)
    assert r == contrast_ratio(b, a)
    assert 1.0 <= r <= 21.0


@given(colors)
def test_self_contrast_is_one(c):
    assert contrast_ratio(c, c) == 1.0


def comp(cls, h=20.0):
    return type("C", (), {"cls": cls, "bounds": Rect(0, 0, 100, h)})()


def test_contrast_threshold_selection():
    th = Thresholds()
    assert contrast_threshold_for(comp(CLASS_TEXT, 14), th) == 4.5
    assert contrast_threshold_for(comp(CLASS_TEXT, 18), th) == 3.0
    assert contrast_threshold_for(comp(CLASS_TEXT, 24), th) == 3.0
    assert contrast_threshold_for(comp(CLASS_BUTTON, 14), th) == 3.0
    assert contrast_threshold_for(comp(CLASS_IMAGE, 60), th) == 3.0


def wf_of(*leaves):
    return wireframe_from_tree(vg("root", 0, 0, 360, 640, *leaves), META)


def test_small_size_buttons_only_by_default():
    # the image sits diagonal to everything: no CC partner, so no size scan
    wf = wf_of(
        leaf("tiny_btn", CLASS_BUTTON, 10, 10, 30, 30),
        leaf("tiny_text", CLASS_TEXT, 10, 100, 30, 12),
        leaf("lone_img", CLASS_IMAGE, 200, 450, 30, 30),
        leaf("ok_btn", CLASS_BUTTON, 10, 300, 48, 48),
    )
    kinds = {(i.component_id, i.kind) for i in detect_issues(wf)}
    assert ("tiny_btn", KIND_SMALL_SIZE) in kinds
    assert ("ok_btn", KIND_SMALL_SIZE) not in kinds
    # non-interactive classes are not size-scanned
    assert ("tiny_text", KIND_SMALL_SIZE) not in kinds
    assert ("lone_img", KIND_SMALL_SIZE) not in kinds


def test_small_size_image_with_cc_partner():
    # image beside a button acts as a control and gets size-checked
    wf = wf_of(
        leaf("img", CLASS_IMAGE, 10, 10, 30, 30),
        leaf("btn", CLASS_BUTTON, 60, 10, 48, 48),
    )
    kinds = {(i.component_id, i.kind) for i in detect_issues(wf)}
    assert ("img", KIND_SMALL_SIZE) in kinds


def test_small_size_measures_smaller_dimension():
    wf = wf_of(leaf("wide", CLASS_BUTTON, 10, 10, 200, 32))
    (issue,) = [i for i in detect_issues(wf) if i.kind == KIND_SMALL_SIZE]
    assert issue.measured == 32
    assert issue.threshold == 48


def test_narrow_interval_reported_once_per_pair():
    wf = wf_of(
        leaf("a", CLASS_BUTTON, 10, 10, 48, 48),
        leaf("b", CLASS_BUTTON, 62, 10, 48, 48),  # 4dp gap
    )
    hits = [i for i in detect_issues(wf) if i.kind == KIND_NARROW_INTERVAL]
    assert len(hits) == 1
    issue = hits[0]
    assert (issue.component_id, issue.peer_id) == ("a", "b")
    assert issue.measured == pytest.approx(4.0)
    assert issue.threshold == 8.0


def test_wide_interval_clean():
    wf = wf_of(
        leaf("a", CLASS_BUTTON, 10, 10, 48, 48),
        leaf("b", CLASS_BUTTON, 70, 10, 48, 48),  # 12dp gap
    )
    assert [i for i in detect_issues(wf) if i.kind == KIND_NARROW_INTERVAL] == []


def test_low_contrast_text_thresholds():
    gray = (160, 160, 160)  # ~2.36 vs white
    wf = wf_of(
        leaf("small_text", CLASS_TEXT, 10, 10, 100, 14, color=gray),
        leaf("large_text", CLASS_TEXT, 10, 100, 100, 24, color=gray),
        leaf("btn", CLASS_BUTTON, 10, 200, 100, 48, color=gray),
    )
    hits = {i.component_id: i for i in detect_issues(wf) if i.kind == KIND_LOW_CONTRAST}
    assert set(hits) == {"small_text", "large_text", "btn"}
    assert hits["small_text"].threshold == 4.5
    assert hits["large_text"].threshold == 3.0
    ratio = contrast_ratio(gray, (255, 255, 255))
    assert hits["btn"].measured == pytest.approx(ratio)


def test_contrast_boundary_is_exclusive():
    # measured exactly at the limit is compliant
    wf = wf_of(leaf("t", CLASS_TEXT, 10, 10, 100, 14, color=(118, 118, 118)))
    ratio = contrast_ratio((118, 118, 118), (255, 255, 255))
    assert ratio > 4.5
    assert detect_issues(wf) == []


def test_colorless_components_skipped_and_reported():
    wf = wf_of(leaf("nc", CLASS_TEXT, 10, 10, 100, 14, color=None))
    assert [i for i in detect_issues(wf) if i.kind == KIND_LOW_CONTRAST] == []
    assert unscanned_components(wf) == ["nc"]


def test_issue_ordering_deterministic():
    wf = wf_of(
        leaf("z", CLASS_BUTTON, 10, 10, 30, 30, color=(200, 200, 200)),
        leaf("a", CLASS_BUTTON, 44, 10, 30, 30, color=(200, 200, 200)),
    )
    issues = detect_issues(wf)
    keys = [i.key for i in issues]
    assert keys == sorted(keys, key=lambda k: (k[1], k[0], k[2] or ""))
    assert [i.kind for i in issues] == sorted(i.kind for i in issues)


def test_issue_kinds_constant():
    assert ISSUE_KINDS == (KIND_SMALL_SIZE, KIND_NARROW_INTERVAL, KIND_LOW_CONTRAST)


def test_custom_thresholds_respected():
    th = Thresholds(min_touch_dp=40.0, min_interval_dp=4.0)
    wf = wf_of(
        leaf("b", CLASS_BUTTON, 10, 10, 44, 44),
        leaf("c", CLASS_BUTTON, 60, 10, 44, 44),  # 6dp gap
    )
    issues = detect_issues(wf, th)
    assert issues == []
    issues = detect_issues(wf)  # defaults flag both
    assert {i.kind for i in issues} == {KIND_SMALL_SIZE, KIND_NARROW_INTERVAL}


def test_login_fixture_issues(login_doc):
    tree, meta = login_doc
    wf = wireframe_from_tree(tree, meta)
    issues = detect_issues(wf)
    small = {i.component_id for i in issues if i.kind == KIND_SMALL_SIZE}
    # the two 32dp buttons
    assert small == {"signup", "help"}
