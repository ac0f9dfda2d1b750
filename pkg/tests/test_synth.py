"""Synthetic corpus generator: compliant screens, verified injections."""

import json

import pytest

from guirepair.detect import (
    KIND_LOW_CONTRAST,
    KIND_NARROW_INTERVAL,
    KIND_SMALL_SIZE,
    contrast_ratio,
    detect_issues,
)
from guirepair.layout import CLASS_IMAGE, parse_hierarchy, serialize_hierarchy
from guirepair.synth import (
    PALETTE,
    InjectedIssue,
    SynthConfig,
    SynthError,
    generate_corpus,
    read_manifest,
    write_corpus,
)
from guirepair.wireframe import wireframe_from_tree


def test_palette_clears_strict_text_threshold():
    for color in PALETTE:
        assert contrast_ratio(color, (255, 255, 255)) >= 4.6


def test_clean_screens_are_detector_clean(tiny_screens):
    for s in tiny_screens:
        wf = wireframe_from_tree(s.clean, s.meta)
        assert detect_issues(wf) == []
        assert len(wf.components) >= 4


def test_manifest_is_ground_truth(tiny_screens):
    # re-detect every broken variant: findings must equal the injected set
    for s in tiny_screens:
        found = {i.key for i in detect_issues(wireframe_from_tree(s.broken, s.meta))}
        assert found == {i.key for i in s.issues}


def test_issue_counts_within_config(tiny_screens):
    cfg = SynthConfig()
    for s in tiny_screens:
        assert cfg.issues_min <= len(s.issues) <= cfg.issues_max


def test_issues_sorted_by_key(tiny_screens):
    for s in tiny_screens:
        keys = [i.key for i in s.issues]
        assert keys == sorted(keys)


def test_images_never_size_or_contrast_targets(tiny_screens):
    for s in tiny_screens:
        classes = {c.id: c.cls for c in wireframe_from_tree(s.clean, s.meta).components}
        for issue in s.issues:
            if issue.kind in (KIND_SMALL_SIZE, KIND_LOW_CONTRAST):
                assert classes[issue.component_id] != CLASS_IMAGE


def test_interval_issue_carries_peer(tiny_screens):
    for s in tiny_screens:
        for issue in s.issues:
            if issue.kind == KIND_NARROW_INTERVAL:
                assert issue.peer_id is not None
                assert issue.component_id < issue.peer_id
            else:
                assert issue.peer_id is None


def test_generate_deterministic():
    cfg = SynthConfig(count=3, seed=9)
    a = generate_corpus(cfg)
    b = generate_corpus(cfg)
    for sa, sb in zip(a, b):
        assert serialize_hierarchy(sa.clean, sa.meta) == serialize_hierarchy(sb.clean, sb.meta)
        assert serialize_hierarchy(sa.broken, sa.meta) == serialize_hierarchy(sb.broken, sb.meta)
        assert sa.issues == sb.issues
    c = generate_corpus(SynthConfig(count=3, seed=10))
    assert any(
        serialize_hierarchy(sa.broken, sa.meta) != serialize_hierarchy(sc.broken, sc.meta)
        for sa, sc in zip(a, c)
    )


def test_write_corpus_layout(tmp_path, tiny_screens):
    manifest = write_corpus(tiny_screens[:2], tmp_path)
    assert (tmp_path / "manifest.json").exists()
    assert set(manifest["screens"]) == {"gui_000", "gui_001"}
    entry = manifest["screens"]["gui_000"]
    assert (tmp_path / entry["clean"]).exists()
    assert (tmp_path / entry["broken"]).exists()
    assert read_manifest(tmp_path / "manifest.json") == manifest

    # serialized screens parse back to the same hierarchy
    s = tiny_screens[0]
    text = (tmp_path / entry["clean"]).read_text()
    root, meta = parse_hierarchy(text, "json-dump")
    assert meta == s.meta
    assert serialize_hierarchy(root, meta) == serialize_hierarchy(s.clean, s.meta)
    # manifest issue listing matches the screen objects
    listed = [
        InjectedIssue(d["component_id"], d["kind"], d["peer_id"])
        for d in entry["issues"]
    ]
    assert tuple(listed) == s.issues


def test_read_manifest_rejects_garbage(tmp_path):
    p = tmp_path / "manifest.json"
    p.write_text(json.dumps({"nope": 1}))
    with pytest.raises(SynthError):
        read_manifest(p)


def test_dense_config_produces_more_components():
    screens = generate_corpus(
        SynthConfig(count=2, seed=3, screen_h=960.0, panels_min=4, panels_max=5)
    )
    for s in screens:
        wf = wireframe_from_tree(s.clean, s.meta)
        assert len(wf.containers) >= 4
        assert len(wf.components) >= 8
