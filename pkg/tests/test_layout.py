"""Hierarchy parsing, class inference and the canonical dump format."""

import json

import pytest

from guirepair.geometry import Rect
from guirepair.layout import (
    CLASS_BUTTON,
    CLASS_IMAGE,
    CLASS_OTHER,
    CLASS_TEXT,
    CLASS_VIEWGROUP,
    ParseError,
    ScreenMeta,
    ViewNode,
    count_nodes,
    find_node,
    infer_class,
    parse_hierarchy,
    replace_nodes,
    serialize_hierarchy,
)


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("android.widget.Button", CLASS_BUTTON),
        ("android.widget.ImageButton", CLASS_BUTTON),
        ("android.widget.TextView", CLASS_TEXT),
        ("android.widget.EditText", CLASS_TEXT),
        ("android.widget.ImageView", CLASS_IMAGE),
        ("android.widget.LinearLayout", CLASS_VIEWGROUP),
        ("android.widget.FrameLayout", CLASS_VIEWGROUP),
        ("android.view.ViewGroup", CLASS_VIEWGROUP),
        ("androidx.recyclerview.widget.RecyclerView", CLASS_VIEWGROUP),
        ("android.view.View", CLASS_OTHER),
        ("android.widget.ProgressBar", CLASS_OTHER),
    ],
)
def test_infer_class(raw, expected):
    assert infer_class(raw) == expected


def test_infer_class_first_rule_wins():
    # ImageButton carries both needles; Button is checked first
    assert infer_class("ImageButton") == CLASS_BUTTON


def minimal_json(**screen_overrides):
    screen = {
        "width_px": 1080,
        "height_px": 1920,
        "density": 3.0,
        "background_color": [255, 255, 255],
    }
    screen.update(screen_overrides)
    return {
        "screen": screen,
        "root": {
            "id": "root",
            "class": "android.widget.FrameLayout",
            "bounds": [0.0, 0.0, 360.0, 640.0],
            "color": None,
            "text": None,
            "children": [
                {
                    "id": "ok",
                    "class": "android.widget.Button",
                    "bounds": [10.0, 10.0, 100.0, 48.0],
                    "color": "#336699",
                    "text": "OK",
                    "children": [],
                }
            ],
        },
    }


def test_parse_json_minimal():
    tree, meta = parse_hierarchy(json.dumps(minimal_json()), "json-dump")
    assert meta == ScreenMeta(1080, 1920, 3.0, (255, 255, 255))
    assert meta.width_dp == pytest.approx(360.0)
    assert meta.height_dp == pytest.approx(640.0)
    assert tree.id == "root"
    assert tree.cls == CLASS_VIEWGROUP
    (child,) = tree.children
    assert child.cls == CLASS_BUTTON
    assert child.bounds == Rect(10.0, 10.0, 100.0, 48.0)
    assert child.color == (0x33, 0x66, 0x99)
    assert child.text == "OK"


def test_parse_json_bytes_input():
    raw = json.dumps(minimal_json()).encode("utf-8")
    tree, _ = parse_hierarchy(raw, "json-dump")
    assert count_nodes(tree) == 2


def test_parse_json_rejects_duplicate_ids():
    doc = minimal_json()
    doc["root"]["children"].append(dict(doc["root"]["children"][0]))
    with pytest.raises(ParseError, match="duplicate"):
        parse_hierarchy(json.dumps(doc), "json-dump")


def test_parse_json_rejects_bad_density():
    with pytest.raises(ParseError):
        parse_hierarchy(json.dumps(minimal_json(density=0)), "json-dump")
    with pytest.raises(ParseError):
        parse_hierarchy(json.dumps(minimal_json(density=-1.5)), "json-dump")


def test_parse_json_rejects_missing_sections():
    with pytest.raises(ParseError):
        parse_hierarchy(json.dumps({"root": minimal_json()["root"]}), "json-dump")
    with pytest.raises(ParseError):
        parse_hierarchy(json.dumps({"screen": minimal_json()["screen"]}), "json-dump")


def test_parse_json_rejects_non_numeric_bounds():
    doc = minimal_json()
    doc["root"]["children"][0]["bounds"] = [10, 10, "wide", 48]
    with pytest.raises(ParseError):
        parse_hierarchy(json.dumps(doc), "json-dump")


def test_parse_json_rejects_bad_color():
    doc = minimal_json()
    doc["root"]["children"][0]["color"] = [255, 255]
    with pytest.raises(ParseError):
        parse_hierarchy(json.dumps(doc), "json-dump")
    doc["root"]["children"][0]["color"] = [0, 0, 300]
    with pytest.raises(ParseError):
        parse_hierarchy(json.dumps(doc), "json-dump")


def test_parse_json_rejects_garbage():
    with pytest.raises(ParseError):
        parse_hierarchy("not json at all {", "json-dump")


def test_unknown_format_rejected():
    with pytest.raises(ParseError):
        parse_hierarchy("{}", "yaml-dump")


XML_SMALL = """<?xml version='1.0' encoding='UTF-8'?>
<hierarchy rotation="0" density="2.0" width="720" height="1280" background="#000000">
  <node resource-id="root" class="android.widget.FrameLayout"
        bounds="[0,0][720,1280]">
    <node resource-id="go" class="android.widget.Button" color="#ffffff"
          text="Go" bounds="[20,40][220,140]"/>
    <node class="android.widget.TextView" bounds="[20,200][220,260]"/>
  </node>
</hierarchy>
"""


def test_parse_xml_converts_px_to_dp():
    tree, meta = parse_hierarchy(XML_SMALL, "xml-dump")
    assert meta == ScreenMeta(720, 1280, 2.0, (0, 0, 0))
    go = find_node(tree, "go")
    # [20,40][220,140] px at density 2 -> 10,20 100x50 dp
    assert go.bounds == Rect(10.0, 20.0, 100.0, 50.0)
    assert go.color == (255, 255, 255)
    assert go.text == "Go"


def test_parse_xml_generates_fallback_ids():
    tree, _ = parse_hierarchy(XML_SMALL, "xml-dump")
    ids = [n.id for n in tree.walk()]
    assert "root" in ids
    assert any(i.startswith("node") for i in ids)  # the id-less TextView
    assert len(set(ids)) == len(ids)


def test_parse_xml_defaults_screen_from_root_bounds():
    raw = (
        "<hierarchy><node resource-id='r' class='FrameLayout' "
        "bounds='[0,0][480,800]'/></hierarchy>"
    )
    _, meta = parse_hierarchy(raw, "xml-dump")
    assert (meta.width_px, meta.height_px) == (480, 800)
    assert meta.density == 1.0
    assert meta.background_color == (255, 255, 255)


def test_parse_xml_rejects_missing_bounds():
    raw = "<hierarchy><node resource-id='r' class='FrameLayout'/></hierarchy>"
    with pytest.raises(ParseError):
        parse_hierarchy(raw, "xml-dump")


def test_parse_xml_rejects_malformed_document():
    with pytest.raises(ParseError):
        parse_hierarchy("<hierarchy><node", "xml-dump")


def test_login_fixture_shape(login_doc):
    tree, meta = login_doc
    assert meta.density == 3.0
    assert count_nodes(tree) == 14
    classes = [n.cls for n in tree.walk()]
    assert classes.count(CLASS_VIEWGROUP) == 4
    visible = [c for c in classes if c in (CLASS_BUTTON, CLASS_TEXT, CLASS_IMAGE)]
    assert len(visible) == 9  # 8 survive flatten; the zero-area spacer does not


def test_serialize_round_trip(login_doc):
    tree, meta = login_doc
    dumped = serialize_hierarchy(tree, meta)
    tree2, meta2 = parse_hierarchy(dumped, "json-dump")
    assert meta2 == meta
    assert serialize_hierarchy(tree2, meta2) == dumped
    assert [n.id for n in tree2.walk()] == [n.id for n in tree.walk()]
    assert [n.bounds for n in tree2.walk()] == [n.bounds for n in tree.walk()]


def test_serialize_stores_categories():
    # the canonical dump re-parses with classes unchanged
    tree, meta = parse_hierarchy(json.dumps(minimal_json()), "json-dump")
    doc = json.loads(serialize_hierarchy(tree, meta))
    classes = {doc["root"]["class"]} | {
        c["class"] for c in doc["root"]["children"]
    }
    assert classes == {CLASS_VIEWGROUP, CLASS_BUTTON}


def test_find_and_replace_nodes(login_doc):
    tree, _ = login_doc
    node = find_node(tree, "login")
    assert node is not None
    moved = ViewNode(
        id=node.id,
        cls=node.cls,
        bounds=node.bounds.translated(5.0, 0.0),
        color=node.color,
        text=node.text,
        children=node.children,
    )
    tree2 = replace_nodes(tree, {node.id: moved})
    assert find_node(tree2, node.id).bounds.x == node.bounds.x + 5.0
    # untouched nodes are preserved
    assert find_node(tree2, "signup").bounds == find_node(tree, "signup").bounds
    assert find_node(tree, "no/such/id") is None
