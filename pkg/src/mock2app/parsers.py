"""Ingestion of screen-dump XML and mockup JSON exchange files.

Screen dumps are ``<hierarchy width= height=>`` documents of nested
``<node class= bounds="[x1,y1][x2,y2]" text=>`` elements.  Mockups are a
flat JSON object list (designer hierarchies are deliberately not
ingested).  Both parsers round-trip with their serializers.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

from .core import (COMPONENT_NAMES, BoundingBox, ComponentClass, GuiNode,
                   ScreenRecord, ValidationError)

_BOUNDS_RE = re.compile(r"^\[(-?\d+),(-?\d+)\]\[(-?\d+),(-?\d+)\]$")

# Class names treated as containers even when they arrive childless.
_CONTAINER_NAMES = frozenset({
    "ViewGroup", "ListView", "GridView", "ScrollView",
    "HorizontalScrollView", "RecyclerView", "ViewPager", "CardView",
    "Toolbar", "TabWidget",
})


def _is_container_name(name: str) -> bool:
    return "Layout" in name or name in _CONTAINER_NAMES


def _parse_bounds(raw: str, where: str) -> BoundingBox:
    m = _BOUNDS_RE.match(raw.strip())
    if not m:
        raise ValidationError(f"{where}: malformed bounds {raw!r}")
    x1, y1, x2, y2 = (int(g) for g in m.groups())
    if x2 <= x1 or y2 <= y1:
        raise ValidationError(
            f"{where}: inverted or empty bounds [{x1},{y1}][{x2},{y2}]")
    if x1 < 0 or y1 < 0:
        raise ValidationError(f"{where}: negative origin [{x1},{y1}]")
    return BoundingBox(x1, y1, x2 - x1, y2 - y1)


def _node_from_element(elem: ET.Element, where: str, width: int,
                       height: int) -> GuiNode:
    cls = elem.get("class")
    if not cls:
        raise ValidationError(f"{where}: missing class attribute")
    raw_bounds = elem.get("bounds")
    if raw_bounds is None:
        raise ValidationError(f"{where} ({cls}): missing bounds attribute")
    box = _parse_bounds(raw_bounds, f"{where} ({cls})")
    if box.right > width or box.bottom > height:
        raise ValidationError(
            f"{where} ({cls}): bounds {raw_bounds} exceed screen "
            f"{width}x{height}")
    text = elem.get("text") or None
    kids = [child for child in elem if child.tag == "node"]
    children = tuple(
        _node_from_element(child, f"{where}/node[{i}]", width, height)
        for i, child in enumerate(kids))

    if cls in COMPONENT_NAMES:
        if children:
            raise ValidationError(
                f"{where} ({cls}): component nodes cannot have children")
        return GuiNode(bounds=box, component=ComponentClass[cls], text=text)
    if children or _is_container_name(cls):
        return GuiNode(bounds=box, container=cls, text=text, children=children)
    return GuiNode(bounds=box, unknown_class=cls, text=text)


def parse_screen_dump(data: str | bytes, screen_id: str = "screen") -> ScreenRecord:
    """Parse one screen-dump XML document into a validated ScreenRecord."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ValidationError(
            f"{screen_id}: XML parse error at line {line}, column {col}: "
            f"{exc.msg if hasattr(exc, 'msg') else exc}") from exc
    if root.tag != "hierarchy":
        raise ValidationError(f"{screen_id}: root element must be <hierarchy>, "
                              f"got <{root.tag}>")
    try:
        width = int(root.get("width", ""))
        height = int(root.get("height", ""))
    except ValueError:
        raise ValidationError(
            f"{screen_id}: <hierarchy> needs integer width/height") from None
    nodes = [child for child in root if child.tag == "node"]
    if len(nodes) != 1:
        raise ValidationError(
            f"{screen_id}: expected exactly one top-level <node>, got {len(nodes)}")
    tree = _node_from_element(nodes[0], f"{screen_id}/node[0]", width, height)
    if tree.is_leaf:
        # A one-component screen still gets a container root so the record
        # invariant (root covers the screen) holds.
        tree = GuiNode(bounds=BoundingBox(0, 0, width, height),
                       container="FrameLayout", children=(tree,))
    if tree.bounds != BoundingBox(0, 0, width, height):
        raise ValidationError(
            f"{screen_id}: root node bounds {tree.bounds} must cover the "
            f"{width}x{height} screen")
    return ScreenRecord(id=screen_id, width=width, height=height, root=tree)


def _element_for_node(node: GuiNode, indent: int) -> str:
    pad = "  " * indent
    b = node.bounds
    attrs = [f"class={quoteattr(node.label)}",
             f'bounds="[{b.x},{b.y}][{b.right},{b.bottom}]"']
    if node.text is not None:
        attrs.append(f"text={quoteattr(node.text)}")
    open_tag = f"{pad}<node {' '.join(attrs)}"
    if not node.children:
        return open_tag + "/>"
    lines = [open_tag + ">"]
    lines.extend(_element_for_node(c, indent + 1) for c in node.children)
    lines.append(f"{pad}</node>")
    return "\n".join(lines)


def serialize_screen_dump(record: ScreenRecord) -> str:
    body = _element_for_node(record.root, 1)
    return ('<?xml version="1.0" encoding="utf-8"?>\n'
            f'<hierarchy width="{record.width}" height="{record.height}">\n'
            f"{body}\n"
            "</hierarchy>\n")


@dataclass(frozen=True)
class MockupObject:
    bounds: BoundingBox
    text: str | None = None
    asset: str | None = None


@dataclass(frozen=True)
class MockupDocument:
    """Flat, z-ordered object list on a fixed canvas (document order)."""

    width: int
    height: int
    objects: tuple[MockupObject, ...]


def _require_int(obj: dict, key: str, where: str) -> int:
    if key not in obj:
        raise ValidationError(f"{where}: missing field {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{where}.{key}: expected integer, got {value!r}")
    return value


def parse_mockup(data: str | bytes) -> MockupDocument:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"mockup: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("mockup: top level must be an object")
    width = _require_int(doc, "width", "mockup")
    height = _require_int(doc, "height", "mockup")
    if width <= 0 or height <= 0:
        raise ValidationError("mockup: canvas dimensions must be positive")
    raw_objects = doc.get("objects")
    if not isinstance(raw_objects, list):
        raise ValidationError("mockup.objects: expected a list")
    objects = []
    for i, raw in enumerate(raw_objects):
        where = f"mockup.objects[{i}]"
        if not isinstance(raw, dict):
            raise ValidationError(f"{where}: expected an object")
        x = _require_int(raw, "x", where)
        y = _require_int(raw, "y", where)
        w = _require_int(raw, "w", where)
        h = _require_int(raw, "h", where)
        if w <= 0 or h <= 0:
            raise ValidationError(f"{where}: non-positive size {w}x{h}")
        if x < 0 or y < 0 or x + w > width or y + h > height:
            raise ValidationError(
                f"{where}: bounds ({x},{y},{w},{h}) fall outside the "
                f"{width}x{height} canvas")
        text = raw.get("text")
        if text is not None and not isinstance(text, str):
            raise ValidationError(f"{where}.text: expected string")
        asset = raw.get("asset")
        if asset is not None and not isinstance(asset, str):
            raise ValidationError(f"{where}.asset: expected string")
        objects.append(MockupObject(BoundingBox(x, y, w, h), text, asset))
    return MockupDocument(width=width, height=height, objects=tuple(objects))


def serialize_mockup(doc: MockupDocument) -> str:
    objects = []
    for obj in doc.objects:
        entry: dict = {"x": obj.bounds.x, "y": obj.bounds.y,
                       "w": obj.bounds.w, "h": obj.bounds.h}
        if obj.text is not None:
            entry["text"] = obj.text
        if obj.asset is not None:
            entry["asset"] = obj.asset
        objects.append(entry)
    return json.dumps({"width": doc.width, "height": doc.height,
                       "objects": objects}, indent=2) + "\n"


def mockup_to_input_nodes(doc: MockupDocument) -> list[tuple[BoundingBox, str | None]]:
    """Detection output for the metadata path: flat boxes in document order."""
    return [(obj.bounds, obj.text) for obj in doc.objects]
