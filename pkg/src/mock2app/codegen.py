"""Intermediate representation and code emission for prototype bundles.

The IR mirrors the assembled tree with generated ids, dp-space geometry
(margins relative to the parent) and a deduplicated style table.  The
emitters produce ``layout.xml`` / ``styles.xml`` / the activity
skeleton; ``parse_layout_xml`` reads a layout back for the round-trip
check and preview rendering.
"""

from __future__ import annotations

import hashlib
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping
from xml.sax.saxutils import quoteattr

from .core import (BoundingBox, ComponentClass, GuiNode, Image,
                   ValidationError, ConfigurationError)
from .imaging import save_png
from .render import PaintNode, PaintSpec, RenderReport, darken, render_paint_list
from .style import ComponentStyle

DEFAULT_DENSITY = 2.0


@dataclass
class IrNode:
    id: str
    label: str
    component: ComponentClass | None
    bounds_px: BoundingBox
    width_dp: float
    height_dp: float
    margin_start_dp: float
    margin_top_dp: float
    text: str = ""
    orientation: str | None = None
    style_ref: str | None = None
    font_size_dp: float | None = None
    children: list["IrNode"] = field(default_factory=list)

    @property
    def is_container(self) -> bool:
        return self.component is None


@dataclass
class GuiIr:
    root: IrNode
    density: float
    canvas_px: tuple[int, int]
    styles: list[tuple[str, ComponentStyle]]

    def iter_preorder(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def _orientation(children: list[GuiNode]) -> str:
    if len(children) < 2:
        return "vertical"
    cys = [c.bounds.y + c.bounds.h / 2 for c in children]
    cxs = [c.bounds.x + c.bounds.w / 2 for c in children]
    return "vertical" if max(cys) - min(cys) >= max(cxs) - min(cxs) else "horizontal"


def build_ir(tree: GuiNode, styles: Mapping[GuiNode, ComponentStyle],
             density: float = DEFAULT_DENSITY) -> GuiIr:
    """Attach ids, dp geometry and a deduplicated style table to a tree."""
    if density <= 0:
        raise ConfigurationError("density must be positive")
    style_names: dict[ComponentStyle, str] = {}
    style_table: list[tuple[str, ComponentStyle]] = []
    counter = [0]

    def convert(node: GuiNode, parent_origin: tuple[int, int]) -> IrNode:
        nid = f"{node.label}{counter[0]}"
        counter[0] += 1
        b = node.bounds
        style = styles.get(node)
        ref = None
        font_size = None
        if style is not None:
            if style not in style_names:
                name = f"Style{len(style_table)}"
                style_names[style] = name
                style_table.append((name, style))
            ref = style_names[style]
            font_size = style.font_size_dp
        text = node.text or ""
        if style is not None and style.text:
            text = style.text
        ir = IrNode(
            id=nid, label=node.label, component=node.component, bounds_px=b,
            width_dp=b.w / density, height_dp=b.h / density,
            margin_start_dp=(b.x - parent_origin[0]) / density,
            margin_top_dp=(b.y - parent_origin[1]) / density,
            text=text,
            orientation=_orientation(list(node.children))
            if not node.is_leaf else None,
        )
        ir.style_ref = ref
        ir.font_size_dp = font_size
        ir.children = [convert(c, (b.x, b.y)) for c in node.children]
        return ir

    root = convert(tree, (0, 0))
    return GuiIr(root=root, density=density,
                 canvas_px=(tree.bounds.right, tree.bounds.bottom),
                 styles=style_table)


# --------------------------------------------------------------------------
# emission

_XML_DECL = '<?xml version="1.0" encoding="utf-8"?>'


def _fmt_dp(value: float) -> str:
    return f"{repr(float(value))}dp"


def _layout_element(node: IrNode, indent: int, is_root: bool = False) -> list[str]:
    pad = "    " * indent
    attrs = []
    if is_root:
        attrs.append('xmlns:android='
                     '"http://schemas.android.com/apk/res/android"')
    attrs += [
        f'android:id="@+id/{node.id}"',
        f'android:layout_height={quoteattr(_fmt_dp(node.height_dp))}',
        f'android:layout_marginStart={quoteattr(_fmt_dp(node.margin_start_dp))}',
        f'android:layout_marginTop={quoteattr(_fmt_dp(node.margin_top_dp))}',
        f'android:layout_width={quoteattr(_fmt_dp(node.width_dp))}',
    ]
    if node.orientation is not None:
        attrs.append(f'android:orientation="{node.orientation}"')
    attrs.append(f"android:text={quoteattr(node.text)}")
    if node.font_size_dp is not None:
        attrs.append(f'android:textSize={quoteattr(repr(float(node.font_size_dp)) + "sp")}')
    if node.style_ref is not None:
        attrs.append(f'style="@style/{node.style_ref}"')
    open_tag = f"{pad}<{node.label} " + " ".join(attrs)
    if not node.children:
        return [open_tag + "/>"]
    lines = [open_tag + ">"]
    for child in node.children:
        lines.extend(_layout_element(child, indent + 1))
    lines.append(f"{pad}</{node.label}>")
    return lines


def emit_layout_xml(ir: GuiIr) -> str:
    return _XML_DECL + "\n" + "\n".join(
        _layout_element(ir.root, 0, is_root=True)) + "\n"


def _hex_color(rgb: tuple[int, int, int]) -> str:
    return "#{:02X}{:02X}{:02X}".format(*rgb)


def emit_style_xml(ir: GuiIr) -> str:
    lines = [_XML_DECL, "<resources>"]
    for name, style in ir.styles:
        lines.append(f'    <style name="{name}" parent="AppTheme">')
        lines.append(f'        <item name="android:background">'
                     f"{_hex_color(style.background)}</item>")
        if style.font_color is not None:
            lines.append(f'        <item name="android:textColor">'
                         f"{_hex_color(style.font_color)}</item>")
        lines.append("    </style>")
    lines.append("</resources>")
    return "\n".join(lines) + "\n"


def emit_activity(ir: GuiIr, layout_name: str = "main_activity") -> str:
    return (
        "package gen.prototype;\n"
        "\n"
        "import android.app.Activity;\n"
        "import android.os.Bundle;\n"
        "\n"
        "public class MainActivity extends Activity {\n"
        "    @Override\n"
        "    protected void onCreate(Bundle savedInstanceState) {\n"
        "        super.onCreate(savedInstanceState);\n"
        f"        setContentView(R.layout.{layout_name});\n"
        "    }\n"
        "}\n"
    )


def emit_strings_xml(ir: GuiIr) -> str:
    lines = [_XML_DECL, "<resources>"]
    for node in ir.iter_preorder():
        if node.component is not None and node.text:
            lines.append(f'    <string name="text_{node.id}">'
                         f"{_escape_xml_text(node.text)}</string>")
    lines.append("</resources>")
    return "\n".join(lines) + "\n"


def _escape_xml_text(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


# --------------------------------------------------------------------------
# re-parsing (round-trip checks, preview from a bundle)


@dataclass
class ParsedLayoutNode:
    label: str
    id: str
    width_dp: float
    height_dp: float
    margin_start_dp: float
    margin_top_dp: float
    text: str
    style_ref: str | None
    font_size_dp: float | None
    orientation: str | None
    children: list["ParsedLayoutNode"] = field(default_factory=list)


def _dp(value: str | None, where: str) -> float:
    if value is None or not value.endswith("dp"):
        raise ValidationError(f"{where}: missing or non-dp length {value!r}")
    return float(value[:-2])


def _parse_layout_element(elem: ET.Element, where: str) -> ParsedLayoutNode:
    ns = "{http://schemas.android.com/apk/res/android}"

    def attr(name: str) -> str | None:
        return elem.get(ns + name, elem.get("android:" + name))

    raw_id = attr("id") or ""
    if not raw_id.startswith("@+id/"):
        raise ValidationError(f"{where}: id {raw_id!r} must use @+id/")
    style_raw = elem.get("style")
    style_ref = None
    if style_raw is not None:
        if not style_raw.startswith("@style/"):
            raise ValidationError(f"{where}: style {style_raw!r} must use @style/")
        style_ref = style_raw[len("@style/"):]
    size_raw = attr("textSize")
    font_size = None
    if size_raw is not None:
        if not size_raw.endswith("sp"):
            raise ValidationError(f"{where}: textSize {size_raw!r} must be sp")
        font_size = float(size_raw[:-2])
    node = ParsedLayoutNode(
        label=elem.tag,
        id=raw_id[len("@+id/"):],
        width_dp=_dp(attr("layout_width"), where),
        height_dp=_dp(attr("layout_height"), where),
        margin_start_dp=_dp(attr("layout_marginStart"), where),
        margin_top_dp=_dp(attr("layout_marginTop"), where),
        text=attr("text") or "",
        style_ref=style_ref,
        font_size_dp=font_size,
        orientation=attr("orientation"),
    )
    node.children = [_parse_layout_element(child, f"{where}/{child.tag}[{i}]")
                     for i, child in enumerate(elem)]
    return node


def parse_layout_xml(text: str) -> ParsedLayoutNode:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ValidationError(
            f"layout: XML parse error at line {line}, column {col}") from exc
    return _parse_layout_element(root, root.tag)


def parse_style_names(style_xml: str) -> set[str]:
    root = ET.fromstring(style_xml)
    return {elem.get("name", "") for elem in root if elem.tag == "style"}


def preorder_type_bounds(node: ParsedLayoutNode | IrNode
                         ) -> list[tuple[str, float, float, float, float]]:
    """(label, w, h, marginStart, marginTop) pre-order sequence."""
    out = [(node.label, node.width_dp, node.height_dp,
            node.margin_start_dp, node.margin_top_dp)]
    for child in node.children:
        out.extend(preorder_type_bounds(child))
    return out


# --------------------------------------------------------------------------
# preview rendering and bundle output


def ir_paint_list(ir: GuiIr) -> list[PaintNode]:
    """Flatten the IR into the renderer's pre-order paint instructions."""
    styles = dict(ir.styles)
    nodes: list[PaintNode] = []

    def visit(node: IrNode) -> None:
        style = styles.get(node.style_ref) if node.style_ref else None
        if node.is_container:
            background = style.background if style else None
            nodes.append(PaintNode(box=node.bounds_px, background=background))
        else:
            fill = style.background if style else (200, 200, 200)
            ink = (style.font_color if style and style.font_color
                   else darken(fill, 96))
            nodes.append(PaintNode(box=node.bounds_px, leaf=PaintSpec(
                component=node.component, box=node.bounds_px, fill=fill,
                ink=ink, accent=ink, text=node.text)))
        for child in node.children:
            visit(child)

    visit(ir.root)
    return nodes


def render_preview(ir: GuiIr, width: int | None = None,
                   height: int | None = None) -> tuple[Image, RenderReport]:
    w = width or ir.canvas_px[0]
    h = height or ir.canvas_px[1]
    return render_paint_list(ir_paint_list(ir), w, h)


@dataclass
class PrototypeBundle:
    layout_xml: str
    style_xml: str
    activity_java: str
    strings_xml: str
    preview: Image
    provenance: dict

    def write(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        res = out / "app" / "src" / "main" / "res"
        (res / "layout").mkdir(parents=True, exist_ok=True)
        (res / "values").mkdir(parents=True, exist_ok=True)
        java = out / "app" / "src" / "main" / "java"
        java.mkdir(parents=True, exist_ok=True)
        (res / "layout" / "main_activity.xml").write_text(
            self.layout_xml, encoding="utf-8")
        (res / "values" / "styles.xml").write_text(
            self.style_xml, encoding="utf-8")
        (res / "values" / "strings.xml").write_text(
            self.strings_xml, encoding="utf-8")
        (java / "MainActivity.java").write_text(
            self.activity_java, encoding="utf-8")
        save_png(self.preview, out / "preview.png")
        (out / "provenance.json").write_text(
            json.dumps(self.provenance, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        return out

    @staticmethod
    def layout_path(bundle_dir: str | Path) -> Path:
        return (Path(bundle_dir) / "app" / "src" / "main" / "res" / "layout"
                / "main_activity.xml")

    @staticmethod
    def style_path(bundle_dir: str | Path) -> Path:
        return (Path(bundle_dir) / "app" / "src" / "main" / "res" / "values"
                / "styles.xml")


def make_bundle(ir: GuiIr, provenance: dict) -> PrototypeBundle:
    preview, _ = render_preview(ir)
    return PrototypeBundle(
        layout_xml=emit_layout_xml(ir),
        style_xml=emit_style_xml(ir),
        activity_java=emit_activity(ir),
        strings_xml=emit_strings_xml(ir),
        preview=preview,
        provenance=provenance,
    )


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
