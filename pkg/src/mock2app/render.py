"""Software rasterizer: widget glyph painters over a clipped canvas.

Integer geometry only and no anti-aliasing, so rendered bytes are a
deterministic function of the paint list.  Every painter draws strictly
inside its component box; out-of-canvas spill is clipped and counted in
the render report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import font5x7
from .core import BoundingBox, ComponentClass, Image

RGB = tuple[int, int, int]


def darken(rgb: RGB, amount: int = 48) -> RGB:
    return tuple(max(0, c - amount) for c in rgb)  # type: ignore[return-value]


def text_scale_for_height(box_height_px: int) -> int:
    """Glyph scale used for a component of the given pixel height.

    Shared by the screen synthesizer and the preview renderer so a
    re-rendered component reproduces the source text geometry.
    """
    return max(1, int(0.7 * box_height_px / font5x7.GLYPH_H + 0.5))


@dataclass
class RenderReport:
    clipped_nodes: int = 0
    painted_nodes: int = 0


class Canvas:
    """Mutable RGB raster with rectangle-clipped drawing primitives."""

    def __init__(self, width: int, height: int, background: RGB = (255, 255, 255)):
        self.buf = np.empty((height, width, 3), dtype=np.uint8)
        self.buf[:] = np.asarray(background, dtype=np.uint8)

    @property
    def width(self) -> int:
        return self.buf.shape[1]

    @property
    def height(self) -> int:
        return self.buf.shape[0]

    def to_image(self) -> Image:
        return Image(self.buf.copy())

    def _clip(self, x0: int, y0: int, x1: int, y1: int, clip: BoundingBox | None):
        cx0, cy0, cx1, cy1 = 0, 0, self.width, self.height
        if clip is not None:
            cx0, cy0 = max(cx0, clip.x), max(cy0, clip.y)
            cx1, cy1 = min(cx1, clip.right), min(cy1, clip.bottom)
        return max(x0, cx0), max(y0, cy0), min(x1, cx1), min(y1, cy1)

    def fill_rect(self, x: int, y: int, w: int, h: int, rgb: RGB,
                  clip: BoundingBox | None = None) -> None:
        x0, y0, x1, y1 = self._clip(x, y, x + w, y + h, clip)
        if x0 < x1 and y0 < y1:
            self.buf[y0:y1, x0:x1] = np.asarray(rgb, dtype=np.uint8)

    def border(self, box: BoundingBox, rgb: RGB, thickness: int = 1,
               clip: BoundingBox | None = None) -> None:
        t = min(thickness, box.w // 2 if box.w // 2 else 1,
                box.h // 2 if box.h // 2 else 1)
        t = max(t, 1)
        self.fill_rect(box.x, box.y, box.w, t, rgb, clip)
        self.fill_rect(box.x, box.bottom - t, box.w, t, rgb, clip)
        self.fill_rect(box.x, box.y, t, box.h, rgb, clip)
        self.fill_rect(box.right - t, box.y, t, box.h, rgb, clip)

    def set_pixel(self, x: int, y: int, rgb: RGB,
                  clip: BoundingBox | None = None) -> None:
        x0, y0, x1, y1 = self._clip(x, y, x + 1, y + 1, clip)
        if x0 < x1 and y0 < y1:
            self.buf[y0, x0] = rgb

    def line(self, x0: int, y0: int, x1: int, y1: int, rgb: RGB,
             thickness: int = 1, clip: BoundingBox | None = None) -> None:
        """Bresenham segment; thickness expands each plotted pixel."""
        dx, dy = abs(x1 - x0), -abs(y1 - y0)
        sx = 1 if x0 < x1 else -1
        sy = 1 if y0 < y1 else -1
        err = dx + dy
        x, y = x0, y0
        while True:
            if thickness == 1:
                self.set_pixel(x, y, rgb, clip)
            else:
                self.fill_rect(x, y, thickness, thickness, rgb, clip)
            if x == x1 and y == y1:
                break
            e2 = 2 * err
            if e2 >= dy:
                err += dy
                x += sx
            if e2 <= dx:
                err += dx
                y += sy

    def fill_circle(self, cx: int, cy: int, r: int, rgb: RGB,
                    clip: BoundingBox | None = None) -> None:
        for y in range(cy - r, cy + r + 1):
            dy = y - cy
            half = int((r * r - dy * dy) ** 0.5)
            self.fill_rect(cx - half, y, 2 * half + 1, 1, rgb, clip)

    def ring(self, cx: int, cy: int, r: int, rgb: RGB, thickness: int = 1,
             clip: BoundingBox | None = None) -> None:
        for y in range(cy - r, cy + r + 1):
            dy2 = (y - cy) ** 2
            outer = int((r * r - dy2) ** 0.5) if r * r >= dy2 else -1
            ri = r - thickness
            inner = int((ri * ri - dy2) ** 0.5) if ri > 0 and ri * ri >= dy2 else -1
            if outer < 0:
                continue
            if inner < 0:
                self.fill_rect(cx - outer, y, 2 * outer + 1, 1, rgb, clip)
            else:
                self.fill_rect(cx - outer, y, outer - inner, 1, rgb, clip)
                self.fill_rect(cx + inner + 1, y, outer - inner, 1, rgb, clip)

    def triangle_down(self, cx: int, top: int, half_w: int, height: int,
                      rgb: RGB, clip: BoundingBox | None = None) -> None:
        for i in range(height):
            span = half_w - (i * half_w) // max(1, height - 1) if height > 1 else 0
            self.fill_rect(cx - span, top + i, 2 * span + 1, 1, rgb, clip)

    def triangle_up(self, cx: int, top: int, half_w: int, height: int,
                    rgb: RGB, clip: BoundingBox | None = None) -> None:
        for i in range(height):
            span = (i * half_w) // max(1, height - 1) if height > 1 else 0
            self.fill_rect(cx - span, top + i, 2 * span + 1, 1, rgb, clip)

    def draw_text(self, x: int, y: int, text: str, rgb: RGB, scale: int = 1,
                  clip: BoundingBox | None = None) -> None:
        pen = x
        for ch in text:
            mask = font5x7.GLYPHS.get(ch)
            if mask is None:
                mask = font5x7.glyph_mask(ch)
            for gy in range(font5x7.GLYPH_H):
                for gx in range(font5x7.GLYPH_W):
                    if mask[gy, gx]:
                        self.fill_rect(pen + gx * scale, y + gy * scale,
                                       scale, scale, rgb, clip)
            pen += (font5x7.GLYPH_W + 1) * scale

    def blit(self, pixels: np.ndarray, box: BoundingBox,
             clip: BoundingBox | None = None) -> None:
        from .imaging import resize_nearest
        scaled = resize_nearest(pixels, box.w, box.h)
        x0, y0, x1, y1 = self._clip(box.x, box.y, box.right, box.bottom, clip)
        if x0 >= x1 or y0 >= y1:
            return
        self.buf[y0:y1, x0:x1] = scaled[y0 - box.y:y1 - box.y,
                                        x0 - box.x:x1 - box.x]


@dataclass(frozen=True)
class PaintSpec:
    """Everything one leaf component painter needs."""

    component: ComponentClass
    box: BoundingBox
    fill: RGB
    ink: RGB
    accent: RGB
    text: str = ""
    state: float = 0.5        # progress/seek position, rating fraction
    checked: bool = True      # checkbox/radio/switch/toggle state
    asset: np.ndarray | None = None


def _fit_text(text: str, box: BoundingBox, scale: int, pad: int) -> str:
    if not text:
        return text
    avail = box.w - 2 * pad
    per_char = (font5x7.GLYPH_W + 1) * scale
    keep = max(0, avail // per_char)
    return text[:keep]


def _centered_text(canvas: Canvas, spec: PaintSpec, color: RGB,
                   x_align: str = "center", x_pad: int = 6,
                   y_offset: int = 0) -> None:
    box = spec.box
    scale = text_scale_for_height(box.h)
    text = _fit_text(spec.text, box, scale, x_pad)
    if not text:
        return
    tw = font5x7.text_width(text, scale)
    th = font5x7.text_height(scale)
    if x_align == "center":
        tx = box.x + (box.w - tw) // 2
    else:
        tx = box.x + x_pad
    ty = box.y + (box.h - th) // 2 + y_offset
    canvas.draw_text(tx, ty, text, color, scale, clip=box)


def _base(canvas: Canvas, spec: PaintSpec, border_px: int = 1) -> None:
    box = spec.box
    canvas.fill_rect(box.x, box.y, box.w, box.h, spec.fill, clip=box)
    canvas.border(box, darken(spec.fill), border_px, clip=box)


def _crosshatch(canvas: Canvas, spec: PaintSpec) -> None:
    box = spec.box
    step = 8
    for off in range(-box.h, box.w, step):
        canvas.line(box.x + off, box.y, box.x + off + box.h, box.bottom - 1,
                    spec.ink, clip=box)
        canvas.line(box.x + off + box.h, box.y, box.x + off, box.bottom - 1,
                    spec.ink, clip=box)


def paint_text_view(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec)
    _centered_text(canvas, spec, spec.ink, x_align="left")


def paint_edit_text(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec)
    box = spec.box
    canvas.fill_rect(box.x + 3, box.bottom - 4, box.w - 6, 2, spec.ink, clip=box)
    _centered_text(canvas, spec, spec.ink, x_align="left", y_offset=-2)


def paint_button(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec, border_px=2)
    canvas.border(spec.box, spec.ink, 2, clip=spec.box)
    _centered_text(canvas, spec, spec.ink)


def paint_image_view(canvas: Canvas, spec: PaintSpec) -> None:
    box = spec.box
    if spec.asset is not None:
        canvas.blit(spec.asset, box, clip=box)
        canvas.border(box, darken(spec.fill), 1, clip=box)
        return
    _base(canvas, spec)
    _crosshatch(canvas, spec)


def paint_image_button(canvas: Canvas, spec: PaintSpec) -> None:
    paint_image_view(canvas, spec)
    canvas.border(spec.box, spec.ink, 2, clip=spec.box)


def paint_check_box(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec)
    box = spec.box
    side = max(6, int(box.h * 0.5))
    bx = box.x + 4
    by = box.y + (box.h - side) // 2
    cbox = BoundingBox(bx, by, side, side)
    canvas.border(cbox, spec.ink, 2, clip=box)
    if spec.checked:
        canvas.line(bx + 2, by + side // 2, bx + side // 2, by + side - 3,
                    spec.accent, 2, clip=box)
        canvas.line(bx + side // 2, by + side - 3, bx + side - 2, by + 2,
                    spec.accent, 2, clip=box)
    inner = PaintSpec(spec.component, BoundingBox(bx + side + 4, box.y,
                                                  max(1, box.w - side - 8), box.h),
                      spec.fill, spec.ink, spec.accent, spec.text)
    _centered_text(canvas, inner, spec.ink, x_align="left", x_pad=0)


def paint_radio_button(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec)
    box = spec.box
    r = max(4, int(box.h * 0.25))
    cx = box.x + 4 + r
    cy = box.y + box.h // 2
    canvas.ring(cx, cy, r, spec.ink, 2, clip=box)
    if spec.checked:
        canvas.fill_circle(cx, cy, max(1, r - 3), spec.accent, clip=box)
    inner = PaintSpec(spec.component, BoundingBox(cx + r + 4, box.y,
                                                  max(1, box.right - (cx + r + 4)),
                                                  box.h),
                      spec.fill, spec.ink, spec.accent, spec.text)
    _centered_text(canvas, inner, spec.ink, x_align="left", x_pad=0)


def paint_checked_text_view(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec)
    box = spec.box
    _centered_text(canvas, spec, spec.ink, x_align="left")
    side = max(6, int(box.h * 0.4))
    bx = box.right - side - 4
    by = box.y + (box.h - side) // 2
    if spec.checked:
        canvas.line(bx, by + side // 2, bx + side // 3, by + side - 1,
                    spec.accent, 2, clip=box)
        canvas.line(bx + side // 3, by + side - 1, bx + side - 1, by,
                    spec.accent, 2, clip=box)


def paint_progress_bar(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec)
    box = spec.box
    th = max(4, box.h // 3)
    ty = box.y + (box.h - th) // 2
    track = BoundingBox(box.x + 3, ty, max(1, box.w - 6), th)
    canvas.fill_rect(track.x, track.y, track.w, track.h, spec.fill, clip=box)
    canvas.border(track, spec.ink, 1, clip=box)
    fill_w = int((track.w - 2) * min(max(spec.state, 0.0), 1.0))
    if fill_w > 0:
        canvas.fill_rect(track.x + 1, track.y + 1, fill_w, track.h - 2,
                         spec.accent, clip=box)


def paint_seek_bar(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec)
    box = spec.box
    cy = box.y + box.h // 2
    canvas.fill_rect(box.x + 4, cy - 1, max(1, box.w - 8), 3, spec.ink, clip=box)
    thumb = max(6, int(box.h * 0.5))
    tx = box.x + 4 + int((box.w - 8 - thumb) * min(max(spec.state, 0.0), 1.0))
    canvas.fill_rect(tx, cy - thumb // 2, thumb, thumb, spec.accent, clip=box)


def paint_number_picker(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec)
    box = spec.box
    cx = box.x + box.w // 2
    ah = max(3, box.h // 6)
    half = max(3, min(box.w // 4, 10))
    canvas.triangle_up(cx, box.y + 3, half, ah, spec.ink, clip=box)
    canvas.triangle_down(cx, box.bottom - 3 - ah, half, ah, spec.ink, clip=box)
    mid = PaintSpec(spec.component, BoundingBox(box.x, box.y + ah + 3, box.w,
                                                max(1, box.h - 2 * (ah + 3))),
                    spec.fill, spec.ink, spec.accent, spec.text)
    _centered_text(canvas, mid, spec.ink)


def paint_switch(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec)
    box = spec.box
    th = max(8, int(box.h * 0.5))
    tw = max(th * 2, int(box.w * 0.3))
    tw = min(tw, box.w - 8)
    tx = box.right - tw - 4
    ty = box.y + (box.h - th) // 2
    track = BoundingBox(tx, ty, tw, th)
    canvas.fill_rect(track.x, track.y, track.w, track.h,
                     spec.accent if spec.checked else darken(spec.fill), clip=box)
    canvas.border(track, spec.ink, 1, clip=box)
    thumb = th - 2
    px = track.right - thumb - 1 if spec.checked else track.x + 1
    canvas.fill_rect(px, ty + 1, thumb, thumb, spec.ink, clip=box)
    if spec.text:
        inner = PaintSpec(spec.component, BoundingBox(box.x, box.y,
                                                      max(1, tx - box.x), box.h),
                          spec.fill, spec.ink, spec.accent, spec.text)
        _centered_text(canvas, inner, spec.ink, x_align="left")


def paint_toggle_button(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec, border_px=2)
    canvas.border(spec.box, spec.ink, 2, clip=spec.box)
    box = spec.box
    _centered_text(canvas, spec, spec.ink, y_offset=-max(2, box.h // 10))
    bar_h = max(3, box.h // 8)
    bar_color = spec.accent if spec.checked else darken(spec.fill)
    canvas.fill_rect(box.x + box.w // 5, box.bottom - bar_h - 4,
                     box.w - 2 * (box.w // 5), bar_h, bar_color, clip=box)


_STAR = np.array([
    [0, 0, 0, 1, 0, 0, 0],
    [0, 0, 1, 1, 1, 0, 0],
    [1, 1, 1, 1, 1, 1, 1],
    [0, 1, 1, 1, 1, 1, 0],
    [0, 0, 1, 1, 1, 0, 0],
    [0, 1, 1, 0, 1, 1, 0],
    [0, 1, 0, 0, 0, 1, 0],
], dtype=bool)


def paint_rating_bar(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec)
    box = spec.box
    stars = 5
    cell = min(box.w // stars, box.h)
    scale = max(1, (cell - 4) // 7)
    size = 7 * scale
    filled = int(round(min(max(spec.state, 0.0), 1.0) * stars))
    total_w = stars * (size + 4) - 4
    x = box.x + (box.w - total_w) // 2
    y = box.y + (box.h - size) // 2
    for i in range(stars):
        color = spec.accent if i < filled else spec.ink
        for gy in range(7):
            for gx in range(7):
                if _STAR[gy, gx]:
                    canvas.fill_rect(x + gx * scale, y + gy * scale,
                                     scale, scale, color, clip=box)
        x += size + 4


def paint_spinner(canvas: Canvas, spec: PaintSpec) -> None:
    _base(canvas, spec)
    box = spec.box
    _centered_text(canvas, spec, spec.ink, x_align="left")
    half = max(3, min(box.h // 5, 8))
    ah = max(3, half)
    canvas.triangle_down(box.right - half - 6, box.y + (box.h - ah) // 2,
                         half, ah, spec.ink, clip=box)


PAINTERS = {
    ComponentClass.TextView: paint_text_view,
    ComponentClass.ImageView: paint_image_view,
    ComponentClass.Button: paint_button,
    ComponentClass.ImageButton: paint_image_button,
    ComponentClass.EditText: paint_edit_text,
    ComponentClass.CheckedTextView: paint_checked_text_view,
    ComponentClass.CheckBox: paint_check_box,
    ComponentClass.RadioButton: paint_radio_button,
    ComponentClass.ProgressBar: paint_progress_bar,
    ComponentClass.SeekBar: paint_seek_bar,
    ComponentClass.NumberPicker: paint_number_picker,
    ComponentClass.Switch: paint_switch,
    ComponentClass.ToggleButton: paint_toggle_button,
    ComponentClass.RatingBar: paint_rating_bar,
    ComponentClass.Spinner: paint_spinner,
}


def paint_component(canvas: Canvas, spec: PaintSpec) -> None:
    PAINTERS[spec.component](canvas, spec)


@dataclass(frozen=True)
class PaintNode:
    """Resolved paint instruction for one tree node (container or leaf)."""

    box: BoundingBox
    background: RGB | None = None
    leaf: PaintSpec | None = None


def render_paint_list(nodes: list[PaintNode], width: int, height: int,
                      background: RGB = (255, 255, 255)) -> tuple[Image, RenderReport]:
    """Paint nodes in order (callers supply pre-order lists)."""
    canvas = Canvas(width, height, background)
    report = RenderReport()
    frame = BoundingBox(0, 0, width, height)
    for node in nodes:
        if (node.box.x < 0 or node.box.y < 0
                or node.box.right > width or node.box.bottom > height):
            report.clipped_nodes += 1
        if node.background is not None:
            canvas.fill_rect(node.box.x, node.box.y, node.box.w, node.box.h,
                             node.background, clip=frame)
        if node.leaf is not None:
            paint_component(canvas, node.leaf)
        report.painted_nodes += 1
    return canvas.to_image(), report
