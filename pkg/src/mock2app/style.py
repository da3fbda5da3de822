"""Style inference: quantized color histograms plus the OCR contract.

Background is the dominant histogram bucket, font color the runner-up
(with a contrast fallback for single-color crops), font size a fixed
fraction of the component's pixel height converted to dp.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .core import TEXT_BEARING, BoundingBox, ComponentClass, Image, ValidationError
from .parsers import MockupDocument

RGB = tuple[int, int, int]

FONT_HEIGHT_FACTOR = 0.7


@dataclass(frozen=True)
class ComponentStyle:
    background: RGB
    font_color: RGB | None = None
    font_size_dp: float | None = None
    text: str | None = None

    def __post_init__(self):
        if (self.font_color is None) != (self.font_size_dp is None):
            raise ValidationError("font color and size travel together")


class OcrProvider(Protocol):
    """Text recognition over a screen region.

    Implementations return (box, string) pairs whose boxes lie within
    the queried region, in reading order.
    """

    def recognize(self, image: Image, region: BoundingBox
                  ) -> list[tuple[BoundingBox, str]]:
        ...


class StubOcr:
    """No-text provider: keeps the CV path runnable without an engine."""

    def recognize(self, image, region):
        return []


class AnnotationOcr:
    """Echoes mockup text objects intersecting the queried region."""

    def __init__(self, doc: MockupDocument):
        self._objects = [(obj.bounds, obj.text)
                         for obj in doc.objects if obj.text]

    def recognize(self, image: Image, region: BoundingBox
                  ) -> list[tuple[BoundingBox, str]]:
        hits = []
        for box, text in self._objects:
            if box.intersection_area(region) == 0:
                continue
            clipped = BoundingBox(
                max(box.x, region.x), max(box.y, region.y),
                min(box.right, region.right) - max(box.x, region.x),
                min(box.bottom, region.bottom) - max(box.y, region.y))
            hits.append((clipped, text))
        return hits


def color_histogram(crop: Image, bits: int = 4) -> list[tuple[RGB, int]]:
    """Bucketed color counts, most frequent first (bucket id breaks ties).

    Each channel keeps its top ``bits`` bits; the representative is the
    bucket center (the exact value once bits == 8).
    """
    if not 1 <= bits <= 8:
        raise ValidationError("quantization bits must be in 1..8")
    if crop.width == 0 or crop.height == 0:
        raise ValidationError("empty crop")
    shift = 8 - bits
    px = crop.pixels.reshape(-1, 3) >> shift
    packed = ((px[:, 0].astype(np.int64) << (2 * bits))
              | (px[:, 1].astype(np.int64) << bits)
              | px[:, 2].astype(np.int64))
    ids, counts = np.unique(packed, return_counts=True)
    order = np.lexsort((ids, -counts))
    half = (1 << shift) >> 1
    out = []
    for i in order:
        bucket = int(ids[i])
        r = ((bucket >> (2 * bits)) << shift) + half
        g = (((bucket >> bits) & ((1 << bits) - 1)) << shift) + half
        b = ((bucket & ((1 << bits) - 1)) << shift) + half
        out.append(((r, g, b), int(counts[i])))
    return out


def _luma(rgb: RGB) -> float:
    return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]


def infer_style(crop: Image, component: ComponentClass, ocr: OcrProvider,
                *, region: BoundingBox | None = None, density: float = 2.0,
                quant_bits: int = 4) -> ComponentStyle:
    """Style for one classified crop.

    ``region`` is the crop's box in source-screen coordinates and is
    what the OCR provider is queried with; it defaults to the crop
    itself at the origin.
    """
    hist = color_histogram(crop, quant_bits)
    background = hist[0][0]
    if component not in TEXT_BEARING:
        return ComponentStyle(background=background)
    if len(hist) > 1:
        font_color = hist[1][0]
    else:
        font_color = (0, 0, 0) if _luma(background) > 127 else (255, 255, 255)
    font_size = crop.height * FONT_HEIGHT_FACTOR / density
    if region is None:
        region = BoundingBox(0, 0, crop.width, crop.height)
    hits = ocr.recognize(crop, region)
    text = " ".join(t for _, t in hits) if hits else None
    return ComponentStyle(background=background, font_color=font_color,
                          font_size_dp=font_size, text=text)
