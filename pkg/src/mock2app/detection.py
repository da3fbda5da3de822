"""CV detection path: edges -> dilation -> contour boxes -> text merging.

The edge detector is the classic five-stage pipeline (grayscale,
Gaussian blur, Sobel gradients, non-maximum suppression, hysteresis),
fully vectorized.  Connected components come from scipy's labeller; the
test suite cross-checks them against a brute-force flood fill.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import BoundingBox, ConfigurationError, Image, union_box
from .imaging import to_gray

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class DetectionConfig:
    gaussian_sigma: float = 1.4
    canny_low: float = 50.0
    canny_high: float = 150.0
    dilation_radius: int = 2
    min_box_area: int = 16
    text_merge_gap: int = 10
    text_overlap_fraction: float = 0.5

    def __post_init__(self):
        if self.canny_low >= self.canny_high:
            raise ConfigurationError("canny_low must be below canny_high")
        if self.canny_low <= 0 or self.gaussian_sigma <= 0:
            raise ConfigurationError("thresholds and sigma must be positive")
        if self.dilation_radius < 1:
            raise ConfigurationError("dilation radius must be >= 1")


@dataclass(frozen=True)
class EdgeMap:
    mask: np.ndarray  # (h, w) bool

    def __post_init__(self):
        if self.mask.ndim != 2 or self.mask.dtype != bool:
            raise ConfigurationError("edge map must be a 2-d boolean mask")

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = max(1, int(np.ceil(3.0 * sigma)))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs ** 2) / (2.0 * sigma * sigma))
    return (k / k.sum()).astype(np.float32)


def _convolve_separable(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    radius = len(kernel) // 2
    padded = np.pad(img, ((radius, radius), (0, 0)), mode="edge")
    out = np.zeros_like(img)
    for i, k in enumerate(kernel):
        out += k * padded[i:i + img.shape[0], :]
    padded = np.pad(out, ((0, 0), (radius, radius)), mode="edge")
    out = np.zeros_like(img)
    for i, k in enumerate(kernel):
        out += k * padded[:, i:i + img.shape[1]]
    return out


def _sobel(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.pad(img, 1, mode="edge")
    gx = ((p[:-2, 2:] + 2 * p[1:-1, 2:] + p[2:, 2:])
          - (p[:-2, :-2] + 2 * p[1:-1, :-2] + p[2:, :-2]))
    gy = ((p[2:, :-2] + 2 * p[2:, 1:-1] + p[2:, 2:])
          - (p[:-2, :-2] + 2 * p[:-2, 1:-1] + p[:-2, 2:]))
    return gx, gy


def _nonmax_suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Keep pixels that beat both neighbors along the quantized gradient."""
    h, w = mag.shape
    padded = np.pad(mag, 1, mode="constant")
    angle = np.arctan2(gy, gx)
    sector = ((np.round(angle / (np.pi / 4)).astype(int)) % 4)
    # sector 0: E/W, 1: NE/SW, 2: N/S, 3: NW/SE (array coordinates)
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    keep = np.zeros_like(mag, dtype=bool)
    core = padded[1:-1, 1:-1]
    for s, (dy, dx) in offsets.items():
        fwd = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        bwd = padded[1 - dy:1 - dy + h, 1 - dx:1 - dx + w]
        sel = sector == s
        keep |= sel & (core >= fwd) & (core > bwd)
    return keep & (mag > 0)


def canny(img: Image, cfg: DetectionConfig = DetectionConfig()) -> EdgeMap:
    """Five-stage edge detection over the 0..255 grayscale image."""
    gray = to_gray(img)
    blurred = _convolve_separable(gray, _gaussian_kernel(cfg.gaussian_sigma))
    gx, gy = _sobel(blurred)
    mag = np.hypot(gx, gy)
    thin = _nonmax_suppress(mag, gx, gy)
    strong = thin & (mag >= cfg.canny_high)
    weak = thin & (mag >= cfg.canny_low)
    labels, count = ndimage.label(weak, structure=_EIGHT)
    if count == 0:
        return EdgeMap(np.zeros_like(weak))
    keep = np.zeros(count + 1, dtype=bool)
    keep[np.unique(labels[strong])] = True
    keep[0] = False
    return EdgeMap(keep[labels])


def dilate(edges: EdgeMap, radius: int) -> EdgeMap:
    """Morphological dilation with a (2*radius+1) square element."""
    if radius < 1:
        raise ConfigurationError("dilation radius must be >= 1")
    mask = edges.mask
    out = mask.copy()
    for shift in range(1, radius + 1):
        out[shift:, :] |= mask[:-shift, :]
        out[:-shift, :] |= mask[shift:, :]
    tmp = out.copy()
    for shift in range(1, radius + 1):
        out[:, shift:] |= tmp[:, :-shift]
        out[:, :-shift] |= tmp[:, shift:]
    return EdgeMap(out)


def extract_boxes(edges: EdgeMap, cfg: DetectionConfig = DetectionConfig()
                  ) -> list[BoundingBox]:
    """Tight boxes of the mask's 8-connected components, area-filtered,
    sorted top-to-bottom then left-to-right."""
    labels, count = ndimage.label(edges.mask, structure=_EIGHT)
    boxes = []
    for sl in ndimage.find_objects(labels):
        if sl is None:
            continue
        ys, xs = sl
        box = BoundingBox(int(xs.start), int(ys.start),
                          int(xs.stop - xs.start), int(ys.stop - ys.start))
        if box.area >= cfg.min_box_area:
            boxes.append(box)
    return sorted(boxes, key=lambda b: (b.y, b.x, b.w, b.h))


def _same_text_line(a: BoundingBox, b: BoundingBox, cfg: DetectionConfig) -> bool:
    overlap = min(a.bottom, b.bottom) - max(a.y, b.y)
    if overlap < cfg.text_overlap_fraction * min(a.h, b.h):
        return False
    gap = max(a.x, b.x) - min(a.right, b.right)
    return gap <= cfg.text_merge_gap


def merge_text_blocks(boxes: list[BoundingBox],
                      text_hits: list[tuple[BoundingBox, str]],
                      cfg: DetectionConfig = DetectionConfig()
                      ) -> list[BoundingBox]:
    """Union word boxes that share a text line; non-text boxes pass through.

    A box counts as textual when at least half its area intersects some
    OCR hit box.
    """
    if not text_hits or not boxes:
        return list(boxes)
    textual = []
    passthrough = []
    for box in boxes:
        covered = max((box.intersection_area(hit) for hit, _ in text_hits),
                      default=0)
        (textual if covered * 2 >= box.area else passthrough).append(box)
    if not textual:
        return list(boxes)

    parent = list(range(len(textual)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(textual)):
        for j in range(i + 1, len(textual)):
            if _same_text_line(textual[i], textual[j], cfg):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[BoundingBox]] = {}
    for i, box in enumerate(textual):
        groups.setdefault(find(i), []).append(box)
    merged = [union_box(members) for members in groups.values()]
    return sorted(passthrough + merged, key=lambda b: (b.y, b.x, b.w, b.h))


def _suppress_nested(boxes: list[BoundingBox]) -> list[BoundingBox]:
    """Drop boxes fully contained in another box (inner structure of an
    already-detected component)."""
    keep = []
    for i, box in enumerate(boxes):
        nested = any(i != j and other.contains(box) and other != box
                     for j, other in enumerate(boxes))
        if not nested:
            keep.append(box)
    return keep


def detect_components(img: Image, cfg: DetectionConfig = DetectionConfig(),
                      text_hits: list[tuple[BoundingBox, str]] | None = None
                      ) -> list[tuple[BoundingBox, Image]]:
    """Full pipeline; crops are taken from the original (unblurred) image."""
    edges = canny(img, cfg)
    fat = dilate(edges, cfg.dilation_radius)
    boxes = extract_boxes(fat, cfg)
    boxes = merge_text_blocks(boxes, text_hits or [], cfg)
    boxes = _suppress_nested(boxes)
    boxes.sort(key=lambda b: (b.y, b.x, b.w, b.h))
    return [(box, img.crop(box)) for box in boxes]
