"""Image plumbing: PNG at the boundary, resizing, grayscale conversion.

PNG files are decoded straight to the internal RGB ``Image`` type; alpha
is composited over white.  All resampling is nearest-neighbor so results
are integer-exact and deterministic.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image as PilImage

from .core import Image, ShapeError


def load_png(path: str | Path) -> Image:
    with PilImage.open(path) as im:
        return _from_pil(im)


def decode_png(data: bytes) -> Image:
    with PilImage.open(io.BytesIO(data)) as im:
        return _from_pil(im)


def _from_pil(im: PilImage.Image) -> Image:
    if im.mode in ("RGBA", "LA", "P"):
        im = im.convert("RGBA")
        background = PilImage.new("RGBA", im.size, (255, 255, 255, 255))
        im = PilImage.alpha_composite(background, im)
    im = im.convert("RGB")
    return Image(np.asarray(im, dtype=np.uint8))


def save_png(img: Image, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    PilImage.fromarray(img.pixels, mode="RGB").save(path, format="PNG")


def encode_png(img: Image) -> bytes:
    buf = io.BytesIO()
    PilImage.fromarray(img.pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def to_gray(img: Image) -> np.ndarray:
    """Luma grayscale as float32 on the 0..255 scale."""
    px = img.pixels.astype(np.float32)
    return px[..., 0] * 0.299 + px[..., 1] * 0.587 + px[..., 2] * 0.114


def resize_nearest(pixels: np.ndarray, width: int, height: int) -> np.ndarray:
    """Nearest-neighbor resample of an (h, w[, c]) array."""
    if width <= 0 or height <= 0:
        raise ShapeError("target size must be positive")
    src_h, src_w = pixels.shape[:2]
    ys = np.minimum((np.arange(height) * src_h) // height, src_h - 1)
    xs = np.minimum((np.arange(width) * src_w) // width, src_w - 1)
    return pixels[ys][:, xs]


def letterbox(img: Image, size: int) -> np.ndarray:
    """Aspect-preserving fit into a size x size black canvas (uint8 HWC)."""
    h, w = img.height, img.width
    if h <= 0 or w <= 0:
        raise ShapeError("cannot letterbox an empty image")
    scale = size / max(h, w)
    new_w = max(1, int(round(w * scale)))
    new_h = max(1, int(round(h * scale)))
    resized = resize_nearest(img.pixels, new_w, new_h)
    canvas = np.zeros((size, size, 3), dtype=np.uint8)
    y0 = (size - new_h) // 2
    x0 = (size - new_w) // 2
    canvas[y0:y0 + new_h, x0:x0 + new_w] = resized
    return canvas
