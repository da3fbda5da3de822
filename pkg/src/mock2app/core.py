"""Shared geometry, component taxonomy and screen/tree data model.

Everything in here is immutable after construction and safe to share
across workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """Raised when input data violates a structural contract."""


class ConfigurationError(RuntimeError):
    """Raised when an operation is invoked with an unusable setup."""


class ShapeError(ValueError):
    """Raised on tensor/image dimension mismatches."""


class ComponentClass(enum.Enum):
    """The closed set of 15 leaf component types the classifier knows.

    Ordinals (definition order) index confusion-matrix rows/columns.
    """

    TextView = 0
    ImageView = 1
    Button = 2
    ImageButton = 3
    EditText = 4
    CheckedTextView = 5
    CheckBox = 6
    RadioButton = 7
    ProgressBar = 8
    SeekBar = 9
    NumberPicker = 10
    Switch = 11
    ToggleButton = 12
    RatingBar = 13
    Spinner = 14

    @property
    def ordinal(self) -> int:
        return self.value


COMPONENT_CLASSES: tuple[ComponentClass, ...] = tuple(ComponentClass)
COMPONENT_NAMES: frozenset[str] = frozenset(c.name for c in ComponentClass)

# Classes that render text and therefore carry font styling.
TEXT_BEARING: frozenset[ComponentClass] = frozenset({
    ComponentClass.TextView,
    ComponentClass.EditText,
    ComponentClass.Button,
    ComponentClass.CheckedTextView,
    ComponentClass.ToggleButton,
    ComponentClass.CheckBox,
    ComponentClass.RadioButton,
    ComponentClass.Switch,
})


@dataclass(frozen=True, order=True)
class BoundingBox:
    """Axis-aligned pixel rectangle stored as (x, y, w, h), w/h > 0."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"box {self!r} has non-positive size")
        if self.x < 0 or self.y < 0:
            raise ValidationError(f"box {self!r} has negative origin")

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def intersection_area(self, other: "BoundingBox") -> int:
        iw = min(self.right, other.right) - max(self.x, other.x)
        ih = min(self.bottom, other.bottom) - max(self.y, other.y)
        if iw <= 0 or ih <= 0:
            return 0
        return iw * ih

    def contains(self, other: "BoundingBox") -> bool:
        return (self.x <= other.x and self.y <= other.y
                and self.right >= other.right and self.bottom >= other.bottom)

    def union(self, other: "BoundingBox") -> "BoundingBox":
        x = min(self.x, other.x)
        y = min(self.y, other.y)
        return BoundingBox(x, y, max(self.right, other.right) - x,
                           max(self.bottom, other.bottom) - y)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes, in [0, 1]."""
    inter = a.intersection_area(b)
    if inter == 0:
        return 0.0
    return inter / (a.area + b.area - inter)


def union_box(boxes) -> BoundingBox:
    """Smallest box covering every box in the non-empty sequence."""
    boxes = list(boxes)
    if not boxes:
        raise ValueError("union_box needs at least one box")
    out = boxes[0]
    for b in boxes[1:]:
        out = out.union(b)
    return out


@dataclass(frozen=True)
class GuiNode:
    """One node of a GUI tree: either a leaf component or a container.

    Exactly one of ``component`` (known leaf class), ``container``
    (layout type label) or ``unknown_class`` (leaf whose dumped class is
    outside the 15-class set, kept for structure but excluded from
    training) is set.  Leaves have no children.
    """

    bounds: BoundingBox
    component: ComponentClass | None = None
    container: str | None = None
    unknown_class: str | None = None
    text: str | None = None
    children: tuple["GuiNode", ...] = ()

    def __post_init__(self):
        kinds = sum(x is not None
                    for x in (self.component, self.container, self.unknown_class))
        if kinds != 1:
            raise ValidationError(
                "node must be exactly one of component/container/unknown")
        if self.is_leaf and self.children:
            raise ValidationError(f"leaf node {self.label} has children")

    @property
    def is_leaf(self) -> bool:
        return self.container is None

    @property
    def label(self) -> str:
        """Type label used for pre-order sequences and matching."""
        if self.component is not None:
            return self.component.name
        if self.container is not None:
            return self.container
        return self.unknown_class  # type: ignore[return-value]


def preorder(root: GuiNode):
    """Yield every node of the tree in pre-order (parent before children)."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def leaves(root: GuiNode) -> list[GuiNode]:
    """All leaf nodes in pre-order (document) order."""
    return [n for n in preorder(root) if n.is_leaf]


@dataclass(frozen=True)
class ScreenRecord:
    """One app screen: dimensions plus the labeled GUI tree."""

    id: str
    width: int
    height: int
    root: GuiNode
    screenshot: str | None = None  # file reference, resolved by callers

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(f"screen {self.id}: non-positive dimensions")
        full = BoundingBox(0, 0, self.width, self.height)
        if self.root.bounds != full:
            raise ValidationError(
                f"screen {self.id}: root bounds {self.root.bounds} != screen rect")


@dataclass(frozen=True)
class Image:
    """8-bit RGB raster backed by a read-only (h, w, 3) uint8 array."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.dtype != np.uint8:
            raise ShapeError(f"expected (h, w, 3) uint8 pixels, got "
                             f"{px.shape} {px.dtype}")
        if not px.flags.c_contiguous:
            px = np.ascontiguousarray(px)
        px = px.view()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def crop(self, box: BoundingBox) -> "Image":
        if box.right > self.width or box.bottom > self.height:
            raise ValidationError(f"crop {box} exceeds {self.width}x{self.height}")
        return Image(self.pixels[box.y:box.bottom, box.x:box.right].copy())

    def same_pixels(self, other: "Image") -> bool:
        return (self.pixels.shape == other.pixels.shape
                and bool(np.array_equal(self.pixels, other.pixels)))


def solid_image(width: int, height: int, rgb=(255, 255, 255)) -> Image:
    buf = np.empty((height, width, 3), dtype=np.uint8)
    buf[:] = np.asarray(rgb, dtype=np.uint8)
    return Image(buf)
