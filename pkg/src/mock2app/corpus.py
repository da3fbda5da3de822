"""Corpus construction: cleaning filters, augmentation, synthesis, splits.

Screens arrive as (ScreenRecord, screenshot) pairs, pass the screen
filters, shed their leaves as labeled crops through the component
filters, and are split 75/15/10 with hue-perturbed copies topping up
underrepresented training classes.  Every removal is audited with a
machine-readable reason; all randomness flows from one seeded generator
recorded in the manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (COMPONENT_CLASSES, TEXT_BEARING, BoundingBox,
                   ComponentClass, ConfigurationError, GuiNode, Image,
                   ScreenRecord, ValidationError, leaves, preorder, union_box)
from .imaging import load_png, save_png
from .parsers import parse_screen_dump, serialize_screen_dump
from .render import Canvas, PaintSpec, paint_component, text_scale_for_height

ORGANIC = "organic"
SYNTHETIC = "synthetic"
PERTURBED = "perturbed"

SPLITS = ("train", "valid", "test")


@dataclass(frozen=True)
class Provenance:
    kind: str
    source_id: str | None = None
    hue_degrees: float | None = None

    def __post_init__(self):
        if self.kind not in (ORGANIC, SYNTHETIC, PERTURBED):
            raise ValidationError(f"unknown provenance kind {self.kind!r}")
        if self.kind == PERTURBED and (self.source_id is None
                                       or self.hue_degrees is None):
            raise ValidationError("perturbed components need source and degrees")


@dataclass(frozen=True)
class LabeledComponent:
    id: str
    crop: Image
    label: ComponentClass
    screen_id: str
    box: BoundingBox
    provenance: Provenance

    def __post_init__(self):
        if (self.crop.width, self.crop.height) != (self.box.w, self.box.h):
            raise ValidationError(
                f"{self.id}: crop {self.crop.width}x{self.crop.height} "
                f"!= box {self.box.w}x{self.box.h}")


@dataclass(frozen=True)
class RemovalRecord:
    kind: str  # "screen" | "component"
    id: str
    reason: str
    detail: str = ""

    def as_dict(self) -> dict:
        return {"kind": self.kind, "id": self.id, "reason": self.reason,
                "detail": self.detail}


@dataclass
class CorpusConfig:
    portrait_width: int = 600
    portrait_height: int = 960
    require_exact_dims: bool = False
    webview_area_fraction: float = 0.5
    max_distinct_colors_dropped: int = 2
    min_class_count: int = 25
    augment_target: int = 500
    split_fractions: tuple[float, float, float] = (0.75, 0.15, 0.10)
    seed: int = 0

    def __post_init__(self):
        if abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise ConfigurationError("split fractions must sum to 1")
        if self.min_class_count < 1 or self.augment_target < 0:
            raise ConfigurationError("bad corpus thresholds")


def paper_corpus_config(seed: int = 0) -> CorpusConfig:
    """The documented full-scale preset (1200x1920 screens, 200/5000)."""
    return CorpusConfig(portrait_width=1200, portrait_height=1920,
                        min_class_count=200, augment_target=5000, seed=seed)


# --------------------------------------------------------------------------
# screen-level filters


def _webview_coverage(record: ScreenRecord) -> float:
    mask = np.zeros((record.height, record.width), dtype=bool)
    found = False
    for node in preorder(record.root):
        if node.label == "WebView":
            found = True
            b = node.bounds
            mask[b.y:b.bottom, b.x:b.right] = True
    if not found:
        return 0.0
    return float(mask.sum()) / (record.width * record.height)


def filter_screens(pairs: list[tuple[ScreenRecord, Image]],
                   cfg: CorpusConfig = CorpusConfig()
                   ) -> tuple[list[tuple[ScreenRecord, Image]], list[RemovalRecord]]:
    kept = []
    audit = []
    for record, shot in pairs:
        if (shot.width, shot.height) != (record.width, record.height):
            raise ValidationError(
                f"{record.id}: screenshot {shot.width}x{shot.height} does not "
                f"match dump {record.width}x{record.height}")
        if record.width > record.height:
            audit.append(RemovalRecord("screen", record.id, "landscape",
                                       f"{record.width}x{record.height}"))
            continue
        if cfg.require_exact_dims and (record.width, record.height) != (
                cfg.portrait_width, cfg.portrait_height):
            audit.append(RemovalRecord(
                "screen", record.id, "wrong-size",
                f"{record.width}x{record.height} != "
                f"{cfg.portrait_width}x{cfg.portrait_height}"))
            continue
        if not any(n.component is not None for n in leaves(record.root)):
            audit.append(RemovalRecord("screen", record.id, "layout-only"))
            continue
        coverage = _webview_coverage(record)
        if coverage > cfg.webview_area_fraction:
            audit.append(RemovalRecord("screen", record.id, "webview-dominant",
                                       f"coverage {coverage:.2f}"))
            continue
        kept.append((record, shot))
    return kept, audit


# --------------------------------------------------------------------------
# component extraction and filters


def _distinct_colors(crop: Image, limit: int) -> int:
    """Distinct RGB values, counted no further than limit+1."""
    px = crop.pixels.reshape(-1, 3)
    packed = (px[:, 0].astype(np.uint32) << 16) | \
             (px[:, 1].astype(np.uint32) << 8) | px[:, 2]
    return int(min(np.unique(packed).size, limit + 1))


def extract_components(record: ScreenRecord, shot: Image,
                       cfg: CorpusConfig = CorpusConfig()
                       ) -> tuple[list[LabeledComponent], list[RemovalRecord]]:
    components = []
    audit = []
    for i, leaf in enumerate(leaves(record.root)):
        comp_id = f"{record.id}_{i:03d}"
        if leaf.component is None:
            audit.append(RemovalRecord("component", comp_id, "unknown-type",
                                       leaf.label))
            continue
        b = leaf.bounds
        if b.right > record.width or b.bottom > record.height:
            audit.append(RemovalRecord("component", comp_id, "invalid-bounds",
                                       f"{b} outside {record.width}x{record.height}"))
            continue
        crop = shot.crop(b)
        if _distinct_colors(crop, cfg.max_distinct_colors_dropped) <= \
                cfg.max_distinct_colors_dropped:
            audit.append(RemovalRecord("component", comp_id, "solid-color"))
            continue
        components.append(LabeledComponent(
            id=comp_id, crop=crop, label=leaf.component, screen_id=record.id,
            box=b, provenance=Provenance(ORGANIC)))
    return components, audit


def filter_rare_classes(components: list[LabeledComponent], min_count: int
                        ) -> tuple[list[LabeledComponent], list[RemovalRecord]]:
    if min_count < 1:
        raise ConfigurationError("min_count must be >= 1")
    counts: dict[ComponentClass, int] = {}
    for comp in components:
        counts[comp.label] = counts.get(comp.label, 0) + 1
    rare = {cls for cls, n in counts.items() if n < min_count}
    kept = [c for c in components if c.label not in rare]
    audit = [RemovalRecord("component", c.id, "rare-class",
                           f"{c.label.name} has {counts[c.label]} < {min_count}")
             for c in components if c.label in rare]
    return kept, audit


# --------------------------------------------------------------------------
# hue perturbation


def perturb_hue(img: Image, degrees: float) -> Image:
    """Rotate every pixel's hue by ``degrees``, preserving S and B.

    Gray pixels (zero saturation) are fixed points.  Because the max and
    min channel amplitudes survive rotation exactly, saturation and
    brightness are preserved to well within the 2/255 contract.
    """
    if not 0.0 <= degrees < 360.0:
        raise ValidationError("degrees must lie in [0, 360)")
    px = img.pixels.astype(np.float64)
    r, g, b = px[..., 0], px[..., 1], px[..., 2]
    maxc = px.max(axis=-1)
    minc = px.min(axis=-1)
    delta = maxc - minc
    gray = delta == 0
    safe = np.where(gray, 1.0, delta)

    rmax = (r == maxc) & ~gray
    gmax = (g == maxc) & ~gray & ~rmax
    bmax = ~gray & ~rmax & ~gmax
    h = np.zeros_like(maxc)
    h[rmax] = np.mod((g - b)[rmax] / safe[rmax], 6.0)
    h[gmax] = (b - r)[gmax] / safe[gmax] + 2.0
    h[bmax] = (r - g)[bmax] / safe[bmax] + 4.0

    h = np.mod(h + degrees / 60.0, 6.0)
    x = delta * (1.0 - np.abs(np.mod(h, 2.0) - 1.0))
    sector = np.floor(h).astype(int) % 6
    c_hi = delta + minc
    c_mid = x + minc
    c_lo = minc
    channel_by_sector = {
        0: (c_hi, c_mid, c_lo), 1: (c_mid, c_hi, c_lo), 2: (c_lo, c_hi, c_mid),
        3: (c_lo, c_mid, c_hi), 4: (c_mid, c_lo, c_hi), 5: (c_hi, c_lo, c_mid),
    }
    out = np.empty_like(px)
    for s, (cr, cg, cb) in channel_by_sector.items():
        sel = sector == s
        out[..., 0][sel] = cr[sel]
        out[..., 1][sel] = cg[sel]
        out[..., 2][sel] = cb[sel]
    out[gray] = px[gray]
    return Image(np.clip(np.rint(out), 0, 255).astype(np.uint8))


# --------------------------------------------------------------------------
# screen synthesis


_CONSONANTS = "bcdfghklmnprstvz"
_VOWELS = "aeiou"


def _word(rng: np.random.Generator, syllables: int) -> str:
    out = []
    for _ in range(syllables):
        out.append(_CONSONANTS[rng.integers(len(_CONSONANTS))])
        out.append(_VOWELS[rng.integers(len(_VOWELS))])
    return "".join(out)


def _phrase(rng: np.random.Generator) -> str:
    words = [_word(rng, int(rng.integers(1, 4))) for _ in range(int(rng.integers(1, 3)))]
    return " ".join(w.capitalize() for w in words)


def _leaf_text(cls: ComponentClass, rng: np.random.Generator) -> str | None:
    if cls is ComponentClass.NumberPicker:
        return str(int(rng.integers(0, 100)))
    if cls in TEXT_BEARING:
        return _phrase(rng)
    return None


def _pick_fill(rng: np.random.Generator, bg: tuple) -> tuple:
    bg_luma = 0.299 * bg[0] + 0.587 * bg[1] + 0.114 * bg[2]
    for _ in range(16):
        fill = tuple(int(v) for v in rng.integers(60, 231, 3))
        luma = 0.299 * fill[0] + 0.587 * fill[1] + 0.114 * fill[2]
        if abs(luma - bg_luma) >= 24:
            return fill
    return (max(0, int(bg[0]) - 96), max(0, int(bg[1]) - 96),
            max(0, int(bg[2]) - 96))


@dataclass(frozen=True)
class _SynthLeaf:
    box: BoundingBox
    text: str | None
    spec: PaintSpec


def synthesize_screen(cls: ComponentClass, seed: int,
                      width: int = 600, height: int = 960
                      ) -> tuple[ScreenRecord, Image]:
    """One portrait screen holding exactly four instances of ``cls``.

    Sizes, grouping pattern, colors, text and widget state all derive
    from the seed, so identical calls produce identical bytes.
    """
    rng = np.random.default_rng(seed)
    margin = 24
    bg = tuple(int(v) for v in rng.integers(200, 256, 3))

    # Worst case: 63 + 4*100 + 3*48 = 607 px, comfortably inside any
    # portrait canvas of at least 640 px.
    if height < 640 or width < 2 * margin + 180:
        raise ConfigurationError("synthetic screens need at least 230x640")
    boxes: list[BoundingBox] = []
    y = margin + int(rng.integers(0, 40))
    for _ in range(4):
        h = int(rng.integers(44, 101))
        w = int(rng.integers(180, width - 2 * margin + 1))
        x = margin + int(rng.integers(0, width - 2 * margin - w + 1))
        boxes.append(BoundingBox(x, y, w, h))
        y += h + int(rng.integers(16, 49))

    synth_leaves: list[_SynthLeaf] = []
    for box in boxes:
        fill = _pick_fill(rng, bg)
        fill_luma = 0.299 * fill[0] + 0.587 * fill[1] + 0.114 * fill[2]
        if fill_luma > 140:
            ink = tuple(int(v) for v in rng.integers(0, 61, 3))
        else:
            ink = tuple(int(v) for v in rng.integers(200, 256, 3))
        accent = tuple(int(v) for v in rng.integers(30, 226, 3))
        text = _leaf_text(cls, rng)
        state = float(rng.uniform(0.15, 0.9))
        checked = bool(rng.integers(0, 2))
        synth_leaves.append(_SynthLeaf(box, text, PaintSpec(
            component=cls, box=box, fill=fill, ink=ink, accent=accent,
            text=text or "", state=state, checked=checked)))

    pattern = int(rng.integers(0, 3))
    nodes = [GuiNode(bounds=s.box, component=cls, text=s.text)
             for s in synth_leaves]
    if pattern == 0:
        groups: tuple[GuiNode, ...] = (
            GuiNode(bounds=union_box([n.bounds for n in nodes]),
                    container="LinearLayout", children=tuple(nodes)),)
    elif pattern == 1:
        first = GuiNode(bounds=union_box([n.bounds for n in nodes[:2]]),
                        container="LinearLayout", children=tuple(nodes[:2]))
        second = GuiNode(bounds=union_box([n.bounds for n in nodes[2:]]),
                         container="LinearLayout", children=tuple(nodes[2:]))
        groups = (first, second)
    else:
        grouped = GuiNode(bounds=union_box([n.bounds for n in nodes[:2]]),
                          container="LinearLayout", children=tuple(nodes[:2]))
        groups = (grouped, nodes[2], nodes[3])
    root = GuiNode(bounds=BoundingBox(0, 0, width, height),
                   container="FrameLayout", children=groups)
    record = ScreenRecord(id=f"synth-{cls.name}-{seed}", width=width,
                          height=height, root=root)

    canvas = Canvas(width, height, bg)
    for s in synth_leaves:
        paint_component(canvas, s.spec)
    return record, canvas.to_image()


# --------------------------------------------------------------------------
# segmentation


@dataclass
class CorpusManifest:
    screen_count: int
    class_counts: dict[str, int]
    splits: dict[str, str]
    components: list[dict]
    removals: list[dict]
    warnings: list[str]
    seed: int
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "screen_count": self.screen_count,
            "class_counts": self.class_counts,
            "splits": self.splits,
            "components": self.components,
            "removals": self.removals,
            "warnings": self.warnings,
            "seed": self.seed,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "CorpusManifest":
        return cls(screen_count=raw["screen_count"],
                   class_counts=dict(raw["class_counts"]),
                   splits=dict(raw["splits"]),
                   components=list(raw["components"]),
                   removals=list(raw["removals"]),
                   warnings=list(raw["warnings"]),
                   seed=raw["seed"], config=dict(raw.get("config", {})))

    def ids_for_split(self, split: str) -> list[str]:
        if split not in SPLITS:
            raise ConfigurationError(f"unknown split {split!r}")
        return sorted(cid for cid, s in self.splits.items() if s == split)


def segment(components: list[LabeledComponent],
            cfg: CorpusConfig = CorpusConfig(),
            removals: list[RemovalRecord] | None = None,
            screen_count: int = 0,
            ) -> tuple[CorpusManifest, list[LabeledComponent]]:
    """Split organic components, add synthetic to train, top up by hue
    perturbation.  Returns the manifest plus the full component list
    (including generated perturbed copies)."""
    rng = np.random.default_rng(cfg.seed)
    f_train, f_valid, _ = cfg.split_fractions
    organic = [c for c in components if c.provenance.kind == ORGANIC]
    synthetic = [c for c in components if c.provenance.kind != ORGANIC]

    splits: dict[str, str] = {}
    by_class: dict[ComponentClass, list[LabeledComponent]] = {}
    for comp in sorted(organic, key=lambda c: c.id):
        by_class.setdefault(comp.label, []).append(comp)

    warnings = []
    train_members: dict[ComponentClass, list[LabeledComponent]] = {
        cls: [] for cls in COMPONENT_CLASSES}
    for cls in COMPONENT_CLASSES:
        members = by_class.get(cls, [])
        if not members:
            warnings.append(f"class {cls.name} has no organic data")
        order = rng.permutation(len(members))
        n = len(members)
        n_train = int(np.floor(n * f_train))
        n_valid = int(np.floor(n * f_valid))
        for rank, idx in enumerate(order):
            comp = members[idx]
            if rank < n_train:
                splits[comp.id] = "train"
                train_members[cls].append(comp)
            elif rank < n_train + n_valid:
                splits[comp.id] = "valid"
            else:
                splits[comp.id] = "test"

    for comp in synthetic:
        splits[comp.id] = "train"
        train_members[comp.label].append(comp)

    perturbed: list[LabeledComponent] = []
    for cls in COMPONENT_CLASSES:
        base = train_members[cls]
        if not base:
            continue
        k = 0
        count = len(base)
        while count < cfg.augment_target:
            source = base[int(rng.integers(len(base)))]
            degrees = float(rng.uniform(0.0, 360.0))
            copy = LabeledComponent(
                id=f"{source.id}-p{k:04d}",
                crop=perturb_hue(source.crop, degrees),
                label=cls, screen_id=source.screen_id, box=source.box,
                provenance=Provenance(PERTURBED, source_id=source.id,
                                      hue_degrees=degrees))
            splits[copy.id] = "train"
            perturbed.append(copy)
            k += 1
            count += 1

    all_components = list(components) + perturbed
    class_counts: dict[str, int] = {}
    for comp in all_components:
        class_counts[comp.label.name] = class_counts.get(comp.label.name, 0) + 1

    entries = [{
        "id": comp.id,
        "class": comp.label.name,
        "screen": comp.screen_id,
        "box": [comp.box.x, comp.box.y, comp.box.w, comp.box.h],
        "split": splits[comp.id],
        "provenance": {
            "kind": comp.provenance.kind,
            "source": comp.provenance.source_id,
            "hue_degrees": comp.provenance.hue_degrees,
        },
    } for comp in sorted(all_components, key=lambda c: c.id)]

    manifest = CorpusManifest(
        screen_count=screen_count,
        class_counts=class_counts,
        splits=splits,
        components=entries,
        removals=[r.as_dict() for r in (removals or [])],
        warnings=warnings,
        seed=cfg.seed,
        config={
            "split_fractions": list(cfg.split_fractions),
            "min_class_count": cfg.min_class_count,
            "augment_target": cfg.augment_target,
            "portrait": [cfg.portrait_width, cfg.portrait_height],
        })
    validate_manifest(manifest)
    return manifest, all_components


def validate_manifest(manifest: CorpusManifest) -> None:
    by_id: dict[str, str] = {}
    for entry in manifest.components:
        cid = entry["id"]
        if cid in by_id:
            raise ValidationError(f"component {cid} appears twice")
        by_id[cid] = entry["split"]
        if entry["split"] not in SPLITS:
            raise ValidationError(f"{cid}: bad split {entry['split']!r}")
        if entry["split"] != "train" and entry["provenance"]["kind"] != ORGANIC:
            raise ValidationError(
                f"{cid}: {entry['provenance']['kind']} data in "
                f"{entry['split']} split")


# --------------------------------------------------------------------------
# on-disk corpus layout


def save_screen(corpus_dir: str | Path, record: ScreenRecord, shot: Image) -> Path:
    screen_dir = Path(corpus_dir) / "screens" / record.id
    screen_dir.mkdir(parents=True, exist_ok=True)
    (screen_dir / "screen.xml").write_text(serialize_screen_dump(record),
                                           encoding="utf-8")
    save_png(shot, screen_dir / "screen.png")
    return screen_dir


def load_screens(corpus_dir: str | Path) -> list[tuple[ScreenRecord, Image]]:
    screens_dir = Path(corpus_dir) / "screens"
    if not screens_dir.is_dir():
        raise ConfigurationError(f"no screens directory under {corpus_dir}")
    out = []
    for screen_dir in sorted(screens_dir.iterdir()):
        xml_path = screen_dir / "screen.xml"
        png_path = screen_dir / "screen.png"
        if not xml_path.is_file() or not png_path.is_file():
            continue
        record = parse_screen_dump(xml_path.read_text(encoding="utf-8"),
                                   screen_id=screen_dir.name)
        out.append((record, load_png(png_path)))
    return out


def _crop_path(corpus_dir: Path, label: str, comp_id: str) -> Path:
    return corpus_dir / "crops" / label / f"{comp_id}.png"


def write_components(corpus_dir: str | Path,
                     components: list[LabeledComponent]) -> None:
    corpus_dir = Path(corpus_dir)
    for comp in components:
        save_png(comp.crop, _crop_path(corpus_dir, comp.label.name, comp.id))


def write_manifest(corpus_dir: str | Path, manifest: CorpusManifest) -> Path:
    path = Path(corpus_dir) / "manifest.json"
    path.write_text(json.dumps(manifest.as_dict(), indent=2, sort_keys=True)
                    + "\n", encoding="utf-8")
    return path


def load_manifest(corpus_dir: str | Path) -> CorpusManifest:
    path = Path(corpus_dir) / "manifest.json"
    if not path.is_file():
        raise ConfigurationError(f"{corpus_dir}: no manifest.json (run clean)")
    return CorpusManifest.from_dict(json.loads(path.read_text(encoding="utf-8")))


def load_split_crops(corpus_dir: str | Path, manifest: CorpusManifest,
                     split: str) -> list[tuple[Image, ComponentClass]]:
    corpus_dir = Path(corpus_dir)
    entries = {e["id"]: e for e in manifest.components}
    out = []
    for cid in manifest.ids_for_split(split):
        entry = entries[cid]
        crop = load_png(_crop_path(corpus_dir, entry["class"], cid))
        out.append((crop, ComponentClass[entry["class"]]))
    return out
