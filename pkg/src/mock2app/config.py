"""Pipeline configuration: profiles, flat key=value config files, flags.

Resolution order: profile defaults, then config-file entries, then
explicit command-line flags.  The "paper" profile carries the documented
full-scale constants; "desk" is sized for a workstation run.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .cnn import TrainConfig
from .core import ConfigurationError
from .corpus import CorpusConfig
from .detection import DetectionConfig


@dataclass(frozen=True)
class PipelineConfig:
    profile: str = "desk"
    seed: int = 0
    density: float = 2.0
    bovw_k: int = 256
    max_levels: int = 4
    conv_widths: tuple[int, int, int] = (16, 32, 64)
    fc_width: int = 128
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    train: TrainConfig = field(default_factory=lambda: TrainConfig(max_epochs=5))


def profile_config(profile: str, seed: int = 0) -> PipelineConfig:
    if profile == "desk":
        return PipelineConfig(
            profile="desk", seed=seed,
            corpus=CorpusConfig(seed=seed),
            train=TrainConfig(max_epochs=5, seed=seed))
    if profile == "paper":
        return PipelineConfig(
            profile="paper", seed=seed,
            bovw_k=4250,
            conv_widths=(32, 64, 128), fc_width=256,
            corpus=CorpusConfig(portrait_width=1200, portrait_height=1920,
                                min_class_count=200, augment_target=5000,
                                seed=seed),
            train=TrainConfig(max_epochs=100, seed=seed))
    raise ConfigurationError(f"unknown profile {profile!r} (desk|paper)")


def load_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` lines; '#' starts a comment."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def _parse_widths(raw: str) -> tuple[int, int, int]:
    parts = [int(p) for p in raw.replace(",", " ").split()]
    if len(parts) != 3:
        raise ConfigurationError("conv_widths needs exactly 3 integers")
    return tuple(parts)  # type: ignore[return-value]


def apply_entries(cfg: PipelineConfig, entries: dict[str, str]
                  ) -> PipelineConfig:
    """Overlay flat config entries onto a resolved config."""
    corpus = cfg.corpus
    detection = cfg.detection
    train = cfg.train
    top: dict = {}
    for key, raw in entries.items():
        try:
            if key == "profile":
                continue  # handled before overlay
            elif key == "seed":
                top["seed"] = int(raw)
                corpus = replace(corpus, seed=int(raw))
                train = replace(train, seed=int(raw))
            elif key == "density":
                top["density"] = float(raw)
            elif key == "bovw_k":
                top["bovw_k"] = int(raw)
            elif key == "max_levels":
                top["max_levels"] = int(raw)
            elif key == "conv_widths":
                top["conv_widths"] = _parse_widths(raw)
            elif key == "fc_width":
                top["fc_width"] = int(raw)
            elif key == "corpus.width":
                corpus = replace(corpus, portrait_width=int(raw))
            elif key == "corpus.height":
                corpus = replace(corpus, portrait_height=int(raw))
            elif key == "corpus.min_class_count":
                corpus = replace(corpus, min_class_count=int(raw))
            elif key == "corpus.augment_target":
                corpus = replace(corpus, augment_target=int(raw))
            elif key == "train.max_epochs":
                train = replace(train, max_epochs=int(raw))
            elif key == "train.batch_size":
                train = replace(train, batch_size=int(raw))
            elif key == "train.learning_rate":
                train = replace(train, learning_rate=float(raw))
            elif key == "train.val_interval":
                train = replace(train, val_interval=int(raw))
            elif key == "train.patience":
                train = replace(train, patience=int(raw))
            elif key == "detection.sigma":
                detection = replace(detection, gaussian_sigma=float(raw))
            elif key == "detection.low":
                detection = replace(detection, canny_low=float(raw))
            elif key == "detection.high":
                detection = replace(detection, canny_high=float(raw))
            elif key == "detection.dilation_radius":
                detection = replace(detection, dilation_radius=int(raw))
            elif key == "detection.min_box_area":
                detection = replace(detection, min_box_area=int(raw))
            elif key == "detection.text_gap":
                detection = replace(detection, text_merge_gap=int(raw))
            elif key == "detection.text_overlap":
                detection = replace(detection, text_overlap_fraction=float(raw))
            else:
                raise ConfigurationError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigurationError(f"config key {key!r}: {exc}") from exc
    return replace(cfg, corpus=corpus, detection=detection, train=train, **top)


def resolve_config(profile: str | None, config_path: str | Path | None,
                   overrides: dict[str, str]) -> PipelineConfig:
    entries = load_config_file(config_path) if config_path else {}
    name = overrides.get("profile") or entries.get("profile") or profile or "desk"
    seed_raw = overrides.get("seed", entries.get("seed", "0"))
    cfg = profile_config(name, seed=int(seed_raw))
    cfg = apply_entries(cfg, entries)
    cfg = apply_entries(cfg, overrides)
    return cfg
