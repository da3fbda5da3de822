"""The component classifier: architecture, inference, persistence.

Default architecture: three Conv(3x3, stride 1, pad 1) + ReLU +
MaxPool(2x2) stages, then Flatten, a hidden Dense + ReLU and a Dense
head over the component classes, trained with softmax cross-entropy.
Inputs are 128x128 RGB letterboxed crops scaled to [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import ComponentClass, ConfigurationError, Image, ValidationError
from ..imaging import letterbox
from ..modelio import load_model_file, save_model_file
from .layers import Conv2d, Dense, Flatten, Layer, MaxPool2x2, ReLU, softmax

MODEL_TAG = "cnn"
DEFAULT_INPUT_SIZE = 128
DEFAULT_CONV_WIDTHS = (32, 64, 128)
DEFAULT_FC_WIDTH = 256


@dataclass
class CnnModel:
    layers: list[Layer]
    classes: tuple[ComponentClass, ...]
    input_size: int = DEFAULT_INPUT_SIZE
    conv_widths: tuple[int, ...] = DEFAULT_CONV_WIDTHS
    fc_width: int = DEFAULT_FC_WIDTH
    meta: dict = field(default_factory=dict)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return x

    def backward(self, dlogits: np.ndarray) -> np.ndarray:
        g = dlogits
        for layer in reversed(self.layers):
            g = layer.backward(g)
        return g

    def params(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params()]

    def grads(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads()]

    def set_params(self, values: list[np.ndarray]) -> None:
        own = self.params()
        if len(own) != len(values):
            raise ValidationError(f"expected {len(own)} arrays, got {len(values)}")
        for dst, src in zip(own, values):
            if dst.shape != src.shape:
                raise ValidationError(f"shape {src.shape} != {dst.shape}")
            dst[...] = src

    def preprocess(self, crop: Image) -> np.ndarray:
        """Letterboxed, [0,1]-scaled CHW float32 plane for one crop."""
        if crop.width <= 0 or crop.height <= 0:
            raise ValidationError("cannot classify an empty crop")
        boxed = letterbox(crop, self.input_size)
        return boxed.transpose(2, 0, 1).astype(np.float32) / 255.0

    def predict(self, crop: Image) -> list[tuple[ComponentClass, float]]:
        """All classes ranked by descending score; scores sum to 1."""
        x = self.preprocess(crop)[None]
        probs = softmax(self.forward(x))[0]
        order = sorted(range(len(self.classes)),
                       key=lambda i: (-probs[i], self.classes[i].ordinal))
        return [(self.classes[i], float(probs[i])) for i in order]

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        """Argmax class indices for a prepared (N, C, S, S) batch."""
        return self.forward(x).argmax(axis=1)

    def save(self, path) -> None:
        arrays = self.params()
        manifest = {
            "classes": [c.name for c in self.classes],
            "input_size": self.input_size,
            "conv_widths": list(self.conv_widths),
            "fc_width": self.fc_width,
            "layers": [layer.spec() for layer in self.layers],
            "meta": self.meta,
            "arrays": [{"name": f"p{i}", "shape": list(a.shape)}
                       for i, a in enumerate(arrays)],
        }
        save_model_file(path, MODEL_TAG, manifest, arrays)

    @classmethod
    def load(cls, path) -> "CnnModel":
        _, manifest, arrays = load_model_file(path, expect_tag=MODEL_TAG)
        classes = tuple(ComponentClass[name] for name in manifest["classes"])
        model = build_cnn(
            classes,
            conv_widths=tuple(manifest["conv_widths"]),
            fc_width=int(manifest["fc_width"]),
            input_size=int(manifest["input_size"]),
            rng=np.random.default_rng(0),
        )
        model.set_params(arrays)
        model.meta = dict(manifest.get("meta", {}))
        return model


def build_cnn(classes: tuple[ComponentClass, ...] = tuple(ComponentClass),
              conv_widths: tuple[int, ...] = DEFAULT_CONV_WIDTHS,
              fc_width: int = DEFAULT_FC_WIDTH,
              input_size: int = DEFAULT_INPUT_SIZE,
              *, rng: np.random.Generator) -> CnnModel:
    """Assemble the classifier with seeded fan-in-scaled uniform init."""
    if len(conv_widths) != 3:
        raise ConfigurationError("the architecture uses exactly 3 conv stages")
    if input_size % 8:
        raise ConfigurationError("input size must survive three 2x2 pools")
    if not classes:
        raise ConfigurationError("need at least one class")
    layers: list[Layer] = []
    in_ch = 3
    for width in conv_widths:
        layers.append(Conv2d(in_ch, width, kernel=3, stride=1, pad=1, rng=rng))
        layers.append(ReLU())
        layers.append(MaxPool2x2())
        in_ch = width
    final_hw = input_size // 8
    layers.append(Flatten())
    layers.append(Dense(in_ch * final_hw * final_hw, fc_width, rng=rng))
    layers.append(ReLU())
    layers.append(Dense(fc_width, len(classes), rng=rng))
    return CnnModel(layers=layers, classes=tuple(classes),
                    input_size=input_size, conv_widths=tuple(conv_widths),
                    fc_width=fc_width)
