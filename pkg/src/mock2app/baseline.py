"""Codebook-histogram baseline classifier.

Descriptors are mean/variance-normalized 8x8 grayscale patches on a
stride-8 grid over stretch-resized crops; Lloyd's k-means builds the
codebook and each class keeps its mean codeword histogram, compared at
prediction time by cosine similarity.  This deliberately swaps the
engineered-keypoint + SVM construction for a dependency-free stand-in:
it exists to show the network's relative advantage, not to win.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (COMPONENT_CLASSES, ComponentClass, ConfigurationError,
                   Image)
from .imaging import resize_nearest, to_gray
from .modelio import load_model_file, save_model_file

MODEL_TAG = "bovw"

PATCH = 8
STRIDE = 8
RESIZE = 128
KMEANS_MAX_ITER = 50
KMEANS_TOL = 1e-4


@dataclass
class BovwModel:
    codebook: np.ndarray          # (k, PATCH*PATCH) float32
    class_histograms: np.ndarray  # (n_classes, k) float32, rows sum to 1 or 0
    classes: tuple[ComponentClass, ...]
    meta: dict

    @property
    def k(self) -> int:
        return self.codebook.shape[0]

    def save(self, path) -> None:
        manifest = {
            "classes": [c.name for c in self.classes],
            "patch": PATCH, "stride": STRIDE, "resize": RESIZE,
            "meta": self.meta,
            "arrays": [
                {"name": "codebook", "shape": list(self.codebook.shape)},
                {"name": "class_histograms",
                 "shape": list(self.class_histograms.shape)},
            ],
        }
        save_model_file(path, MODEL_TAG, manifest,
                        [self.codebook, self.class_histograms])

    @classmethod
    def load(cls, path) -> "BovwModel":
        _, manifest, arrays = load_model_file(path, expect_tag=MODEL_TAG)
        classes = tuple(ComponentClass[n] for n in manifest["classes"])
        return cls(codebook=arrays[0], class_histograms=arrays[1],
                   classes=classes, meta=dict(manifest.get("meta", {})))


def patch_descriptors(crop: Image) -> np.ndarray:
    """(n_patches, 64) normalized grid patches of one crop."""
    gray = to_gray(Image(resize_nearest(crop.pixels, RESIZE, RESIZE)))
    n = (RESIZE - PATCH) // STRIDE + 1
    s0, s1 = gray.strides
    windows = np.lib.stride_tricks.as_strided(
        gray, (n, n, PATCH, PATCH), (s0 * STRIDE, s1 * STRIDE, s0, s1))
    flat = windows.reshape(n * n, PATCH * PATCH).astype(np.float32)
    mean = flat.mean(axis=1, keepdims=True)
    std = flat.std(axis=1, keepdims=True)
    return np.where(std < 1e-6, np.float32(0.0),
                    (flat - mean) / np.maximum(std, np.float32(1e-6)))


def kmeans(data: np.ndarray, k: int, seed: int,
           max_iter: int = KMEANS_MAX_ITER, tol: float = KMEANS_TOL
           ) -> tuple[np.ndarray, list[float]]:
    """Lloyd's iterations; returns (centroids, per-iteration objective)."""
    if k < 2:
        raise ConfigurationError("k must be >= 2")
    if len(data) < k:
        raise ConfigurationError(
            f"only {len(data)} descriptors for k={k}; use a smaller k")
    rng = np.random.default_rng(seed)
    centroids = data[rng.choice(len(data), size=k, replace=False)].copy()
    objective: list[float] = []
    for _ in range(max_iter):
        ids, dists = assign_codewords(data, centroids, with_distance=True)
        objective.append(float(dists.sum()))
        new_centroids = centroids.copy()
        counts = np.bincount(ids, minlength=k)
        sums = np.zeros_like(centroids, dtype=np.float64)
        np.add.at(sums, ids, data)
        nonempty = counts > 0
        new_centroids[nonempty] = (sums[nonempty]
                                   / counts[nonempty, None]).astype(np.float32)
        shift = float(np.abs(new_centroids - centroids).max())
        centroids = new_centroids
        if shift < tol:
            break
    return centroids, objective


def assign_codewords(data: np.ndarray, centroids: np.ndarray,
                     with_distance: bool = False, chunk: int = 65536):
    """Nearest centroid per descriptor (squared euclidean)."""
    c_norm = (centroids.astype(np.float64) ** 2).sum(axis=1)
    ids = np.empty(len(data), dtype=np.int64)
    dists = np.empty(len(data), dtype=np.float64) if with_distance else None
    for start in range(0, len(data), chunk):
        block = data[start:start + chunk].astype(np.float64)
        d2 = (block ** 2).sum(axis=1)[:, None] - 2.0 * (block @ centroids.T.astype(np.float64)) + c_norm
        pick = d2.argmin(axis=1)
        ids[start:start + chunk] = pick
        if with_distance:
            dists[start:start + chunk] = np.maximum(
                d2[np.arange(len(block)), pick], 0.0)
    return (ids, dists) if with_distance else ids


def _crop_histogram(descriptors: np.ndarray, codebook: np.ndarray) -> np.ndarray:
    ids = assign_codewords(descriptors, codebook)
    hist = np.bincount(ids, minlength=codebook.shape[0]).astype(np.float32)
    total = hist.sum()
    return hist / total if total else hist


def bovw_train(samples: list[tuple[Image, ComponentClass]], k: int = 256,
               seed: int = 0, max_codebook_descriptors: int = 200_000
               ) -> BovwModel:
    if not samples:
        raise ConfigurationError("empty training data")
    per_crop = [patch_descriptors(crop) for crop, _ in samples]
    stacked = np.concatenate(per_crop, axis=0)
    if len(stacked) < k:
        raise ConfigurationError(
            f"only {len(stacked)} descriptors for k={k}; use a smaller k")
    rng = np.random.default_rng(seed)
    if len(stacked) > max_codebook_descriptors:
        pick = rng.choice(len(stacked), size=max_codebook_descriptors,
                          replace=False)
        sample = stacked[np.sort(pick)]
    else:
        sample = stacked
    codebook, objective = kmeans(sample, k, seed)

    class_sums = np.zeros((len(COMPONENT_CLASSES), k), dtype=np.float64)
    class_counts = np.zeros(len(COMPONENT_CLASSES), dtype=np.int64)
    for descriptors, (_, label) in zip(per_crop, samples):
        class_sums[label.ordinal] += _crop_histogram(descriptors, codebook)
        class_counts[label.ordinal] += 1
    histograms = np.zeros_like(class_sums, dtype=np.float32)
    for i in range(len(COMPONENT_CLASSES)):
        if class_counts[i]:
            mean = class_sums[i] / class_counts[i]
            total = mean.sum()
            histograms[i] = (mean / total if total else mean).astype(np.float32)
    return BovwModel(codebook=codebook, class_histograms=histograms,
                     classes=COMPONENT_CLASSES,
                     meta={"k": k, "seed": seed,
                           "kmeans_iterations": len(objective),
                           "train_size": len(samples)})


def bovw_predict(model: BovwModel, crop: Image
                 ) -> list[tuple[ComponentClass, float]]:
    hist = _crop_histogram(patch_descriptors(crop), model.codebook)
    h_norm = float(np.linalg.norm(hist))
    scores = []
    for i, cls in enumerate(model.classes):
        c = model.class_histograms[i]
        c_norm = float(np.linalg.norm(c))
        sim = (float(hist @ c) / (h_norm * c_norm)
               if h_norm > 0 and c_norm > 0 else 0.0)
        scores.append((cls, sim))
    return sorted(scores, key=lambda p: (-p[1], p[0].ordinal))
