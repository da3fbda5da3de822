"""Evaluation metrics: classifier confusion, weighted tree edit distance
on pre-order type sequences, and normalized pixel error."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (COMPONENT_CLASSES, ComponentClass, GuiNode, Image,
                   ShapeError, ValidationError, preorder)


@dataclass(frozen=True)
class EditWeights:
    w_ins: float = 1.0 / 3.0
    w_del: float = 1.0 / 3.0
    w_sub: float = 1.0 / 3.0

    def __post_init__(self):
        if min(self.w_ins, self.w_del, self.w_sub) < 0:
            raise ValidationError("edit weights must be non-negative")
        if abs(self.w_ins + self.w_del + self.w_sub - 1.0) > 1e-9:
            raise ValidationError("edit weights must sum to 1")


def sweep_weights(op: str, penalty: float) -> EditWeights:
    """Weights with ``penalty`` on the swept op, the rest split equally."""
    if not 0.0 < penalty < 1.0:
        raise ValidationError("penalty must lie strictly between 0 and 1")
    rest = (1.0 - penalty) / 2.0
    if op == "ins":
        return EditWeights(w_ins=penalty, w_del=rest, w_sub=rest)
    if op == "del":
        return EditWeights(w_ins=rest, w_del=penalty, w_sub=rest)
    if op == "sub":
        return EditWeights(w_ins=rest, w_del=rest, w_sub=penalty)
    raise ValidationError(f"unknown edit op {op!r} (want ins|del|sub)")


class ConfusionMatrix:
    """Square count matrix, rows = true class, columns = predicted."""

    def __init__(self, classes: tuple[ComponentClass, ...] = COMPONENT_CLASSES):
        self.classes = classes
        self.counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
        self._index = {cls: i for i, cls in enumerate(classes)}

    def add(self, true: ComponentClass, predicted: ComponentClass,
            count: int = 1) -> None:
        self.counts[self._index[true], self._index[predicted]] += count

    def total(self) -> int:
        return int(self.counts.sum())

    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)


def precision(matrix: ConfusionMatrix) -> tuple[float, dict[str, float | None]]:
    """Overall top-1 rate plus per-class row-normalized diagonal rates.

    (Row normalization matches the usual published convention for this
    kind of table; per-class columns are also exported by reports.)
    """
    total = matrix.total()
    if total == 0:
        raise ValidationError("empty confusion matrix")
    overall = float(np.trace(matrix.counts)) / total
    per_class: dict[str, float | None] = {}
    rows = matrix.row_totals()
    for i, cls in enumerate(matrix.classes):
        per_class[cls.name] = (float(matrix.counts[i, i]) / rows[i]
                               if rows[i] else None)
    return overall, per_class


def confusion_report(matrix: ConfusionMatrix) -> dict:
    overall, per_class = precision(matrix)
    rows = matrix.row_totals().astype(float)
    cols = matrix.counts.sum(axis=0).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        row_norm = np.where(rows[:, None] > 0, matrix.counts / rows[:, None], 0.0)
        col_norm = np.where(cols[None, :] > 0, matrix.counts / cols[None, :], 0.0)
    return {
        "overall_top1": overall,
        "per_class": per_class,
        "counts": matrix.counts.tolist(),
        "row_normalized": row_norm.round(6).tolist(),
        "col_normalized": col_norm.round(6).tolist(),
        "class_order": [c.name for c in matrix.classes],
        "support": matrix.row_totals().tolist(),
    }


def format_confusion_table(report: dict) -> str:
    names = report["class_order"]
    abbrev = [n[:4] for n in names]
    header = f"{'class':<16}{'n':>7}  " + " ".join(f"{a:>5}" for a in abbrev)
    lines = [header]
    for i, name in enumerate(names):
        row = report["row_normalized"][i]
        cells = " ".join(f"{100 * v:5.0f}" for v in row)
        lines.append(f"{name:<16}{report['support'][i]:>7}  {cells}")
    lines.append(f"overall top-1: {report['overall_top1']:.4f}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# tree edit distance


def preorder_sequence(tree: GuiNode) -> list[str]:
    """Type labels in pre-order; geometry is deliberately excluded."""
    return [node.label for node in preorder(tree)]


def edit_distance(a: list[str], b: list[str],
                  w: EditWeights = EditWeights()) -> float:
    """Minimum weighted edit cost turning ``a`` into ``b`` (two-row DP).

    Deleting drops an element of ``a``; inserting adds an element of
    ``b``; matches are free.
    """
    w_ins, w_del, w_sub = w.w_ins, w.w_del, w.w_sub
    if not a and not b:
        return 0.0
    prev = [j * w_ins for j in range(len(b) + 1)]
    for i in range(1, len(a) + 1):
        ai = a[i - 1]
        cur = [i * w_del]
        append = cur.append
        for j in range(1, len(b) + 1):
            sub = prev[j - 1] + (0.0 if ai == b[j - 1] else w_sub)
            dele = prev[j] + w_del
            ins = cur[j - 1] + w_ins
            best = sub if sub <= dele else dele
            append(best if best <= ins else ins)
        prev = cur
    return prev[len(b)]


def sweep_edit_distance(a: list[str], b: list[str], op: str,
                        penalties: list[float]) -> list[tuple[float, float]]:
    """(penalty, distance) curve for one swept edit operation."""
    return [(p, edit_distance(a, b, sweep_weights(op, p))) for p in penalties]


# --------------------------------------------------------------------------
# pixel similarity


def _pixel_diff(a: Image, b: Image) -> np.ndarray:
    if (a.width, a.height) != (b.width, b.height):
        raise ShapeError(
            f"image sizes differ: {a.width}x{a.height} vs {b.width}x{b.height}")
    return (a.pixels.astype(np.float64) - b.pixels.astype(np.float64)) / 255.0


def pixel_mae(a: Image, b: Image) -> float:
    return float(np.abs(_pixel_diff(a, b)).mean())


def pixel_mse(a: Image, b: Image) -> float:
    d = _pixel_diff(a, b)
    return float((d * d).mean())
