"""Container assembly: group classified nodes by matching corpus screens.

The index stores, per corpus screen, the working-set states a perfect
grouping pass would produce on that screen's own leaves (level 0 = the
leaves, each later level the containers one grouping step up, with
children-union bounds).  Construction then repeats: find the screen
whose level-l nodes best overlap the working set (greedy area pairing,
intersection-over-union score), clone the parents of the paired targets
as containers, and continue with the clones.  Matching a screen's own
leaves therefore scores exactly 1.0 at every level and reproduces its
grouping.

Node pairing for the set-overlap score is a greedy interpretation (the
source construction leaves overlap semantics for inexact boxes open);
it reduces to exact set intersection whenever boxes match exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (BoundingBox, ComponentClass, ConfigurationError, GuiNode,
                   ScreenRecord, union_box)

FALLBACK_ROOT_TYPE = "RelativeLayout"
DEFAULT_MAX_LEVELS = 4

FBox = tuple[float, float, float, float]


class NoMatchError(LookupError):
    """No corpus screen overlaps the working set at this level."""


@dataclass(frozen=True)
class InputNode:
    """One classified detection (or an intermediate container clone)."""

    bounds: BoundingBox
    component: ComponentClass | None = None
    container: str | None = None
    text: str | None = None

    @property
    def label(self) -> str:
        return self.component.name if self.component else (self.container or "?")


@dataclass(frozen=True)
class _LevelNode:
    corpus_node: int      # stable pre-order id within the source screen
    label: str
    fbox: FBox            # children-union bounds in canonical coordinates


@dataclass(frozen=True)
class _IndexedScreen:
    id: str
    labels: dict[int, str]          # corpus node id -> type label
    parents: dict[int, int]         # corpus node id -> parent id (root: itself)
    levels: tuple[tuple[_LevelNode, ...], ...]


@dataclass
class HierarchyIndex:
    width: int
    height: int
    screens: list[_IndexedScreen] = field(default_factory=list)

    def screens_with_level(self, level: int) -> list[_IndexedScreen]:
        return [s for s in self.screens
                if level < len(s.levels) and s.levels[level]]


def _scale_box(box: BoundingBox, sx: float, sy: float) -> FBox:
    return (box.x * sx, box.y * sy, box.w * sx, box.h * sy)


def _funion(boxes: list[FBox]) -> FBox:
    x0 = min(b[0] for b in boxes)
    y0 = min(b[1] for b in boxes)
    x1 = max(b[0] + b[2] for b in boxes)
    y1 = max(b[1] + b[3] for b in boxes)
    return (x0, y0, x1 - x0, y1 - y0)


def _finter(a: FBox, b: FBox) -> float:
    w = min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0])
    h = min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1])
    return w * h if w > 0 and h > 0 else 0.0


def _fiou(a: FBox, b: FBox) -> float:
    inter = _finter(a, b)
    if inter <= 0:
        return 0.0
    return inter / (a[2] * a[3] + b[2] * b[3] - inter)


def _index_screen(record: ScreenRecord, canonical: tuple[int, int]
                  ) -> _IndexedScreen:
    sx = canonical[0] / record.width
    sy = canonical[1] / record.height
    labels: dict[int, str] = {}
    parents: dict[int, int] = {}
    boxes: dict[int, FBox] = {}
    leaf_ids: list[int] = []

    def walk(node: GuiNode, parent_id: int | None, counter: list[int]) -> None:
        nid = counter[0]
        counter[0] += 1
        labels[nid] = node.label
        parents[nid] = nid if parent_id is None else parent_id
        boxes[nid] = _scale_box(node.bounds, sx, sy)
        if node.is_leaf:
            leaf_ids.append(nid)
        for child in node.children:
            walk(child, nid, counter)

    walk(record.root, None, [0])

    # Simulate the grouping pass to materialize per-level working sets.
    state: list[tuple[int, FBox]] = [(nid, boxes[nid]) for nid in leaf_ids]
    levels: list[tuple[_LevelNode, ...]] = []
    while True:
        levels.append(tuple(_LevelNode(nid, labels[nid], fbox)
                            for nid, fbox in state))
        if len(state) == 1 and parents[state[0][0]] == state[0][0]:
            break
        grouped: dict[int, list[FBox]] = {}
        order: list[int] = []
        for nid, fbox in state:
            key = parents[nid]
            if key not in grouped:
                grouped[key] = []
                order.append(key)
            grouped[key].append(fbox)
        new_state = [(key, _funion(grouped[key])) for key in order]
        if [nid for nid, _ in new_state] == [nid for nid, _ in state]:
            break  # no progress possible (defensive; malformed tree)
        state = new_state
    return _IndexedScreen(id=record.id, labels=labels, parents=parents,
                          levels=tuple(levels))


def build_index(records: list[ScreenRecord],
                canonical: tuple[int, int] | None = None) -> HierarchyIndex:
    """Deterministic matching index over the cleaned corpus screens."""
    records = sorted(records, key=lambda r: r.id)
    if not records:
        raise ConfigurationError("cannot build a hierarchy index from zero screens")
    if canonical is None:
        canonical = (records[0].width, records[0].height)
    index = HierarchyIndex(width=canonical[0], height=canonical[1])
    for record in records:
        index.screens.append(_index_screen(record, canonical))
    return index


def _pair_screen(boxes: list[FBox], screen: _IndexedScreen, level: int
                 ) -> tuple[list[tuple[int, int]], float]:
    """Greedy max-IOU pairing of working boxes against one screen level.

    Returns (pairs as (input_idx, target_idx), screen score).
    """
    targets = screen.levels[level]
    cands = []
    for i, ibox in enumerate(boxes):
        for t, tnode in enumerate(targets):
            overlap = _fiou(ibox, tnode.fbox)
            if overlap > 0:
                cands.append((-overlap, i, t))
    cands.sort()
    used_i: set[int] = set()
    used_t: set[int] = set()
    pairs = []
    inter_sum = 0.0
    for _, i, t in cands:
        if i in used_i or t in used_t:
            continue
        used_i.add(i)
        used_t.add(t)
        pairs.append((i, t))
        inter_sum += _finter(boxes[i], targets[t].fbox)
    total = (sum(b[2] * b[3] for b in boxes)
             + sum(t.fbox[2] * t.fbox[3] for t in targets)
             - inter_sum)
    score = inter_sum / total if total > 0 else 0.0
    return pairs, score


def match_screen(nodes: list[InputNode], index: HierarchyIndex, level: int,
                 canvas: tuple[int, int] | None = None) -> tuple[str, float]:
    """Best-matching corpus screen for the nodes at the given level."""
    if not nodes:
        raise ConfigurationError("match_screen needs a non-empty input")
    best_id, best_score, _ = _best_screen(
        [_scale_input(n.bounds, index, canvas) for n in nodes], index, level)
    if best_id is None:
        raise NoMatchError(f"no corpus screen overlaps the input at level {level}")
    return best_id, best_score


def _scale_input(box: BoundingBox, index: HierarchyIndex,
                 canvas: tuple[int, int] | None) -> FBox:
    if canvas is None:
        return (float(box.x), float(box.y), float(box.w), float(box.h))
    sx = index.width / canvas[0]
    sy = index.height / canvas[1]
    return _scale_box(box, sx, sy)


def _best_screen(boxes: list[FBox], index: HierarchyIndex, level: int):
    best_id: str | None = None
    best_score = 0.0
    best_screen = None
    for screen in index.screens_with_level(level):
        _, score = _pair_screen(boxes, screen, level)
        if score > best_score or (score == best_score and best_id is not None
                                  and score > 0 and screen.id < best_id):
            best_id, best_score, best_screen = screen.id, score, screen
    return best_id, best_score, best_screen


@dataclass(frozen=True)
class _WorkItem:
    node: GuiNode
    cloned_from: tuple[str, int] | None = None  # (screen id, corpus node id)


def _sorted_children(nodes: list[GuiNode]) -> tuple[GuiNode, ...]:
    return tuple(sorted(nodes, key=lambda n: (n.bounds.y, n.bounds.x,
                                              n.bounds.w, n.bounds.h)))


def construct_hierarchy(inputs: list[InputNode], index: HierarchyIndex,
                        max_levels: int = DEFAULT_MAX_LEVELS,
                        canvas: tuple[int, int] | None = None) -> GuiNode:
    """Assemble a single-rooted tree containing every input exactly once.

    Ungroupable leftovers (no match, or the level budget runs out) land
    under a synthesized full-canvas fallback root.
    """
    if max_levels < 1:
        raise ConfigurationError("max_levels must be >= 1")
    if canvas is None:
        canvas = (index.width, index.height)
    full = BoundingBox(0, 0, canvas[0], canvas[1])
    if not inputs:
        return GuiNode(bounds=full, container=FALLBACK_ROOT_TYPE)

    work: list[_WorkItem] = []
    for node in inputs:
        if node.component is not None:
            leaf = GuiNode(bounds=node.bounds, component=node.component,
                           text=node.text)
        else:
            leaf = GuiNode(bounds=node.bounds,
                           container=node.container or "LinearLayout",
                           text=node.text)
        work.append(_WorkItem(node=leaf))

    level = 0
    while len(work) > 1 and level < max_levels:
        boxes = [_scale_input(item.node.bounds, index, canvas) for item in work]
        best_id, best_score, screen = _best_screen(boxes, index, level)
        if screen is None or best_score <= 0.0:
            break
        pairs, _ = _pair_screen(boxes, screen, level)
        matched_idx = {i for i, _ in pairs}

        adopted: dict[int, list[GuiNode]] = {}
        key_order: list[int] = []
        for i, t in sorted(pairs):
            target = screen.levels[level][t]
            key = screen.parents[target.corpus_node]
            if key not in adopted:
                adopted[key] = []
                key_order.append(key)
            item = work[i]
            if (key == target.corpus_node
                    and item.cloned_from == (screen.id, target.corpus_node)):
                adopted[key].extend(item.node.children)
            else:
                adopted[key].append(item.node)

        clones = []
        for key in key_order:
            children = _sorted_children(adopted[key])
            clone = GuiNode(bounds=union_box([c.bounds for c in children]),
                            container=screen.labels[key], children=children)
            clones.append(_WorkItem(node=clone, cloned_from=(screen.id, key)))
        work = [item for i, item in enumerate(work)
                if i not in matched_idx] + clones
        level += 1

    if len(work) == 1 and not work[0].node.is_leaf:
        return work[0].node
    children = _sorted_children([item.node for item in work])
    return GuiNode(bounds=full, container=FALLBACK_ROOT_TYPE, children=children)


# --------------------------------------------------------------------------
# persistence


def save_index(index: HierarchyIndex, path: str | Path) -> None:
    doc = {
        "width": index.width,
        "height": index.height,
        "screens": [{
            "id": s.id,
            "labels": {str(k): v for k, v in s.labels.items()},
            "parents": {str(k): v for k, v in s.parents.items()},
            "levels": [[{"node": n.corpus_node, "label": n.label,
                         "box": list(n.fbox)} for n in level]
                       for level in s.levels],
        } for s in index.screens],
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n",
                          encoding="utf-8")


def load_index(path: str | Path) -> HierarchyIndex:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    screens = []
    for raw in doc["screens"]:
        screens.append(_IndexedScreen(
            id=raw["id"],
            labels={int(k): v for k, v in raw["labels"].items()},
            parents={int(k): v for k, v in raw["parents"].items()},
            levels=tuple(tuple(_LevelNode(n["node"], n["label"],
                                          tuple(n["box"])) for n in level)
                         for level in raw["levels"])))
    return HierarchyIndex(width=doc["width"], height=doc["height"],
                          screens=screens)
