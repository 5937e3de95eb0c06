"""IoU and COCO-style mean average precision."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

IOU_THRESHOLDS = np.round(np.linspace(0.5, 0.95, 10), 2)
RECALL_POINTS = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class Detection:
    class_id: int
    box: tuple  # normalized (cx, cy, w, h)
    score: float

    @property
    def xyxy(self):
        cx, cy, w, h = self.box
        return (cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)


@dataclass
class MapReport:
    ap: dict  # class_id -> array of AP per IoU threshold
    thresholds: np.ndarray = field(default_factory=lambda: IOU_THRESHOLDS.copy())

    @property
    def map50(self) -> float:
        if not self.ap:
            return 0.0
        return float(np.mean([v[0] for v in self.ap.values()]))

    @property
    def map50_95(self) -> float:
        if not self.ap:
            return 0.0
        return float(np.mean([np.mean(v) for v in self.ap.values()]))

    def to_dict(self, class_names=None) -> dict:
        def name(c):
            return class_names[c] if class_names and 0 <= c < len(class_names) else str(c)

        return {
            "mAP50": self.map50,
            "mAP50_95": self.map50_95,
            "iou_thresholds": [float(t) for t in self.thresholds],
            "per_class": {name(c): {"AP50": float(v[0]), "AP50_95": float(np.mean(v)),
                                    "AP": [float(x) for x in v]}
                          for c, v in sorted(self.ap.items())},
        }

    def table(self, class_names=None) -> str:
        rows = [f"{'class':<12} {'AP50':>8} {'AP50-95':>8}"]
        for c, v in sorted(self.ap.items()):
            label = class_names[c] if class_names and 0 <= c < len(class_names) else str(c)
            rows.append(f"{label:<12} {v[0]:8.4f} {np.mean(v):8.4f}")
        rows.append(f"{'all':<12} {self.map50:8.4f} {self.map50_95:8.4f}")
        return "\n".join(rows) + "\n"


def _xyxy(box):
    cx, cy, w, h = box
    return (cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)


def iou(a, b) -> float:
    """Intersection over union of two (cx, cy, w, h) boxes; 0 for degenerate boxes."""
    return float(kernels.iou_matrix(_xyxy(a), _xyxy(b))[0, 0])


def average_precision(tp: np.ndarray, n_gt: int) -> float:
    """101-point interpolated AP from a score-ordered true-positive flag vector."""
    if n_gt == 0:
        return 0.0
    if tp.size == 0:
        return 0.0
    ctp = np.cumsum(tp)
    cfp = np.cumsum(~tp)
    recall = ctp / n_gt
    precision = ctp / (ctp + cfp)
    # precision envelope: best precision at any recall at least this large
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_POINTS, side="left")
    sampled = np.where(idx < recall.size, envelope[np.minimum(idx, recall.size - 1)], 0.0)
    return float(np.mean(sampled))


def _boxes_of(items):
    return np.array([_xyxy(getattr(i, "box", None) or (i.cx, i.cy, i.w, i.h)) for i in items],
                    dtype=np.float64).reshape(-1, 4)


def map_scores(detections, ground_truth, n_classes: int | None = None,
               thresholds=IOU_THRESHOLDS, class_agnostic: bool = False) -> MapReport:
    """mAP over per-image detection and ground-truth lists.

    Ground-truth items need ``class_id`` and ``cx, cy, w, h`` (an ``Annotation``)
    or a ``box``; detections are :class:`Detection`.  Classes absent from the
    ground truth do not contribute.
    """
    if len(detections) != len(ground_truth):
        raise ValueError("detections and ground truth cover different image sets")
    if not any(len(g) for g in ground_truth):
        raise ValueError("no ground truth boxes")
    thresholds = np.asarray(thresholds, dtype=np.float64)

    def cls(item):
        return 0 if class_agnostic else int(item.class_id)

    classes = sorted({cls(g) for gts in ground_truth for g in gts})
    if n_classes is not None:
        classes = [c for c in classes if c < n_classes]
    ap = {}
    for c in classes:
        gt_per_img = [[g for g in gts if cls(g) == c] for gts in ground_truth]
        offsets = np.zeros(len(gt_per_img) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([len(g) for g in gt_per_img])
        gt_boxes = _boxes_of([g for gts in gt_per_img for g in gts])
        dets = [(im, d) for im, ds in enumerate(detections) for d in ds if cls(d) == c]
        # stable descending sort: ties keep input order
        order = np.argsort([-d.score for _, d in dets], kind="stable")
        dets = [dets[i] for i in order]
        det_img = np.array([im for im, _ in dets], dtype=np.int64)
        det_boxes = _boxes_of([d for _, d in dets])
        tp = kernels.match_greedy(det_img, det_boxes, offsets, gt_boxes, thresholds)
        ap[c] = np.array([average_precision(tp[t], int(offsets[-1])) for t in range(len(thresholds))])
    return MapReport(ap, thresholds.copy())
