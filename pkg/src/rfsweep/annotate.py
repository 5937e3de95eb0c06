"""Ground-truth bursts to normalized bounding boxes and label files.

Image coordinates have the origin top-left: x grows with time, y grows
downward, so higher frequencies sit nearer the top (y = 1 - f / fs).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass


class AnnotationError(ValueError):
    pass


@dataclass(frozen=True)
class Annotation:
    class_id: int
    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise AnnotationError("box must have positive width and height")

    @property
    def xyxy(self):
        return (self.cx - self.w / 2, self.cy - self.h / 2, self.cx + self.w / 2, self.cy + self.h / 2)

    @classmethod
    def from_xyxy(cls, class_id, x0, y0, x1, y1):
        return cls(int(class_id), (x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0)

    def pixel_rect(self, height: int, width: int):
        """Inclusive (row0, col0, row1, col1) covering every pixel the box touches."""
        x0, y0, x1, y1 = self.xyxy
        col0 = max(0, int(x0 * width))
        col1 = min(width - 1, max(col0, math.ceil(x1 * width) - 1))
        row0 = max(0, int(y0 * height))
        row1 = min(height - 1, max(row0, math.ceil(y1 * height) - 1))
        return row0, col0, row1, col1


def _clip01(v):
    return min(1.0, max(0.0, v))


def burst_to_bbox(burst, scene) -> Annotation:
    """Box spanning the burst's active samples and its configured double-sided bandwidth."""
    params = burst.burst
    n = params.burst_len(scene.timeslot_len)
    if n <= 0:
        raise AnnotationError("zero-length burst")
    total = scene.timeslot_len * scene.n_timeslots
    fs = scene.sample_rate_hz
    start = burst.timeslot_index * scene.timeslot_len + params.start_offset
    cx = (start + n / 2) / total
    w = n / total
    cy = 1.0 - params.carrier_hz / fs
    h = 2.0 * params.half_bw_hz / fs
    x0, x1 = _clip01(cx - w / 2), _clip01(cx + w / 2)
    y0, y1 = _clip01(cy - h / 2), _clip01(cy + h / 2)
    if x1 <= x0 or y1 <= y0:
        raise AnnotationError("box lies entirely outside the image")
    return Annotation.from_xyxy(burst.class_id, x0, y0, x1, y1)


def format_label(a: Annotation, score: float | None = None) -> str:
    line = f"{a.class_id} {a.cx:.6f} {a.cy:.6f} {a.w:.6f} {a.h:.6f}"
    if score is not None:
        line += f" {score:.6f}"
    return line


def write_labels(annotations, path, scores=None) -> None:
    lines = [format_label(a, None if scores is None else scores[i]) for i, a in enumerate(annotations)]
    text = "".join(line + "\n" for line in lines)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def parse_labels(text: str, with_scores: bool = False):
    """Inverse of :func:`write_labels`.  Returns annotations (and scores)."""
    annotations, scores = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        expected = 6 if with_scores else 5
        if len(parts) != expected:
            raise AnnotationError(f"line {lineno}: expected {expected} fields, got {len(parts)}")
        cid = int(parts[0])
        cx, cy, w, h = (float(p) for p in parts[1:5])
        annotations.append(Annotation(cid, cx, cy, w, h))
        if with_scores:
            scores.append(float(parts[5]))
    return (annotations, scores) if with_scores else annotations


def read_labels(path, with_scores: bool = False):
    if not os.path.exists(path):
        return ([], []) if with_scores else []
    with open(path, encoding="utf-8") as fh:
        return parse_labels(fh.read(), with_scores)
