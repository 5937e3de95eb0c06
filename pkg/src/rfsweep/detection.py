"""Classical energy detector: threshold, 8-connected components, boxes.

Stands in for a learned detector so STFT sweeps can be scored end to end.
It is class-agnostic; every detection carries ``class_id = 0``.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .metrics import Detection

# Frozen by the Monte-Carlo false-alarm calibration in tests/test_detection.py.
DEFAULT_THRESHOLD_DB = -20.0
DEFAULT_MIN_AREA = 16
DEFAULT_NOISE_MARGIN_DB = 6.0
NOISE_QUANTILE = 0.10


def noise_floor_db(spec) -> float:
    """Mean noise-cell level estimated from a low quantile of cell powers.

    Noise-only STFT cells have exponentially distributed power, so the
    q-quantile sits at ``-ln(1 - q)`` times the mean.
    """
    q = float(np.quantile(spec.db_matrix, NOISE_QUANTILE))
    return q - 10.0 * math.log10(-math.log1p(-NOISE_QUANTILE))


def component_boxes(labels: np.ndarray, count: int):
    """Inclusive (row0, col0, row1, col1) and cell count for labels 1..count."""
    rows, cols = np.nonzero(labels)
    ids = labels[rows, cols] - 1
    r0 = np.full(count, np.iinfo(np.int64).max)
    c0 = np.full(count, np.iinfo(np.int64).max)
    r1 = np.full(count, -1)
    c1 = np.full(count, -1)
    np.minimum.at(r0, ids, rows)
    np.minimum.at(c0, ids, cols)
    np.maximum.at(r1, ids, rows)
    np.maximum.at(c1, ids, cols)
    area = np.bincount(ids, minlength=count)
    return np.stack([r0, c0, r1, c1], axis=1), area


def _frame_extent(spec, m0, m1):
    """Normalized time span covered by frames m0..m1 (each owning one hop around its centre)."""
    cfg = spec.config
    fs = spec.sample_rate_hz
    half_hop = cfg.hop / 2.0 / fs
    if spec.duration_s:
        total = spec.duration_s
    else:
        total = spec.frame_times[-1] + cfg.window_len / 2.0 / fs
    t0 = spec.frame_times[m0] - half_hop
    t1 = spec.frame_times[m1] + half_hop
    return max(0.0, t0 / total), min(1.0, t1 / total)


def detect_energy(spec, threshold_db: float = DEFAULT_THRESHOLD_DB, min_area: int = DEFAULT_MIN_AREA,
                  noise_margin_db: float | None = DEFAULT_NOISE_MARGIN_DB):
    """Detections from connected regions of cells above threshold.

    A cell is active when it is within ``threshold_db`` of the peak and, unless
    ``noise_margin_db`` is None, at least ``noise_margin_db`` above the
    estimated noise floor.  Score is the mean dB excess over the effective
    threshold, normalized by the threshold's depth below the peak.
    """
    db = spec.db_matrix
    if not spec.floor_db < threshold_db < 0:
        raise ValueError("threshold_db must lie between the floor and 0 dB")
    level = threshold_db
    if noise_margin_db is not None:
        level = max(level, noise_floor_db(spec) + noise_margin_db)
    level = min(level, -1e-9)
    mask = db >= level
    labels, count = kernels.label_components(np.ascontiguousarray(mask))
    if count == 0:
        return []
    boxes, area = component_boxes(labels, count)
    excess = np.bincount(labels[mask] - 1, weights=db[mask] - level, minlength=count)
    n_bins = db.shape[1]
    out = []
    for k in np.flatnonzero(area >= min_area):
        m0, b0, m1, b1 = boxes[k]
        x0, x1 = _frame_extent(spec, m0, m1)
        # cell b spans (b - 1/2, b + 1/2) bins; frequency grows toward y = 0
        y0 = max(0.0, 1.0 - (b1 + 0.5) / n_bins)
        y1 = min(1.0, 1.0 - (b0 - 0.5) / n_bins)
        if x1 <= x0 or y1 <= y0:
            continue
        score = float(np.clip(excess[k] / area[k] / -level, 0.0, 1.0))
        out.append(Detection(0, ((x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0), score))
    return out
