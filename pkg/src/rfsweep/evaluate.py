"""Scoring datasets: prediction files, baseline detector runs, sweep curves."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor

from .annotate import Annotation, burst_to_bbox, read_labels, write_labels
from .dataset import SPLITS, load_manifest, manifest_configs, sweep_grid
from .detection import DEFAULT_MIN_AREA, DEFAULT_THRESHOLD_DB, detect_energy
from .metrics import Detection, map_scores
from .scenario import SceneConfig, render_scene, sample_scenario
from .stft import spectrogram


def _items(manifest, split):
    if split in (None, "all"):
        return manifest["items"]
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}")
    return [it for it in manifest["items"] if it["split"] == split]


def read_predictions(pred_dir, name: str):
    annotations, scores = read_labels(os.path.join(os.fspath(pred_dir), name + ".txt"), with_scores=True)
    return [Detection(a.class_id, (a.cx, a.cy, a.w, a.h), s) for a, s in zip(annotations, scores)]


def write_predictions(pred_dir, name: str, detections) -> None:
    os.makedirs(pred_dir, exist_ok=True)
    boxes = [Annotation(d.class_id, *d.box) for d in detections]
    write_labels(boxes, os.path.join(os.fspath(pred_dir), name + ".txt"), [d.score for d in detections])


def evaluate_dirs(dataset_dir, pred_dir, split: str | None = "test", class_agnostic: bool = False):
    manifest = load_manifest(dataset_dir)
    gts, dets = [], []
    for it in _items(manifest, split):
        gts.append(read_labels(os.path.join(os.fspath(dataset_dir), it["label"])))
        dets.append(read_predictions(pred_dir, it["name"]))
    report = map_scores(dets, gts, class_agnostic=class_agnostic)
    return report, manifest


def _detect_job(args):
    scene_cfg, index, stft_cfgs, threshold_db, min_area = args
    iq, bursts = render_scene(sample_scenario(scene_cfg, index))
    gts = [burst_to_bbox(b, scene_cfg) for b in bursts]
    dets = [detect_energy(spectrogram(iq, c), threshold_db, min_area) for c in stft_cfgs]
    return gts, dets


def _map_jobs(fn, args, jobs):
    if jobs <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, args, chunksize=max(1, len(args) // (4 * jobs))))


def baseline_predictions(dataset_dir, pred_dir, split: str | None = "test", jobs: int = 1,
                         threshold_db: float = DEFAULT_THRESHOLD_DB, min_area: int = DEFAULT_MIN_AREA):
    """Run the energy detector over the dataset's scenes, rebuilt from its manifest."""
    manifest = load_manifest(dataset_dir)
    scene_cfg, stft_cfg = manifest_configs(manifest)
    items = _items(manifest, split)
    out = _map_jobs(_detect_job, [(scene_cfg, it["index"], [stft_cfg], threshold_db, min_area)
                                  for it in items], jobs)
    for it, (_, dets) in zip(items, out):
        write_predictions(pred_dir, it["name"], dets[0])
    return len(items)


def sensitivity_curve(scene_cfg: SceneConfig, n_scenes: int, kind: str = "fine_window", jobs: int = 1,
                      threshold_db: float = DEFAULT_THRESHOLD_DB, min_area: int = DEFAULT_MIN_AREA):
    """Class-agnostic baseline mAP for each config of a sweep grid on shared scenes.

    Returns a list of ``(StftConfig, MapReport)`` in grid order.
    """
    grid = sweep_grid(kind)
    out = _map_jobs(_detect_job, [(scene_cfg, i, grid.configs, threshold_db, min_area)
                                  for i in range(n_scenes)], jobs)
    gts = [g for g, _ in out]
    curve = []
    for k, cfg in enumerate(grid.configs):
        dets = [d[k] for _, d in out]
        curve.append((cfg, map_scores(dets, gts, class_agnostic=True)))
    return curve


def write_report(report, out_dir, class_names=None, extra: dict | None = None):
    os.makedirs(out_dir, exist_ok=True)
    payload = report.to_dict(class_names)
    if extra:
        payload.update(extra)
    json_path = os.path.join(out_dir, "map_report.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    txt_path = os.path.join(out_dir, "map_report.txt")
    with open(txt_path, "w", encoding="utf-8") as fh:
        fh.write(report.table(class_names))
    return json_path, txt_path
