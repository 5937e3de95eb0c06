"""Command-line entry point: generate, sweep, characterize, evaluate, preview.

Every flag may also be given in a TOML config file (``--config``); flags win.
Scene-generator settings live under a ``[scene]`` table using the
``SceneConfig`` field names.  The default worker count comes from
``RFSWEEP_JOBS``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .annotate import burst_to_bbox
from .charmetrics import characterize
from .dataset import (PAPER_SPLIT, SWEEP_ALIASES, DatasetError, build_dataset, build_sweep,
                      load_manifest, write_png)
from .scenario import SceneConfig, render_scene, sample_scenario
from .stft import DEFAULT_FLOOR_DB, DEFAULT_IMAGE_SIZE, StftConfig, render_image, spectrogram
from .waveforms import CLASS_NAMES

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DEFAULTS = {
    "scenes": 4000,
    "split": None,
    "seed": 0,
    "stft": "128,128,hamming,0.5",
    "sweep": "window",
    "out": None,
    "jobs": None,
    "image_size": "{},{}".format(*DEFAULT_IMAGE_SIZE),
    "floor_db": DEFAULT_FLOOR_DB,
    "index": 0,
    "split_name": "test",
}


class CliError(Exception):
    pass


def _int_list(text, n=None, what="value"):
    if isinstance(text, (list, tuple)):
        vals = [int(v) for v in text]
    else:
        try:
            vals = [int(v) for v in str(text).split(",")]
        except ValueError as exc:
            raise CliError(f"bad {what}: {text!r}") from exc
    if n is not None and len(vals) != n:
        raise CliError(f"{what} needs {n} comma-separated integers, got {text!r}")
    return vals


def default_split(n_scenes: int):
    """70/20/10 split, matching 2800/800/400 at 4000 scenes."""
    if n_scenes == sum(PAPER_SPLIT):
        return PAPER_SPLIT
    val = round(n_scenes * 0.2)
    test = round(n_scenes * 0.1)
    return (n_scenes - val - test, val, test)


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc


def resolve(args) -> dict:
    """Merge built-in defaults < config file < command-line flags."""
    file_cfg = _load_config(getattr(args, "config", None))
    resolved = dict(DEFAULTS)
    scene_overrides = file_cfg.pop("scene", {})
    unknown = set(file_cfg) - set(DEFAULTS)
    if unknown:
        raise CliError(f"unknown config keys: {sorted(unknown)}")
    resolved.update(file_cfg)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            resolved[key] = val
    if resolved["jobs"] is None:
        resolved["jobs"] = int(os.environ.get("RFSWEEP_JOBS", "1"))
    resolved["jobs"] = max(1, int(resolved["jobs"]))
    resolved["scenes"] = int(resolved["scenes"])
    if resolved["scenes"] < 1:
        raise CliError("--scenes must be positive")
    if resolved["split"] is None:
        resolved["split"] = list(default_split(resolved["scenes"]))
    else:
        resolved["split"] = _int_list(resolved["split"], 3, "split")
    resolved["image_size"] = _int_list(resolved["image_size"], 2, "image size")
    try:
        scene = SceneConfig.from_dict(dict(scene_overrides, master_seed=int(resolved["seed"])))
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid scene config: {exc}") from exc
    resolved["scene"] = scene.to_dict()
    return resolved


def _scene(resolved) -> SceneConfig:
    return SceneConfig.from_dict(resolved["scene"])


def _stft(resolved) -> StftConfig:
    try:
        return StftConfig.parse(resolved["stft"])
    except ValueError as exc:
        raise CliError(f"invalid --stft: {exc}") from exc


def _require_out(resolved):
    if not resolved["out"]:
        raise CliError("--out is required")
    return resolved["out"]


def cmd_generate(args):
    r = resolve(args)
    out = _require_out(r)
    manifest = build_dataset(_scene(r), _stft(r), r["scenes"], r["split"], out, r["jobs"],
                             tuple(r["image_size"]), float(r["floor_db"]), run_config=_echo(r, "generate"))
    print(f"wrote {manifest['n_scenes']} scenes to {out} "
          f"(train/val/test = {'/'.join(str(manifest['split'][s]) for s in ('train', 'val', 'test'))})")
    return 0


def cmd_sweep(args):
    r = resolve(args)
    out = _require_out(r)
    kind = r["sweep"]
    if kind not in SWEEP_ALIASES and kind not in SWEEP_ALIASES.values():
        raise CliError(f"unknown sweep kind {kind!r}; choose from {sorted(SWEEP_ALIASES)}")
    grid, manifests = build_sweep(_scene(r), kind, r["scenes"], r["split"], out, r["jobs"],
                                  tuple(r["image_size"]), float(r["floor_db"]), run_config=_echo(r, "sweep"))
    for cfg in grid.configs:
        print(os.path.join(out, cfg.tag))
    return 0


def cmd_characterize(args):
    r = resolve(args)
    ch = characterize(_scene(r))
    sys.stdout.write(ch.report())
    return 0


def cmd_evaluate(args):
    from .evaluate import baseline_predictions, evaluate_dirs, write_report

    r = resolve(args)
    dataset = args.dataset
    load_manifest(dataset)
    split = r["split_name"]
    pred = args.pred
    agnostic = args.class_agnostic
    if pred is None:
        pred = os.path.join(dataset, "baseline_pred")
        baseline_predictions(dataset, pred, split, r["jobs"])
        agnostic = True
    report, manifest = evaluate_dirs(dataset, pred, split, agnostic)
    names = None if agnostic else manifest.get("class_names")
    out = r["out"] or os.path.join(dataset, "eval")
    write_report(report, out, names, {"split": split, "class_agnostic": agnostic,
                                      "predictions": os.path.abspath(pred)})
    sys.stdout.write(report.table(names))
    return 0


def _class_colour(cid):
    palette = [(230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
               (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230)]
    return palette[cid % len(palette)]


def cmd_preview(args):
    from PIL import Image, ImageDraw

    r = resolve(args)
    out = _require_out(r)
    scene = _scene(r)
    cfg = _stft(r)
    h, w = r["image_size"]
    iq, bursts = render_scene(sample_scenario(scene, int(r["index"])))
    gray = render_image(spectrogram(iq, cfg, float(r["floor_db"])), h, w)
    img = Image.fromarray(np.repeat(gray[:, :, None], 3, axis=2), mode="RGB")
    draw = ImageDraw.Draw(img)
    for b in bursts:
        a = burst_to_bbox(b, scene)
        x0, y0, x1, y1 = a.xyxy
        colour = _class_colour(a.class_id)
        draw.rectangle([x0 * w, y0 * h, x1 * w - 1, y1 * h - 1], outline=colour, width=2)
        draw.text((x0 * w + 3, y0 * h + 2), CLASS_NAMES[a.class_id], fill=colour)
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    img.save(out, format="PNG")
    if args.gray:
        write_png(os.path.splitext(out)[0] + "_gray.png", gray)
    print(f"{out}: {len(bursts)} bursts, {cfg.tag}")
    return 0


def _echo(resolved, command) -> dict:
    keep = {k: v for k, v in resolved.items() if k not in ("jobs", "out", "index", "split_name")}
    keep["command"] = command
    return json.loads(json.dumps(keep))


def _common(p, *, dataset_flags=False):
    p.add_argument("--config", help="TOML file mirroring the command-line flags")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--jobs", type=int, help="worker processes (default $RFSWEEP_JOBS or 1)")
    if dataset_flags:
        p.add_argument("--scenes", type=int, help="number of scenes (default 4000)")
        p.add_argument("--split", help="train,val,test counts (default 70/20/10)")
        p.add_argument("--image-size", dest="image_size", help="H,W of output images (default 640,640)")
        p.add_argument("--floor-db", dest="floor_db", type=float, help="dB floor (default -80)")
        p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfsweep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build one dataset")
    _common(p, dataset_flags=True)
    p.add_argument("--stft", help="W,F,window,overlap (default 128,128,hamming,0.5)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", help="build one dataset per sweep-grid entry")
    _common(p, dataset_flags=True)
    p.add_argument("--sweep", "--kind", dest="sweep",
                   choices=sorted(set(SWEEP_ALIASES) | set(SWEEP_ALIASES.values())),
                   help="grid to enumerate (default window)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("characterize", help="print r_f, r_t, mu_tf and w_opt for a scene config")
    _common(p)
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("evaluate", help="score predictions (or the baseline detector) with mAP")
    _common(p)
    p.add_argument("--dataset", required=True, help="dataset directory with manifest.json")
    p.add_argument("--pred", help="prediction label directory; omitted -> run the baseline detector")
    p.add_argument("--split", dest="split_name", choices=["train", "val", "test", "all"],
                   help="split to score (default test)")
    p.add_argument("--class-agnostic", action="store_true", help="collapse all classes")
    p.add_argument("--out", help="report directory (default DATASET/eval)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("preview", help="render one annotated spectrogram")
    _common(p)
    p.add_argument("--index", type=int, help="scene index (default 0)")
    p.add_argument("--stft", help="W,F,window,overlap")
    p.add_argument("--image-size", dest="image_size", help="H,W")
    p.add_argument("--floor-db", dest="floor_db", type=float)
    p.add_argument("--out", help="output PNG path")
    p.add_argument("--gray", action="store_true", help="also write the unannotated grayscale image")
    p.set_defaults(func=cmd_preview)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, DatasetError, ValueError, OSError) as exc:
        print(f"rfsweep {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
