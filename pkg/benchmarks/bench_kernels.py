"""Benchmark the numba and pure-numpy variants of each hot kernel.

Inputs are sized like one default scene: a 4096-sample burst, a 255 x 128
spectrogram, a 640 x 640 image resize and a 400-image mAP match.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from rfsweep import kernels
from rfsweep._accel import NUMBA_AVAILABLE


def _cases(rng):
    sym = rng.standard_normal(700) + 1j * rng.standard_normal(700)
    grid = rng.standard_normal((60, 52)) + 1j * rng.standard_normal((60, 52))
    freqs = np.r_[-26:0, 1:27] * 0.0025
    mask = rng.random((255, 128)) < 0.3
    img = rng.standard_normal((128, 255))
    n_img = 400
    counts = rng.integers(4, 33, size=n_img)
    offsets = np.r_[0, np.cumsum(counts)].astype(np.int64)
    xy = rng.random((offsets[-1], 2)) * 0.8
    gt = np.hstack([xy, xy + 0.05 + rng.random((offsets[-1], 2)) * 0.15])
    det_img = rng.integers(0, n_img, size=3000).astype(np.int64)
    det = gt[np.minimum(offsets[det_img] + 1, offsets[-1] - 1)] + rng.normal(0, 0.02, (3000, 4))
    thr = np.round(np.linspace(0.5, 0.95, 10), 2)
    return {
        "shape_symbols": (lambda f: f(sym, 5.6, 0.25, 8.0, 4096, 44.8), "shape_symbols"),
        "ofdm_synth": (lambda f: f(grid, freqs, 66.0, 13.2, 4096), "ofdm_synth"),
        "label_components": (lambda f: f(mask), "label_components"),
        "bilinear_resize": (lambda f: f(img, 640, 640), "bilinear_resize"),
        "match_greedy": (lambda f: f(det_img, det, offsets, gt, thr), "match_greedy"),
    }


def _time(fn, repeat):
    fn()  # warm-up (triggers numba compilation)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description="Compare numba and numpy kernel variants")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--only", help="run a single kernel by name")
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print("bench_kernels")
    print(f"numba_available={NUMBA_AVAILABLE} active_backend={kernels.BACKEND}")
    print(f"{'kernel':<18} {'numba_ms':>10} {'numpy_ms':>10} {'speedup':>8}")
    for name, (call, base) in _cases(rng).items():
        if args.only and name != args.only:
            continue
        t_np = _time(lambda: call(getattr(kernels, base + "_np")), args.repeat)
        if NUMBA_AVAILABLE:
            t_nb = _time(lambda: call(getattr(kernels, base + "_nb")), args.repeat)
            print(f"{name:<18} {t_nb * 1e3:10.3f} {t_np * 1e3:10.3f} {t_np / t_nb:8.2f}")
        else:
            print(f"{name:<18} {'-':>10} {t_np * 1e3:10.3f} {'-':>8}")


if __name__ == "__main__":
    main()
