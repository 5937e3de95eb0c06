"""Dataset characterization: bandwidth and duration ratios, time-frequency
skewness, and the square-root window-length heuristic."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Characterization:
    r_f: float
    r_t: float
    skewness: float
    w_opt: int
    bw_min_hz: float
    bw_sample_hz: float
    duration_min: float
    n_timeslots: int
    n_sample: int

    def to_dict(self) -> dict:
        return asdict(self)

    def report(self) -> str:
        return (f"r_f={self.r_f:.6g}\n"
                f"r_t={self.r_t:.6g}\n"
                f"mu_tf={self.skewness:.6g}\n"
                f"w_opt={self.w_opt}\n")


def nearest_pow2(x: float) -> int:
    """Nearest power of two in log scale; ties go up."""
    if x <= 0:
        raise ValueError("x must be positive")
    return 1 << max(0, int(math.floor(math.log2(x) + 0.5)))


def optimal_window(n_sample: int) -> int:
    """sqrt(N) rounded to a power of two.  A heuristic, not a guarantee."""
    return nearest_pow2(math.sqrt(n_sample))


def characterize(scene_cfg) -> Characterization:
    fs = float(scene_cfg.sample_rate_hz)
    if fs <= 0:
        raise ValueError("sampling bandwidth must be positive")
    bw_min = 2.0 * scene_cfg.half_bw_range_hz[0]  # double-sided
    d_min = scene_cfg.duration_range[0]
    r_f = bw_min / fs
    r_t = d_min / scene_cfg.n_timeslots
    n_sample = scene_cfg.timeslot_len * scene_cfg.n_timeslots
    return Characterization(r_f, r_t, r_t / r_f, optimal_window(n_sample), bw_min, fs, d_min,
                            scene_cfg.n_timeslots, n_sample)
