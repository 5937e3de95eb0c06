"""Congested-scene sampling and rendering.

A scene is ``n_timeslots`` back-to-back timeslots, each holding an independent
random set of bursts.  Everything random flows from a stateless 64-bit mix of
``(master_seed, scene_index, stream tag)`` so any scene can be rebuilt alone,
on any worker, bit for bit.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .waveforms import BurstParams, IqBuffer, ModulationScheme, SynthesisError, synthesize_burst

# stream tags for seed mixing
_TAG_LAYOUT = 1
_TAG_NOISE = 2


def mix_seed(*words: int) -> int:
    """Stateless 64-bit hash of a tuple of non-negative integers."""
    state = np.random.SeedSequence([int(w) for w in words]).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


@dataclass(frozen=True)
class SceneConfig:
    sample_rate_hz: float = 500e6
    timeslot_len: int = 4096
    n_timeslots: int = 4
    carrier_range_hz: tuple = (100e6, 400e6)
    half_bw_range_hz: tuple = (20e6, 100e6)
    duration_range: tuple = (0.2, 1.0)
    snr_range_db: tuple = (0.0, 25.0)
    emitters_per_timeslot: tuple = (1, 8)
    master_seed: int = 0

    def __post_init__(self):
        for name in ("carrier_range_hz", "half_bw_range_hz", "duration_range", "snr_range_db",
                     "emitters_per_timeslot"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: empty range ({lo}, {hi})")
            object.__setattr__(self, name, (type(lo)(lo), type(hi)(hi)))
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if self.timeslot_len < 1 or self.n_timeslots < 1:
            raise ValueError("timeslot_len and n_timeslots must be positive")
        dlo, dhi = self.duration_range
        if not 0 < dlo <= dhi <= 1:
            raise ValueError("duration_range must lie in (0, 1]")
        if self.half_bw_range_hz[0] <= 0:
            raise ValueError("half_bw_range_hz must be positive")
        if self.emitters_per_timeslot[0] < 0:
            raise ValueError("emitters_per_timeslot must be non-negative")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")

    @property
    def total_len(self) -> int:
        return self.timeslot_len * self.n_timeslots

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "SceneConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scene config keys: {sorted(unknown)}")
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})


@dataclass(frozen=True)
class EmitterBurst:
    burst: BurstParams
    timeslot_index: int
    class_id: int
    seed: int = 0

    def __post_init__(self):
        if self.class_id != int(self.burst.scheme):
            raise ValueError("class_id does not match the burst's modulation scheme")

    def to_dict(self) -> dict:
        b = self.burst
        return {
            "class_id": self.class_id,
            "timeslot_index": self.timeslot_index,
            "scheme": ModulationScheme(b.scheme).name,
            "carrier_hz": b.carrier_hz,
            "half_bw_hz": b.half_bw_hz,
            "duration_frac": b.duration_frac,
            "snr_db": b.snr_db,
            "start_offset": b.start_offset,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EmitterBurst":
        params = BurstParams(ModulationScheme[d["scheme"]], d["carrier_hz"], d["half_bw_hz"],
                             d["duration_frac"], d["snr_db"], d["start_offset"])
        return cls(params, d["timeslot_index"], d["class_id"], d["seed"])


@dataclass(frozen=True)
class SceneSpec:
    config: SceneConfig
    bursts: tuple = field(default_factory=tuple)
    scene_seed: int = 0

    def __post_init__(self):
        for eb in self.bursts:
            n = eb.burst.burst_len(self.config.timeslot_len)
            if not 0 <= eb.timeslot_index < self.config.n_timeslots:
                raise ValueError("burst timeslot outside the scene")
            if eb.burst.start_offset < 0 or eb.burst.start_offset + n > self.config.timeslot_len:
                raise ValueError("burst does not fit inside its timeslot")


def _uniform(rng, bounds):
    lo, hi = bounds
    return float(rng.uniform(lo, hi)) if hi > lo else float(lo)


def sample_scenario(config: SceneConfig, scene_index: int) -> SceneSpec:
    scene_seed = mix_seed(config.master_seed, scene_index)
    rng = np.random.default_rng(mix_seed(scene_seed, _TAG_LAYOUT))
    lo, hi = config.emitters_per_timeslot
    bursts = []
    for slot in range(config.n_timeslots):
        for _ in range(int(rng.integers(lo, hi + 1))):
            scheme = ModulationScheme(int(rng.integers(0, len(ModulationScheme))))
            carrier = _uniform(rng, config.carrier_range_hz)
            half_bw = _uniform(rng, config.half_bw_range_hz)
            duration = _uniform(rng, config.duration_range)
            snr = _uniform(rng, config.snr_range_db)
            n = int(np.floor(duration * config.timeslot_len))
            start = int(rng.integers(0, config.timeslot_len - n + 1))
            seed = int(rng.integers(0, 2**63))
            params = BurstParams(scheme, carrier, half_bw, duration, snr, start)
            bursts.append(EmitterBurst(params, slot, int(scheme), seed))
    return SceneSpec(config, tuple(bursts), scene_seed)


def render_scene(spec: SceneSpec):
    """Noise (unit power per sample) plus every burst at its scene position."""
    cfg = spec.config
    rng = np.random.default_rng(mix_seed(spec.scene_seed, _TAG_NOISE))
    n = cfg.total_len
    samples = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    for eb in spec.bursts:
        try:
            buf, (start, stop) = synthesize_burst(eb.burst, cfg.timeslot_len, cfg.sample_rate_hz, seed=eb.seed)
        except SynthesisError as exc:
            raise SynthesisError(f"burst in timeslot {eb.timeslot_index}: {exc}") from exc
        base = eb.timeslot_index * cfg.timeslot_len
        samples[base + start:base + stop] += buf.samples
    return IqBuffer(samples, cfg.sample_rate_hz), list(spec.bursts)
