"""Window library and STFT spectrogram engine.

Spectrograms are full-band (bins span [0, fs) with no shift) and stored as a
frames x fft_size dB matrix normalized to the spectrogram's own peak.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels

DEFAULT_FLOOR_DB = -80.0
DEFAULT_IMAGE_SIZE = (640, 640)


class WindowType(str, enum.Enum):
    HANN = "hann"
    GAUSSIAN = "gaussian"
    HAMMING = "hamming"
    BLACKMAN = "blackman"
    RECTANGULAR = "rectangular"
    BOHMAN = "bohman"
    TAPERED_COSINE = "tapered_cosine"
    FLAT_TOP = "flat_top"
    NUTTALL = "nuttall"


_COSINE_SUMS = {
    WindowType.HANN: (0.5, 0.5),
    WindowType.HAMMING: (0.54, 0.46),
    WindowType.BLACKMAN: (0.42, 0.5, 0.08),
    WindowType.NUTTALL: (0.3635819, 0.4891775, 0.1365995, 0.0106411),
    WindowType.FLAT_TOP: (0.21557895, 0.41663158, 0.277263158, 0.083578947, 0.006947368),
}
GAUSSIAN_SIGMA_DIVISOR = 5.0
TUKEY_RATIO = 0.5


class StftError(ValueError):
    pass


def _cosine_sum(coeffs, length):
    phase = 2.0 * np.pi * np.arange(length) / (length - 1)
    w = np.zeros(length)
    for k, a in enumerate(coeffs):
        w += (-1) ** k * a * np.cos(k * phase)
    return w


def make_window(kind, length: int) -> np.ndarray:
    """Symmetric window scaled to unit peak."""
    kind = WindowType(kind)
    if length < 2:
        raise StftError("window length must be >= 2")
    n = np.arange(length)
    if kind in _COSINE_SUMS:
        w = _cosine_sum(_COSINE_SUMS[kind], length)
        # exact endpoints for the two-term windows
        if kind is WindowType.HANN:
            w[0] = w[-1] = 0.0
    elif kind is WindowType.RECTANGULAR:
        w = np.ones(length)
    elif kind is WindowType.GAUSSIAN:
        sigma = (length - 1) / GAUSSIAN_SIGMA_DIVISOR
        w = np.exp(-0.5 * ((n - (length - 1) / 2) / sigma) ** 2)
    elif kind is WindowType.BOHMAN:
        x = np.abs(np.linspace(-1.0, 1.0, length))
        w = (1 - x) * np.cos(np.pi * x) + np.sin(np.pi * x) / np.pi
        w[0] = w[-1] = 0.0
    else:  # tapered cosine (Tukey)
        x = n / (length - 1)
        a = TUKEY_RATIO
        w = np.ones(length)
        left = x < a / 2
        right = x > 1 - a / 2
        w[left] = 0.5 * (1 + np.cos(np.pi * (2 * x[left] / a - 1)))
        w[right] = 0.5 * (1 + np.cos(np.pi * (2 * x[right] / a - 2 / a + 1)))
    # force exact mirror symmetry against cos() rounding
    w = 0.5 * (w + w[::-1])
    peak = np.max(w)
    if peak <= 1e-12:
        # e.g. Hann or flat-top at length 2: nothing left to normalize
        raise StftError(f"{kind.value} window of length {length} has no positive peak")
    return w / peak


def hop_length(window_len: int, overlap: float) -> int:
    # round half up
    return max(1, int(math.floor(window_len * (1.0 - overlap) + 0.5)))


@dataclass(frozen=True)
class StftConfig:
    window: WindowType = WindowType.HAMMING
    window_len: int = 128
    fft_size: int = 128
    overlap: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "window", WindowType(self.window))
        if self.window_len < 2:
            raise StftError("window_len must be >= 2")
        if self.fft_size < self.window_len:
            raise StftError("fft_size must be >= window_len")
        if not 0.0 <= self.overlap < 1.0:
            raise StftError("overlap must lie in [0, 1)")

    @property
    def hop(self) -> int:
        return hop_length(self.window_len, self.overlap)

    @property
    def tag(self) -> str:
        return f"W{self.window_len}F{self.fft_size}_{self.window.value}_ov{round(self.overlap * 100):02d}"

    def n_frames(self, n_samples: int) -> int:
        return (n_samples - self.window_len) // self.hop + 1

    def to_dict(self) -> dict:
        return {"window": self.window.value, "window_len": self.window_len,
                "fft_size": self.fft_size, "overlap": self.overlap}

    @classmethod
    def from_dict(cls, d: dict) -> "StftConfig":
        return cls(WindowType(d["window"]), int(d["window_len"]), int(d["fft_size"]), float(d["overlap"]))

    @classmethod
    def parse(cls, text: str) -> "StftConfig":
        """Parse ``W,F,window,overlap`` (overlap as a ratio or a percentage)."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise StftError(f"expected W,F,window,overlap; got {text!r}")
        overlap = float(parts[3].rstrip("%"))
        if parts[3].endswith("%") or overlap >= 1.0:
            overlap /= 100.0
        return cls(WindowType(parts[2].lower()), int(parts[0]), int(parts[1]), overlap)


@dataclass
class Spectrogram:
    db_matrix: np.ndarray  # frames x fft_size
    frame_times: np.ndarray
    bin_freqs: np.ndarray
    config: StftConfig
    floor_db: float = DEFAULT_FLOOR_DB
    duration_s: float | None = None
    sample_rate_hz: float = 1.0

    @property
    def shape(self):
        return self.db_matrix.shape


_CHUNK_CELLS = 1 << 22


def _framed(iq, cfg: StftConfig) -> np.ndarray:
    samples = np.asarray(getattr(iq, "samples", iq), dtype=np.complex128)
    if samples.size < cfg.window_len:
        raise StftError(f"buffer of {samples.size} samples is shorter than the window ({cfg.window_len})")
    frames = np.lib.stride_tricks.sliding_window_view(samples, cfg.window_len)[::cfg.hop]
    return frames * make_window(cfg.window, cfg.window_len)


def stft(iq, cfg: StftConfig) -> np.ndarray:
    """Complex frames x fft_size matrix; trailing partial frame dropped."""
    return np.fft.fft(_framed(iq, cfg), n=cfg.fft_size, axis=1)


def stft_magnitude(iq, cfg: StftConfig) -> np.ndarray:
    """``abs(stft(iq, cfg))`` computed a block of frames at a time."""
    framed = _framed(iq, cfg)
    out = np.empty((framed.shape[0], cfg.fft_size))
    step = max(1, _CHUNK_CELLS // cfg.fft_size)
    for lo in range(0, framed.shape[0], step):
        out[lo:lo + step] = np.abs(np.fft.fft(framed[lo:lo + step], n=cfg.fft_size, axis=1))
    return out


def to_db(frames, floor_db: float = DEFAULT_FLOOR_DB, cfg: StftConfig | None = None,
          sample_rate_hz: float = 1.0, n_samples: int | None = None) -> Spectrogram:
    mag = np.abs(np.asarray(frames))
    peak = mag.max() if mag.size else 0.0
    if peak > 0:
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(mag / peak)
        db = np.maximum(db, floor_db)
    else:
        db = np.full(mag.shape, float(floor_db))
    n_frames, n_bins = db.shape
    cfg = cfg or StftConfig(WindowType.RECTANGULAR, 2, max(2, n_bins), 0.0)
    hop = cfg.hop
    times = (np.arange(n_frames) * hop + cfg.window_len / 2) / sample_rate_hz
    freqs = np.arange(n_bins) * sample_rate_hz / n_bins
    duration = None if n_samples is None else n_samples / sample_rate_hz
    return Spectrogram(db, times, freqs, cfg, float(floor_db), duration, float(sample_rate_hz))


def spectrogram(iq, cfg: StftConfig, floor_db: float = DEFAULT_FLOOR_DB) -> Spectrogram:
    rate = float(getattr(iq, "sample_rate_hz", 1.0))
    n = len(getattr(iq, "samples", iq))
    return to_db(stft_magnitude(iq, cfg), floor_db, cfg, rate, n)


def render_image(spec: Spectrogram, out_height: int = DEFAULT_IMAGE_SIZE[0],
                 out_width: int = DEFAULT_IMAGE_SIZE[1]) -> np.ndarray:
    """8-bit grayscale image: time left to right, frequency bottom to top."""
    if out_height < 1 or out_width < 1:
        raise StftError("image dimensions must be positive")
    native = spec.db_matrix.T[::-1]  # bin 0 on the bottom row
    native = np.ascontiguousarray(native, dtype=np.float64)
    if native.shape != (out_height, out_width):
        native = kernels.bilinear_resize(native, int(out_height), int(out_width))
    scaled = (native - spec.floor_db) / (0.0 - spec.floor_db) * 255.0
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)
