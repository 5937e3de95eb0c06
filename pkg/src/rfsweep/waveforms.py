"""Single-burst digital modulation synthesis at the scene sample rate.

Eight schemes are supported: M-PSK (4/8/16/32), square 16QAM, cross 32QAM,
Walsh-spread QPSK and QPSK-loaded OFDM.  Single-carrier schemes are RRC shaped
at a (generally fractional) samples-per-symbol ratio chosen so that the 99%
power bandwidth equals the configured double-sided bandwidth.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard
from scipy.optimize import brentq

from . import kernels

ROLLOFF = 0.25
SPAN_SYMBOLS = 8
OCCUPIED_FRACTION = 0.99

WALSH_LEN = 8
WALSH_ROW = 1

OFDM_SUBCARRIERS = 64
OFDM_CP = 16
OFDM_LOADED = np.r_[-26:0, 1:27]


class ModulationScheme(enum.IntEnum):
    QPSK = 0
    PSK8 = 1
    PSK16 = 2
    PSK32 = 3
    QAM16 = 4
    QAM32 = 5
    CDMA_QPSK = 6
    OFDM_QPSK = 7

    @property
    def label(self) -> str:
        return CLASS_NAMES[self.value]


CLASS_NAMES = ("QPSK", "8PSK", "16PSK", "32PSK", "16QAM", "32QAM", "CDMA-QPSK", "OFDM-QPSK")

BITS_PER_SYMBOL = {
    ModulationScheme.QPSK: 2,
    ModulationScheme.PSK8: 3,
    ModulationScheme.PSK16: 4,
    ModulationScheme.PSK32: 5,
    ModulationScheme.QAM16: 4,
    ModulationScheme.QAM32: 5,
    ModulationScheme.CDMA_QPSK: 2,
    ModulationScheme.OFDM_QPSK: 2,
}


class SynthesisError(ValueError):
    """Raised for inputs that cannot be turned into a waveform."""


@dataclass(frozen=True)
class BurstParams:
    scheme: ModulationScheme
    carrier_hz: float
    half_bw_hz: float
    duration_frac: float
    snr_db: float
    start_offset: int = 0

    def burst_len(self, timeslot_len: int) -> int:
        return int(math.floor(self.duration_frac * timeslot_len))


@dataclass
class IqBuffer:
    samples: np.ndarray
    sample_rate_hz: float

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2)) if len(self.samples) else 0.0


# --------------------------------------------------------------------------
# constellations
# --------------------------------------------------------------------------

def _gray(n: int) -> np.ndarray:
    k = np.arange(n)
    return k ^ (k >> 1)


def _psk_table(m: int) -> np.ndarray:
    table = np.empty(m, dtype=np.complex128)
    table[_gray(m)] = np.exp(1j * (np.pi / m + 2 * np.pi * np.arange(m) / m))
    return table


def _pam_levels(n: int) -> np.ndarray:
    """Amplitude for each Gray label of an n-level PAM axis."""
    levels = np.empty(n)
    levels[_gray(n)] = 2 * np.arange(n) - (n - 1)
    return levels


def _qam16_table() -> np.ndarray:
    lv = _pam_levels(4)
    labels = np.arange(16)
    return (lv[labels >> 2] + 1j * lv[labels & 3]) / np.sqrt(10.0)


def _qam32_table() -> np.ndarray:
    # 8x4 Gray rectangle with the |x| = 7 columns folded onto the |y| = 5 arms
    x_lv = _pam_levels(8)
    y_lv = _pam_levels(4)
    labels = np.arange(32)
    x = x_lv[labels >> 2].copy()
    y = y_lv[labels & 3].copy()
    outer = np.abs(x) == 7
    fold_x = np.sign(x[outer]) * np.where(np.abs(y[outer]) == 3, 3.0, 1.0)
    fold_y = np.sign(y[outer]) * 5.0
    x[outer], y[outer] = fold_x, fold_y
    return (x + 1j * y) / np.sqrt(20.0)


@functools.lru_cache(maxsize=None)
def _table(scheme: ModulationScheme) -> np.ndarray:
    if scheme in (ModulationScheme.QPSK, ModulationScheme.CDMA_QPSK, ModulationScheme.OFDM_QPSK):
        return _psk_table(4)
    if scheme is ModulationScheme.PSK8:
        return _psk_table(8)
    if scheme is ModulationScheme.PSK16:
        return _psk_table(16)
    if scheme is ModulationScheme.PSK32:
        return _psk_table(32)
    if scheme is ModulationScheme.QAM16:
        return _qam16_table()
    return _qam32_table()


def constellation(scheme) -> np.ndarray:
    """Symbol table indexed by the integer label (bits read MSB first)."""
    table = _table(ModulationScheme(scheme))
    table.setflags(write=False)
    return table


def map_bits_to_symbols(bits, scheme) -> np.ndarray:
    scheme = ModulationScheme(scheme)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    k = BITS_PER_SYMBOL[scheme]
    if bits.size % k:
        raise SynthesisError(f"{bits.size} bits is not a multiple of {k} for {scheme.name}")
    if bits.size == 0:
        return np.zeros(0, dtype=np.complex128)
    if np.any((bits != 0) & (bits != 1)):
        raise SynthesisError("bits must be 0 or 1")
    labels = bits.reshape(-1, k) @ (1 << np.arange(k - 1, -1, -1))
    return constellation(scheme)[labels]


# --------------------------------------------------------------------------
# pulse shaping
# --------------------------------------------------------------------------

def rrc_taps(samples_per_symbol: int, rolloff: float = ROLLOFF, span_symbols: int = SPAN_SYMBOLS) -> np.ndarray:
    """Unit-energy RRC FIR of length ``span*sps + 1``."""
    sps = int(samples_per_symbol)
    if sps < 1:
        raise SynthesisError("samples_per_symbol must be >= 1")
    if not 0 < rolloff <= 1:
        raise SynthesisError("rolloff must lie in (0, 1]")
    m = np.arange(span_symbols * sps + 1)
    h = kernels.rrc_pulse((m - span_symbols * sps / 2) / sps, rolloff)
    return h / np.sqrt(np.sum(h ** 2))


def pulse_shape(symbols, samples_per_symbol: int, rolloff: float = ROLLOFF,
                span_symbols: int = SPAN_SYMBOLS) -> np.ndarray:
    """Impulse train of ``symbols`` (one per ``sps`` samples) through the RRC filter.

    Output length is ``len(symbols)*sps + span*sps``.
    """
    taps = rrc_taps(samples_per_symbol, rolloff, span_symbols)
    sps = int(samples_per_symbol)
    symbols = np.asarray(symbols, dtype=np.complex128)
    train = np.zeros(len(symbols) * sps, dtype=np.complex128)
    train[::sps] = symbols
    if train.size == 0:
        return np.zeros(span_symbols * sps, dtype=np.complex128)
    return np.convolve(train, taps)


def shape_fractional(symbols, samples_per_symbol: float, n_out: int, rolloff: float = ROLLOFF,
                     span_symbols: int = SPAN_SYMBOLS, start: float = 0.0) -> np.ndarray:
    """Same pulse as :func:`pulse_shape` on a non-integer symbol grid.

    Sample ``n`` of the result equals sample ``n + start`` of the integer-rate
    output whenever ``samples_per_symbol`` is integral.
    """
    sps = float(samples_per_symbol)
    if sps <= 0:
        raise SynthesisError("samples_per_symbol must be positive")
    m = np.arange(int(math.floor(span_symbols * sps + 1e-9)) + 1)
    energy = np.sum(kernels.rrc_pulse((m - span_symbols * sps / 2) / sps, rolloff) ** 2)
    out = kernels.shape_symbols(np.ascontiguousarray(symbols, dtype=np.complex128), sps,
                                float(rolloff), float(span_symbols), int(n_out), float(start))
    return out / np.sqrt(energy)


@functools.lru_cache(maxsize=None)
def rrc_occupancy(rolloff: float = ROLLOFF, fraction: float = OCCUPIED_FRACTION) -> float:
    """Width, in symbol rates, containing ``fraction`` of an RRC signal's power.

    Solved in closed form from the raised-cosine power spectrum.
    """
    tail = (1 - fraction) / 2

    def excess(u):
        return rolloff / 2 * ((1 - u) - math.sin(math.pi * u) / math.pi) - tail

    u = brentq(excess, 0.0, 1.0, xtol=1e-14)
    return (1 - rolloff) + 2 * u * rolloff


@functools.lru_cache(maxsize=None)
def ofdm_occupancy(fraction: float = OCCUPIED_FRACTION) -> float:
    """Width, in subcarrier spacings, holding ``fraction`` of the OFDM power."""
    stretch = (OFDM_SUBCARRIERS + OFDM_CP) / OFDM_SUBCARRIERS
    f = np.linspace(-400.0, 400.0, 800_001)
    psd = np.zeros_like(f)
    for k in OFDM_LOADED:
        psd += np.sinc((f - k) * stretch) ** 2
    cdf = np.cumsum(psd) / psd.sum()
    lo = f[np.searchsorted(cdf, (1 - fraction) / 2)]
    hi = f[np.searchsorted(cdf, 1 - (1 - fraction) / 2)]
    return float(hi - lo)


# --------------------------------------------------------------------------
# spreading and multicarrier
# --------------------------------------------------------------------------

def walsh_code(row: int = WALSH_ROW, length: int = WALSH_LEN) -> np.ndarray:
    return hadamard(length)[row].astype(np.float64)


def cdma_spread(symbols, code) -> np.ndarray:
    code = np.asarray(code, dtype=np.float64).ravel()
    if code.size == 0:
        raise SynthesisError("spreading code is empty")
    if code.size < 2:
        raise SynthesisError("spreading code needs at least 2 chips")
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    return (symbols[:, None] * code[None, :]).ravel()


def scrambling_code(rng, n_chips: int) -> np.ndarray:
    return 1.0 - 2.0 * rng.integers(0, 2, size=n_chips)


def cdma_despread(chips, code) -> np.ndarray:
    code = np.asarray(code, dtype=np.float64).ravel()
    return np.asarray(chips).reshape(-1, code.size) @ code / np.dot(code, code)


def ofdm_modulate(symbols, n_subcarriers: int = OFDM_SUBCARRIERS, cp_len: int = OFDM_CP) -> np.ndarray:
    """One OFDM symbol per block of ``n_subcarriers`` frequency-domain symbols.

    Block entry ``k`` modulates discrete frequency ``k / n``.  Output is scaled
    to unit mean sample power.
    """
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    if n_subcarriers < 1 or symbols.size % n_subcarriers:
        raise SynthesisError(f"{symbols.size} symbols do not fill blocks of {n_subcarriers}")
    if not 0 <= cp_len < n_subcarriers:
        raise SynthesisError("cyclic prefix must be shorter than the block")
    blocks = symbols.reshape(-1, n_subcarriers)
    body = np.fft.ifft(blocks, axis=1)
    out = np.concatenate([body[:, n_subcarriers - cp_len:], body], axis=1).ravel()
    power = np.mean(np.abs(out) ** 2) if out.size else 0.0
    return out / np.sqrt(power) if power > 0 else out


# --------------------------------------------------------------------------
# burst synthesis
# --------------------------------------------------------------------------

def symbol_period(params: BurstParams, sample_rate_hz: float) -> float:
    """Duration in samples of one data symbol (OFDM: the useful FFT interval)."""
    occupied = 2.0 * params.half_bw_hz
    if params.scheme is ModulationScheme.OFDM_QPSK:
        spacing = occupied / ofdm_occupancy()
        return sample_rate_hz / spacing
    sps = sample_rate_hz * rrc_occupancy() / occupied
    if params.scheme is ModulationScheme.CDMA_QPSK:
        return sps * WALSH_LEN
    return sps


def _random_symbols(rng, scheme, count):
    bits = rng.integers(0, 2, size=count * BITS_PER_SYMBOL[scheme])
    return map_bits_to_symbols(bits, scheme)


def baseband_waveform(params: BurstParams, n_samples: int, sample_rate_hz: float, rng) -> np.ndarray:
    """Unit-power complex baseband waveform of ``n_samples`` for ``params.scheme``."""
    scheme = ModulationScheme(params.scheme)
    occupied = 2.0 * params.half_bw_hz
    if scheme is ModulationScheme.OFDM_QPSK:
        spacing = occupied / ofdm_occupancy()
        useful = sample_rate_hz / spacing
        sym_len = useful * (OFDM_SUBCARRIERS + OFDM_CP) / OFDM_SUBCARRIERS
        cp = useful * OFDM_CP / OFDM_SUBCARRIERS
        n_sym = int(math.ceil(n_samples / sym_len)) + 1
        grid = _random_symbols(rng, scheme, n_sym * OFDM_LOADED.size).reshape(n_sym, OFDM_LOADED.size)
        freqs = OFDM_LOADED * spacing / sample_rate_hz
        wave = kernels.ofdm_synth(np.ascontiguousarray(grid), freqs.astype(np.float64), sym_len, cp, n_samples)
    else:
        sps = sample_rate_hz * rrc_occupancy() / occupied
        if scheme is ModulationScheme.CDMA_QPSK:
            n_data = int(math.ceil(n_samples / (sps * WALSH_LEN))) + SPAN_SYMBOLS + 1
            chips = cdma_spread(_random_symbols(rng, scheme, n_data), walsh_code())
            # A fixed Walsh code alone notches the spectrum at DC; a random
            # +/-1 scrambling sequence whitens the chips.
            stream = chips * scrambling_code(rng, chips.size)
        else:
            stream = _random_symbols(rng, scheme, int(math.ceil(n_samples / sps)) + SPAN_SYMBOLS + 1)
        # skip the filter ramp-up so the burst is at full power from sample 0
        wave = shape_fractional(stream, sps, n_samples, start=SPAN_SYMBOLS * sps)
    power = np.mean(np.abs(wave) ** 2)
    return wave / np.sqrt(power)


def synthesize_burst(params: BurstParams, timeslot_len: int, sample_rate_hz: float,
                     noise_psd: float | None = None, seed=None, amplitude: float = 1.0):
    """Render one burst mixed to its carrier and scaled to its in-band SNR.

    ``noise_psd`` is the receiver noise power per Hz (default: unit power per
    sample across ``sample_rate_hz``).  Returns ``(IqBuffer, (start, stop))``
    with the sample extent relative to the timeslot.
    """
    if noise_psd is None:
        noise_psd = 1.0 / sample_rate_hz
    n = params.burst_len(timeslot_len)
    if n < 1 or n < symbol_period(params, sample_rate_hz):
        raise SynthesisError(f"burst of {n} samples is shorter than one symbol period")
    if params.start_offset < 0 or params.start_offset + n > timeslot_len:
        raise SynthesisError("burst does not fit inside its timeslot")
    rng = np.random.default_rng(seed)
    wave = baseband_waveform(params, n, sample_rate_hz, rng)
    signal_power = 10.0 ** (params.snr_db / 10.0) * noise_psd * 2.0 * params.half_bw_hz
    carrier = np.exp(2j * np.pi * params.carrier_hz / sample_rate_hz * np.arange(n))
    samples = np.sqrt(signal_power) * wave * carrier
    # scale last so amplitude acts exactly linearly on the unit-amplitude burst
    samples = amplitude * samples
    return IqBuffer(samples, sample_rate_hz), (params.start_offset, params.start_offset + n)
