import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.signal import windows as sw

from rfsweep.stft import (StftConfig, StftError, WindowType, hop_length, make_window, render_image,
                          spectrogram, stft, stft_magnitude, to_db)

ALL = list(WindowType)

# independent definitions for each window, peak-normalized
SCIPY = {
    WindowType.HANN: lambda L: sw.hann(L, sym=True),
    WindowType.HAMMING: lambda L: sw.general_hamming(L, 0.54, sym=True),
    WindowType.BLACKMAN: lambda L: sw.blackman(L, sym=True),
    WindowType.RECTANGULAR: lambda L: sw.boxcar(L),
    WindowType.GAUSSIAN: lambda L: sw.gaussian(L, (L - 1) / 5, sym=True),
    WindowType.BOHMAN: lambda L: sw.bohman(L, sym=True),
    WindowType.TAPERED_COSINE: lambda L: sw.tukey(L, 0.5, sym=True),
    WindowType.FLAT_TOP: lambda L: sw.flattop(L, sym=True),
    WindowType.NUTTALL: lambda L: sw.nuttall(L, sym=True),
}


def test_nine_window_types():
    assert len(WindowType) == 9


@pytest.mark.parametrize("kind", ALL)
@pytest.mark.parametrize("length", [2, 3, 5, 16, 127, 128, 1024])
def test_windows_match_reference(kind, length):
    ref = SCIPY[kind](length)
    if ref.max() <= 1e-12:
        # tapered windows collapse at length 2; no unit peak exists
        with pytest.raises(StftError):
            make_window(kind, length)
        return
    np.testing.assert_allclose(make_window(kind, length), ref / ref.max(), atol=1e-12)


def test_hamming_five():
    np.testing.assert_allclose(make_window("hamming", 5), [0.08, 0.54, 1.0, 0.54, 0.08], atol=1e-12)


def test_rectangular_four():
    np.testing.assert_array_equal(make_window(WindowType.RECTANGULAR, 4), [1, 1, 1, 1])


@given(st.sampled_from(ALL), st.integers(3, 600))
def test_window_symmetry_and_peak(kind, length):
    w = make_window(kind, length)
    assert len(w) == length
    np.testing.assert_array_equal(w, w[::-1])
    assert w.max() == pytest.approx(1.0, abs=1e-12)


@given(st.integers(3, 600))
def test_hann_endpoints_zero(length):
    w = make_window(WindowType.HANN, length)
    assert w[0] == 0.0 and w[-1] == 0.0


def test_window_errors():
    with pytest.raises(StftError):
        make_window("hann", 1)
    with pytest.raises(ValueError):
        make_window("triangle", 8)


def test_hop_rounding():
    assert hop_length(128, 0.5) == 64
    assert hop_length(128, 0.3) == 90  # 89.6
    assert hop_length(8, 0.9) == 1  # 0.8 rounds to 1
    assert hop_length(2, 0.9) == 1  # 0.2 clamps to 1
    assert hop_length(10, 0.25) == 8  # 7.5 rounds half up


def test_config_parse_and_validation():
    cfg = StftConfig.parse("256,1024,blackman,30%")
    assert (cfg.window, cfg.window_len, cfg.fft_size, cfg.overlap) == (WindowType.BLACKMAN, 256, 1024, 0.3)
    assert StftConfig.parse("64, 64, hann, 0.75").overlap == 0.75
    assert StftConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(StftError):
        StftConfig(WindowType.HANN, 128, 64, 0.5)
    with pytest.raises(StftError):
        StftConfig(WindowType.HANN, 128, 128, 1.0)
    with pytest.raises(StftError):
        StftConfig.parse("128,128,hann")


def test_frame_count_example():
    x = np.zeros(16384, complex)
    assert stft(x, StftConfig(WindowType.HAMMING, 128, 128, 0.5)).shape == (255, 128)


GRID_WINDOWS = (8, 16, 32, 64, 128, 256, 1024, 4096)
GRID_OVERLAPS = tuple(k / 10 for k in range(10))


def test_frame_count_randomized():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        w = int(rng.choice(GRID_WINDOWS))
        ov = float(rng.choice(GRID_OVERLAPS))
        n = int(rng.integers(w, 3 * w + 200))
        cfg = StftConfig(WindowType.RECTANGULAR, w, w, ov)
        hop = max(1, int(np.floor(w * (1 - ov) + 0.5)))
        expected = (n - w) // hop + 1
        assert cfg.n_frames(n) == expected
        assert stft_magnitude(np.ones(n), cfg).shape[0] == expected


def test_short_buffer_rejected():
    with pytest.raises(StftError):
        stft(np.ones(100), StftConfig(WindowType.HANN, 128, 128, 0.5))


@pytest.mark.parametrize("kind", ALL)
@pytest.mark.parametrize("c", [4, 16])
def test_zero_padding_identity(rng, kind, c):
    x = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
    w = 64
    base = stft(x, StftConfig(kind, w, w, 0.5))
    padded = stft(x, StftConfig(kind, w, c * w, 0.5))
    sub = padded[:, ::c]
    scale = np.abs(base).max()
    np.testing.assert_allclose(sub, base, rtol=0, atol=1e-9 * scale)


@pytest.mark.parametrize("kind", ALL)
@pytest.mark.parametrize("mult", [1, 4])
def test_parseval(rng, kind, mult):
    w = 128
    cfg = StftConfig(kind, w, mult * w, 0.5)
    x = rng.standard_normal(2048) + 1j * rng.standard_normal(2048)
    frames = stft(x, cfg)
    win = make_window(kind, w)
    seg = np.lib.stride_tricks.sliding_window_view(x, w)[::cfg.hop] * win
    lhs = np.sum(np.abs(frames) ** 2, axis=1)
    rhs = cfg.fft_size * np.sum(np.abs(seg) ** 2, axis=1)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9)


@pytest.mark.parametrize("k", [0, 3, 17, 100])
def test_tone_argmax(k):
    f_size = 128
    n = np.arange(4096)
    x = np.exp(2j * np.pi * k * n / f_size)
    frames = stft(x, StftConfig(WindowType.RECTANGULAR, 64, f_size, 0.25))
    assert np.all(np.argmax(np.abs(frames), axis=1) == k)


def test_magnitude_matches_stft(rng):
    x = rng.standard_normal(9000) + 0j
    cfg = StftConfig(WindowType.NUTTALL, 256, 1024, 0.7)
    np.testing.assert_allclose(stft_magnitude(x, cfg), np.abs(stft(x, cfg)), atol=1e-9)


def test_to_db_examples():
    frames = np.array([[10.0, 1.0, 0.0], [5.0, 1e-9, 10.0]])
    spec = to_db(frames, -80.0)
    assert spec.db_matrix[0, 0] == 0.0
    assert spec.db_matrix[0, 1] == pytest.approx(-20.0, abs=1e-12)
    assert spec.db_matrix[0, 2] == -80.0
    assert spec.db_matrix[1, 1] == -80.0
    assert spec.db_matrix.min() >= -80 and spec.db_matrix.max() == 0
    zeros = to_db(np.zeros((3, 4)), -60.0)
    assert np.all(zeros.db_matrix == -60.0)


def test_spectrogram_axes():
    x = np.ones(16384, complex)
    cfg = StftConfig()
    spec = spectrogram(type("Iq", (), {"samples": x, "sample_rate_hz": 500e6})(), cfg)
    assert spec.db_matrix.shape == (255, 128)
    assert spec.bin_freqs[1] == pytest.approx(500e6 / 128)
    assert spec.frame_times[0] == pytest.approx(64 / 500e6)
    assert not np.any(np.isnan(spec.db_matrix))


def test_render_endpoints_and_orientation():
    db = np.full((6, 4), -80.0)  # 6 frames x 4 bins
    db[2, 0] = 0.0  # bin 0 at frame 2
    spec = to_db(10 ** (db / 20), -80.0)
    img = render_image(spec, 4, 6)
    assert img.dtype == np.uint8
    assert (img == 255).sum() == 1
    assert img[3, 2] == 255  # bin 0 sits on the bottom row
    assert img.min() == 0


def test_render_constant():
    spec = to_db(np.ones((7, 9)), -80.0)
    img = render_image(spec, 50, 33)
    assert img.shape == (50, 33)
    assert np.all(img == img[0, 0]) and img[0, 0] == 255


def test_render_linear_map():
    spec = to_db(np.ones((2, 2)), -80.0)
    spec.db_matrix[:] = -40.0
    assert np.all(render_image(spec, 2, 2) == 128)  # 127.5 rounds half up


def test_monotonicity():
    n = 16384
    for w in (16, 64, 256, 1024):
        a = StftConfig(WindowType.HAMMING, w, w, 0.5)
        b = StftConfig(WindowType.HAMMING, 2 * w, 2 * w, 0.5)
        assert abs(a.n_frames(n) - 2 * b.n_frames(n)) <= 1
        assert b.fft_size == 2 * a.fft_size
