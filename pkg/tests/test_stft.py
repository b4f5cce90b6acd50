"""Framing and STFT behaviour against closed-form and brute-force oracles."""

import math

import numpy as np
import pytest

from onsetbox import AudioBuffer, StftConfig, ValidationError, frame_signal, magnitude, stft
from conftest import make_spectrogram


def test_frame_count_example():
    # 1000 samples @ 1000 Hz, 100 ms window, 50 ms hop -> 20 frames of 100
    audio = AudioBuffer(np.ones(1000), 1000)
    cfg = StftConfig(window_ms=100, hop_ms=50, window_kind="rectangular")
    frames = frame_signal(audio, cfg)
    assert frames.shape == (20, 100)


def test_constant_signal_rectangular_frames_identical():
    audio = AudioBuffer(np.full(900, 0.25), 1000)
    cfg = StftConfig(window_ms=100, hop_ms=50, window_kind="rectangular")
    frames = frame_signal(audio, cfg)
    full = frames[:-1]  # final frame is zero-padded
    assert np.all(full == full[0])


def test_ramp_reconstruction_hop_equals_window():
    # oracle: concatenating hop=window rectangular frames reproduces the input
    n = 1037
    ramp = np.arange(n, dtype=float) / n
    audio = AudioBuffer(ramp, 1000)
    cfg = StftConfig(window_ms=50, hop_ms=50, window_kind="rectangular")
    frames = frame_signal(audio, cfg)
    rebuilt = frames.reshape(-1)[:n]
    np.testing.assert_array_equal(rebuilt, ramp)
    assert np.all(frames.reshape(-1)[n:] == 0)


def test_empty_audio_rejected():
    with pytest.raises(ValidationError):
        frame_signal(AudioBuffer(np.array([]), 1000), StftConfig())


def test_window_longer_than_signal_single_padded_frame():
    audio = AudioBuffer(np.ones(10), 1000)
    cfg = StftConfig(window_ms=100, hop_ms=100, window_kind="rectangular")
    frames = frame_signal(audio, cfg)
    assert frames.shape == (1, 100)
    assert np.all(frames[0, :10] == 1) and np.all(frames[0, 10:] == 0)


def test_frame_count_formula_random_triples():
    rng = np.random.default_rng(42)
    sr = 1000
    for _ in range(1000):
        n = int(rng.integers(1, 2000))
        win = int(rng.integers(2, 200))
        hop = int(rng.integers(1, win + 1))
        audio = AudioBuffer(rng.normal(size=n), sr)
        cfg = StftConfig(window_ms=win, hop_ms=hop, window_kind="rectangular")
        frames = frame_signal(audio, cfg)
        assert frames.shape == (math.ceil(n / hop), win)


def test_config_validation():
    with pytest.raises(ValidationError):
        StftConfig(window_ms=10, hop_ms=20)  # hop > window
    with pytest.raises(ValidationError):
        StftConfig(window_ms=0)
    with pytest.raises(ValidationError):
        StftConfig(window_kind="hamming")
    with pytest.raises(ValidationError):
        StftConfig(window_ms=0.5).window_samples(1000)  # under 2 samples


def test_dc_signal_concentrates_in_bin_zero():
    a = 0.37
    n, sr = 200, 1000
    audio = AudioBuffer(np.full(n, a), sr)
    cfg = StftConfig(window_ms=200, hop_ms=200, window_kind="rectangular")
    spec = stft(audio, cfg)
    mags = magnitude(spec)
    assert mags[0, 0] == pytest.approx(a * n, rel=1e-12)
    assert mags[0, 1:].max() <= 1e-9 * a * n


def test_silence_zero_magnitudes():
    audio = AudioBuffer(np.zeros(500), 1000)
    spec = stft(audio, StftConfig(window_ms=50))
    assert np.all(magnitude(spec) == 0)


def test_bin_centered_sinusoid_closed_form():
    # oracle: DFT of a*sin(2*pi*m*k/N) has magnitude a*N/2 at bin m, 0 elsewhere
    n, sr, m, a = 256, 1000, 19, 0.8
    k = np.arange(n)
    audio = AudioBuffer(a * np.sin(2 * np.pi * m * k / n), sr)
    cfg = StftConfig(window_ms=n / sr * 1000, hop_ms=n / sr * 1000, window_kind="rectangular")
    spec = stft(audio, cfg)
    mags = magnitude(spec)[0]
    assert mags[m] == pytest.approx(a * n / 2, rel=1e-6)
    others = np.delete(mags, m)
    assert others.max() <= 1e-6 * (a * n / 2)


def test_parseval_per_frame():
    # oracle: full-spectrum Parseval via numpy's complex FFT
    rng = np.random.default_rng(7)
    sr = 1000
    for _ in range(50):
        n = int(rng.integers(8, 300))
        x = rng.normal(size=4 * n)
        audio = AudioBuffer(np.clip(x, -4, 4), sr)
        cfg = StftConfig(window_ms=n, hop_ms=n)
        frames = frame_signal(audio, cfg)
        for frame in frames:
            lhs = np.sum(frame ** 2)
            rhs = np.sum(np.abs(np.fft.fft(frame)) ** 2) / frame.size
            assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-12)


def test_stft_linearity_in_amplitude():
    rng = np.random.default_rng(11)
    x = rng.normal(size=2000)
    sr = 8000
    cfg = StftConfig(window_ms=16)
    base = magnitude(stft(AudioBuffer(x, sr), cfg))
    for a in (0.5, 2.0, 7.25):
        scaled = magnitude(stft(AudioBuffer(a * x, sr), cfg))
        np.testing.assert_allclose(scaled, a * base, rtol=1e-9, atol=1e-12)


def test_frame_times_constant_step_from_zero():
    audio = AudioBuffer(np.random.default_rng(0).normal(size=5000), 8000)
    spec = stft(audio, StftConfig(window_ms=11))
    times = spec.frame_times
    assert times[0] == 0.0
    steps = np.diff(times)
    np.testing.assert_allclose(steps, spec.hop_sec, rtol=1e-12)
    assert np.all(steps > 0)


def test_magnitude_matches_recomputation():
    rng = np.random.default_rng(3)
    frames = rng.normal(size=(6, 9)) + 1j * rng.normal(size=(6, 9))
    spec = make_spectrogram(frames)
    mags = magnitude(spec)
    # direct recomputation oracle, element-wise
    np.testing.assert_allclose(mags ** 2, frames.real ** 2 + frames.imag ** 2, rtol=1e-12)
    assert magnitude(make_spectrogram(np.zeros((3, 4)))).sum() == 0
    assert magnitude(make_spectrogram([[3 + 4j]]))[0, 0] == pytest.approx(5.0, abs=1e-12)
