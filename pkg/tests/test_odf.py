"""Detection-function formulas checked against hand evaluation."""

import cmath
import math

import numpy as np
import pytest

from onsetbox import (
    AudioBuffer,
    FormatError,
    StftConfig,
    ValidationError,
    complex_detection_curve,
    half_wave_rectify,
    hfc,
    hfc_detection_curve,
    import_external_curve,
    load_curve,
    normalize,
    save_curve,
    spectral_flux,
    stft,
)
from onsetbox.odf import weighted_moving_average
from conftest import make_spectrogram


def test_half_wave_rectify_scalars():
    assert half_wave_rectify(3.0) == 3.0
    assert half_wave_rectify(-2.0) == 0.0
    assert half_wave_rectify(0.0) == 0.0
    np.testing.assert_array_equal(half_wave_rectify(np.array([-1.0, 2.0])), [0.0, 2.0])


def test_spectral_flux_constant_spectrogram_is_zero():
    spec = make_spectrogram(np.full((5, 3), 2.0 + 1.0j))
    assert np.all(spectral_flux(spec).values == 0)


def test_spectral_flux_hand_example():
    # magnitudes frame0=[1,2], frame1=[3,1]: SF(1) = H(2) + H(-1) = 2
    spec = make_spectrogram([[1 + 0j, 2 + 0j], [3 + 0j, 1 + 0j]])
    sf = spectral_flux(spec)
    assert sf.values[0] == 0.0
    assert sf.values[1] == pytest.approx(2.0, abs=1e-12)


def test_spectral_flux_zero_on_decaying_magnitudes():
    rng = np.random.default_rng(5)
    mags = np.sort(rng.uniform(0.1, 3.0, size=(8, 6)), axis=0)[::-1]  # non-increasing
    spec = make_spectrogram(mags.astype(complex))
    assert np.all(spectral_flux(spec).values[1:] == 0)


def test_hfc_hand_examples():
    assert hfc(make_spectrogram([[0, 0, 0, 0]])).values[0] == 0.0
    # |X| = [1,1,1,1] at bins 0..3 -> 0+1+2+3 = 6
    assert hfc(make_spectrogram([[1, 1, 1, 1]])).values[0] == pytest.approx(6.0, abs=1e-12)


def test_hfc_bin_weighting_ratio():
    # equal-amplitude sinusoids at bins 4 and 40: HFC ratio = 40/4 = 10
    n, sr, a = 128, 1000, 0.6
    k = np.arange(n)
    cfg = StftConfig(window_ms=n / sr * 1000, hop_ms=n / sr * 1000, window_kind="rectangular")
    values = {}
    for m in (4, 40):
        audio = AudioBuffer(a * np.sin(2 * np.pi * m * k / n), sr)
        values[m] = hfc(stft(audio, cfg)).values[0]
    assert values[40] / values[4] == pytest.approx(10.0, rel=1e-6)


def test_hfc_detection_silence_and_steady_tone():
    assert np.all(hfc_detection_curve(make_spectrogram(np.zeros((6, 4)))).values == 0)
    # constant HFC -> zero flux -> zero detection for n >= 1
    spec = make_spectrogram(np.tile([[1 + 1j, 2 + 0j, 0 + 3j]], (7, 1)))
    assert np.all(hfc_detection_curve(spec).values == 0)


def test_hfc_detection_peaks_at_broadband_click(clicks60):
    audio, truth = clicks60
    short = AudioBuffer(audio.samples[: audio.sample_rate], audio.sample_rate)
    spec = stft(short, StftConfig())
    curve = hfc_detection_curve(spec)
    peak_time = curve.frame_times[int(np.argmax(curve.values))]
    assert abs(peak_time - truth[0]) <= 2 * spec.hop_sec


def test_complex_requires_three_frames():
    with pytest.raises(ValidationError):
        complex_detection_curve(make_spectrogram(np.ones((2, 3), dtype=complex)))


def test_complex_hand_example():
    f0 = [1 + 0j, 0 + 1j]
    f1 = [2 + 0j, 1 + 1j]
    f2 = [0 + 2j, 3 + 0j]
    # hand evaluation of the prediction: magnitude from frame 1, phase
    # extrapolated from frames 1 and 0
    raw2 = 0.0
    for k in range(2):
        mag = abs([f0, f1, f2][1][k])
        phase = 2 * cmath.phase(f1[k]) - cmath.phase(f0[k])
        predicted = mag * cmath.exp(1j * phase)
        raw2 += abs(predicted - f2[k])
    assert raw2 == pytest.approx(math.sqrt(2) + 3, abs=1e-12)
    # triangular smoothing (window 3) applied by hand: raw = [0, 0, raw2]
    expected = [
        (2 * 0 + 1 * 0) / 3,
        (1 * 0 + 2 * 0 + 1 * raw2) / 4,
        (1 * 0 + 2 * raw2) / 3,
    ]
    curve = complex_detection_curve(make_spectrogram([f0, f1, f2]))
    np.testing.assert_allclose(curve.values, expected, atol=1e-12)


def test_complex_zero_for_steady_bin_centered_sinusoid():
    n, sr, m, a = 64, 1000, 4, 0.9
    k = np.arange(10 * n)
    audio = AudioBuffer(a * np.sin(2 * np.pi * m * k / n), sr)
    cfg = StftConfig(window_ms=n / sr * 1000, hop_ms=n / sr * 1000, window_kind="rectangular")
    spec = stft(audio, cfg)
    frame_energy = (np.abs(spec.frames[2]) ** 2).sum()
    curve = complex_detection_curve(spec)
    assert np.all(curve.values[2:] <= 1e-6 * frame_energy)


def test_complex_argmax_at_amplitude_step():
    n, sr, m = 64, 1000, 4
    step_frame = 5
    k = np.arange(10 * n)
    amp = np.where(k < step_frame * n, 0.3, 1.0)
    audio = AudioBuffer(amp * np.sin(2 * np.pi * m * k / n), sr)
    cfg = StftConfig(window_ms=n / sr * 1000, hop_ms=n / sr * 1000, window_kind="rectangular")
    curve = complex_detection_curve(stft(audio, cfg))
    assert int(np.argmax(curve.values)) == step_frame


def test_weighted_moving_average_window_one_is_identity():
    v = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
    np.testing.assert_array_equal(weighted_moving_average(v, 1), v)
    with pytest.raises(ValidationError):
        weighted_moving_average(v, 2)
    with pytest.raises(ValidationError):
        weighted_moving_average(v, 0)
    # interior point: (1*1 + 2*4 + 1*1) / 4
    assert weighted_moving_average(v, 3)[2] == pytest.approx(10 / 4)


def test_normalize_affine_and_degenerate():
    curve = import_external_curve([2.0, 4.0, 6.0], [0.0, 0.1, 0.2])
    np.testing.assert_allclose(normalize(curve).values, [0.0, 0.5, 1.0], atol=1e-15)
    flat = import_external_curve([3.0, 3.0, 3.0], [0.0, 0.1, 0.2])
    assert np.all(normalize(flat).values == 0)


def test_normalize_preserves_argmax():
    rng = np.random.default_rng(9)
    for _ in range(200):
        n = int(rng.integers(2, 50))
        values = rng.uniform(0, 10, n)
        curve = import_external_curve(values, np.arange(n) * 0.01)
        assert int(np.argmax(normalize(curve).values)) == int(np.argmax(values))


def test_import_external_validation():
    curve = import_external_curve([0.0, 1.0, 0.0], [0.0, 0.01, 0.02])
    assert curve.kind == "external"
    with pytest.raises(ValidationError):
        import_external_curve([0.0, 1.0], [0.0])
    with pytest.raises(ValidationError):
        import_external_curve([0.0, 1.0], [0.02, 0.01])


def test_curve_file_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    values = rng.uniform(0, 1, 64)
    times = np.cumsum(rng.uniform(0.001, 0.02, 64))
    curve = import_external_curve(values, times)
    path = tmp_path / "activations.txt"
    save_curve(curve, path)
    loaded = load_curve(path)
    np.testing.assert_array_equal(loaded.values, curve.values)  # bit-exact
    np.testing.assert_array_equal(loaded.frame_times, curve.frame_times)


def test_curve_file_comments_and_errors(tmp_path):
    path = tmp_path / "curve.txt"
    path.write_text("# header\n\n0.0\t0.5\n0.01\t0.75\n", encoding="utf-8")
    curve = load_curve(path)
    assert len(curve) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("0.0\t0.5\nnot-a-row\n", encoding="utf-8")
    with pytest.raises(FormatError, match="line 2"):
        load_curve(bad)
