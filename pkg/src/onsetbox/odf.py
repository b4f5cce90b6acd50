"""Onset detection functions over a spectrogram.

Three detectors are provided: spectral flux (positive magnitude change
summed over bins), a high-frequency-content detector (HFC flux weighted
by energy-normalised HFC), and a complex-domain detector (deviation from
a magnitude/phase prediction extrapolated from the two previous frames).
Curves from external systems can be imported from plain-text files and
run through the same post-processing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ValidationError
from .stft import Spectrogram

CURVE_KINDS = ("spectral_flux", "hfc", "complex", "external")

# guards division by frame energy on silence
ENERGY_EPS = 1e-12


@dataclass
class OnsetCurve:
    """Per-frame detection values aligned to frame start times."""

    values: np.ndarray
    frame_times: np.ndarray
    kind: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.frame_times = np.asarray(self.frame_times, dtype=np.float64)
        if self.values.shape != self.frame_times.shape or self.values.ndim != 1:
            raise ValidationError("curve values and frame times must be parallel 1-D arrays")
        if self.kind not in CURVE_KINDS:
            raise ValidationError(f"unknown curve kind {self.kind!r}")
        if self.values.size and not np.all(np.isfinite(self.values)):
            raise ValidationError("curve contains non-finite values")
        if self.values.size > 1 and not np.all(np.diff(self.frame_times) > 0):
            raise ValidationError("frame times must be strictly increasing")

    def __len__(self) -> int:
        return self.values.size


def half_wave_rectify(x):
    """H(x) = (x + |x|) / 2, i.e. max(x, 0). Accepts scalars or arrays."""
    return (x + np.abs(x)) / 2.0


def spectral_flux(spec: Spectrogram) -> OnsetCurve:
    """Sum of positive per-bin magnitude increases between adjacent frames.

    The first frame has no predecessor and gets value 0.
    """
    if spec.num_frames < 1:
        raise ValidationError("spectral flux needs at least one frame")
    mags = np.abs(spec.frames)
    values = np.zeros(spec.num_frames)
    if spec.num_frames > 1:
        values[1:] = half_wave_rectify(np.diff(mags, axis=0)).sum(axis=1)
    return OnsetCurve(values, spec.frame_times, "spectral_flux")


def hfc(spec: Spectrogram) -> OnsetCurve:
    """Per-frame high-frequency content: sum of bin magnitudes times bin index.

    Bin indices count from 0, so the DC bin never contributes.
    """
    if spec.num_frames < 1:
        raise ValidationError("hfc needs at least one frame")
    mags = np.abs(spec.frames)
    weights = np.arange(spec.num_bins, dtype=np.float64)
    return OnsetCurve(mags @ weights, spec.frame_times, "hfc")


def hfc_detection_curve(spec: Spectrogram) -> OnsetCurve:
    """HFC-based detection function.

    Combines the positive inter-frame HFC difference with the current
    frame's HFC normalised by frame energy:

        D(n) = H(HFC(n) - HFC(n-1)) * HFC(n) / max(E(n), eps)

    with E(n) the sum of squared bin magnitudes. D(0) = 0.
    """
    if spec.num_frames < 2:
        raise ValidationError("hfc detection needs at least two frames")
    mags = np.abs(spec.frames)
    weights = np.arange(spec.num_bins, dtype=np.float64)
    h = mags @ weights
    energy = (mags * mags).sum(axis=1)
    values = np.zeros(spec.num_frames)
    values[1:] = half_wave_rectify(np.diff(h)) * h[1:] / np.maximum(energy[1:], ENERGY_EPS)
    return OnsetCurve(values, spec.frame_times, "hfc")


def wrap_phase(theta):
    """Wrap angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(theta), 2.0 * np.pi)


def weighted_moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Triangular weighted moving average over an odd, centred window.

    Weights are 1..(h+1)..1 for window 2h+1; at the edges the window is
    truncated and the remaining weights renormalised.
    """
    if window < 1 or window % 2 == 0:
        raise ValidationError("smoothing window must be a positive odd integer")
    values = np.asarray(values, dtype=np.float64)
    if window == 1 or values.size == 0:
        return values.copy()
    h = window // 2
    weights = np.concatenate([np.arange(1, h + 2), np.arange(h, 0, -1)]).astype(np.float64)
    num = np.convolve(values, weights, mode="same")
    den = np.convolve(np.ones_like(values), weights, mode="same")
    return num / den


def complex_detection_curve(spec: Spectrogram, smooth_window: int = 3) -> OnsetCurve:
    """Complex-domain detection function.

    Each frame is compared against a prediction whose magnitude repeats
    the previous frame and whose phase extrapolates linearly from the two
    previous frames (2*phi(n-1) - phi(n-2), wrapped to (-pi, pi]):

        CD(n) = sum_k |Xhat(n,k) - X(n,k)|,   CD(0) = CD(1) = 0

    The raw curve is smoothed with a triangular weighted moving average
    (default window 3 frames).
    """
    if spec.num_frames < 3:
        raise ValidationError("complex detection needs at least three frames")
    mags = np.abs(spec.frames)
    phases = np.angle(spec.frames)
    predicted_phase = wrap_phase(2.0 * phases[1:-1] - phases[:-2])
    predicted = mags[1:-1] * np.exp(1j * predicted_phase)
    raw = np.zeros(spec.num_frames)
    raw[2:] = np.abs(spec.frames[2:] - predicted).sum(axis=1)
    return OnsetCurve(weighted_moving_average(raw, smooth_window), spec.frame_times, "complex")


def normalize(curve: OnsetCurve) -> OnsetCurve:
    """Affine rescale to [0, 1]; an identically-constant curve maps to zeros."""
    v = curve.values
    if v.size == 0:
        return OnsetCurve(v.copy(), curve.frame_times, curve.kind)
    lo = v.min()
    span = v.max() - lo
    if span == 0.0:
        out = np.zeros_like(v)
    else:
        out = (v - lo) / span
    return OnsetCurve(out, curve.frame_times, curve.kind)


def import_external_curve(values, frame_times) -> OnsetCurve:
    """Wrap externally computed activations as an onset curve of kind 'external'."""
    values = np.asarray(values, dtype=np.float64)
    frame_times = np.asarray(frame_times, dtype=np.float64)
    if values.shape != frame_times.shape:
        raise ValidationError(
            f"curve length mismatch: {values.size} values vs {frame_times.size} times"
        )
    return OnsetCurve(values, frame_times, "external")


def load_curve(path) -> OnsetCurve:
    """Read an activation curve from a text file.

    Format: one "time_sec<TAB>value" pair per line, UTF-8; blank lines and
    '#' comment lines are ignored.
    """
    times, values = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FormatError(f"{path}: line {lineno}: expected 'time<TAB>value', got {line!r}")
            try:
                times.append(float(parts[0]))
                values.append(float(parts[1]))
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
    try:
        return import_external_curve(values, times)
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from None


def save_curve(curve: OnsetCurve, path) -> None:
    """Write a curve in the text format read back by load_curve.

    Values are written with repr so a round trip is bit-exact.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for t, v in zip(curve.frame_times, curve.values):
            fh.write(f"{t.item()!r}\t{v.item()!r}\n")
