"""Framing, windowing and short-time Fourier analysis.

Analysis parameters are given in milliseconds and converted to samples
per input file, so the same configuration works across sample rates.
Frame times refer to the START of each frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ValidationError

WINDOW_KINDS = ("hann", "rectangular")


@dataclass
class AudioBuffer:
    """Mono sample sequence plus its sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValidationError("audio must be a 1-D sample sequence")
        if int(self.sample_rate) <= 0:
            raise ValidationError("sample rate must be a positive integer")
        self.sample_rate = int(self.sample_rate)
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValidationError("audio contains non-finite samples")

    @property
    def duration_sec(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class StftConfig:
    """Analysis window and hop, in milliseconds.

    hop_ms defaults to half the window (50% overlap). Millisecond values
    are rounded to the nearest whole sample at the file's rate; FFT length
    equals the window length (no padding to a power of two), so bin k sits
    at k * sample_rate / window_samples Hz.
    """

    window_ms: float = 11.0
    hop_ms: float | None = None
    window_kind: str = "hann"

    def __post_init__(self):
        if not math.isfinite(self.window_ms) or self.window_ms <= 0:
            raise ValidationError("window_ms must be a positive real")
        hop = self.resolved_hop_ms
        if not math.isfinite(hop) or hop <= 0:
            raise ValidationError("hop_ms must be a positive real")
        if hop > self.window_ms:
            raise ValidationError("hop_ms must not exceed window_ms")
        if self.window_kind not in WINDOW_KINDS:
            raise ValidationError(
                f"unknown window kind {self.window_kind!r}; expected one of {WINDOW_KINDS}"
            )

    @property
    def resolved_hop_ms(self) -> float:
        return self.window_ms / 2.0 if self.hop_ms is None else self.hop_ms

    def window_samples(self, sample_rate: int) -> int:
        n = round(self.window_ms * sample_rate / 1000.0)
        if n < 2:
            raise ValidationError(
                f"window of {self.window_ms} ms is under 2 samples at {sample_rate} Hz"
            )
        return n

    def hop_samples(self, sample_rate: int) -> int:
        n = round(self.resolved_hop_ms * sample_rate / 1000.0)
        if n < 1:
            raise ValidationError(
                f"hop of {self.resolved_hop_ms} ms is under 1 sample at {sample_rate} Hz"
            )
        return n


@dataclass
class Spectrogram:
    """Complex STFT frames, shape (num_frames, num_bins), bins 0..N/2."""

    frames: np.ndarray
    frame_times: np.ndarray
    sample_rate: int
    window_samples: int
    hop_samples: int
    config: StftConfig = field(default_factory=StftConfig)

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_bins(self) -> int:
        return self.frames.shape[1]

    @property
    def hop_sec(self) -> float:
        return self.hop_samples / self.sample_rate


def window_values(kind: str, length: int) -> np.ndarray:
    """Sample the named window function (periodic form) at `length` points."""
    if kind == "rectangular":
        return np.ones(length)
    if kind == "hann":
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(length) / length)
    raise ValidationError(f"unknown window kind {kind!r}")


def num_frames(num_samples: int, window: int, hop: int) -> int:
    """Frames covering [i*hop, i*hop + window); every frame holds >= 1 real sample."""
    return int(math.ceil(num_samples / hop))


def frame_signal(audio: AudioBuffer, cfg: StftConfig) -> np.ndarray:
    """Slice audio into windowed frames, zero-padding the final partial frame.

    Returns an array of shape (num_frames, window_samples) where frame i
    covers samples [i*hop, i*hop + window), already multiplied by the
    window function.
    """
    if audio.samples.size == 0:
        raise ValidationError("cannot frame empty audio")
    win = cfg.window_samples(audio.sample_rate)
    hop = cfg.hop_samples(audio.sample_rate)
    n = num_frames(audio.samples.size, win, hop)
    pad = (n - 1) * hop + win - audio.samples.size
    x = audio.samples
    if pad > 0:
        x = np.concatenate([x, np.zeros(pad)])
    frames = sliding_window_view(x, win)[::hop]
    return frames * window_values(cfg.window_kind, win)


def stft(audio: AudioBuffer, cfg: StftConfig) -> Spectrogram:
    """Short-time Fourier transform keeping the non-negative-frequency bins."""
    frames = frame_signal(audio, cfg)
    win = cfg.window_samples(audio.sample_rate)
    hop = cfg.hop_samples(audio.sample_rate)
    coeffs = np.fft.rfft(frames, axis=1)
    times = np.arange(frames.shape[0]) * (hop / audio.sample_rate)
    return Spectrogram(
        frames=coeffs,
        frame_times=times,
        sample_rate=audio.sample_rate,
        window_samples=win,
        hop_samples=hop,
        config=cfg,
    )


def magnitude(spec: Spectrogram) -> np.ndarray:
    """Element-wise modulus of the spectrogram, shape (num_frames, num_bins)."""
    return np.abs(spec.frames)
