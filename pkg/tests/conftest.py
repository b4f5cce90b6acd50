"""Shared synthesis helpers: WAV writing, click trains, toy spectrograms,
and corpus-shaped directory trees."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np
import pytest

from onsetbox import AudioBuffer, Spectrogram, StftConfig

# Content summary of the published AVP corpus: label -> (personal, fixed,
# improvisation) utterance counts. Used to build a synthetic tree with the
# same accounting.
AVP_TABLE = {
    "kd": (799, 818, 1201),
    "sd": (813, 839, 811),
    "hhc": (799, 833, 673),
    "hho": (816, 830, 548),
}


def write_wav(path, samples, sample_rate, width=2, channels=1):
    """Write float samples in [-1, 1] as 16- or 24-bit PCM."""
    samples = np.asarray(samples, dtype=np.float64)
    if channels > 1 and samples.ndim == 1:
        samples = np.tile(samples[:, None], (1, channels))
    flat = samples.reshape(-1)
    if width == 2:
        ints = np.clip(np.rint(flat * 32768.0), -32768, 32767).astype("<i2")
        data = ints.tobytes()
    elif width == 3:
        ints = np.clip(np.rint(flat * float(1 << 23)), -(1 << 23), (1 << 23) - 1).astype(np.int64)
        ints = np.where(ints < 0, ints + (1 << 24), ints).astype(np.uint32)
        raw = np.zeros((flat.size, 3), dtype=np.uint8)
        raw[:, 0] = ints & 0xFF
        raw[:, 1] = (ints >> 8) & 0xFF
        raw[:, 2] = (ints >> 16) & 0xFF
        data = raw.tobytes()
    else:
        raise ValueError(f"unsupported width {width}")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(channels)
        fh.setsampwidth(width)
        fh.setframerate(sample_rate)
        fh.writeframes(data)
    return Path(path)


def write_annotations(path, times, labels=None, sep="\t"):
    lines = []
    for i, t in enumerate(times):
        if labels is None:
            lines.append(f"{float(t)!r}")
        else:
            lines.append(f"{float(t)!r}{sep}{labels[i]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


def make_spectrogram(frames, sample_rate=1000, hop_samples=10, window_samples=20):
    """Build a Spectrogram directly from complex frame data (for formula tests)."""
    frames = np.asarray(frames, dtype=np.complex128)
    times = np.arange(frames.shape[0]) * (hop_samples / sample_rate)
    return Spectrogram(
        frames=frames,
        frame_times=times,
        sample_rate=sample_rate,
        window_samples=window_samples,
        hop_samples=hop_samples,
        config=StftConfig(window_ms=window_samples / sample_rate * 1000.0,
                          hop_ms=hop_samples / sample_rate * 1000.0),
    )


def click_train(duration_sec=60.0, sample_rate=44100, seed=7, noise_std=0.1,
                burst_len=160, min_gap_hops=41, max_gap_hops=49):
    """Broadband clicks on a white-noise floor, aligned mid-frame so every
    click gets the same window gain. Returns (AudioBuffer, truth_times)."""
    hop = StftConfig().hop_samples(sample_rate)
    rng = np.random.default_rng(seed)
    n = int(duration_sec * sample_rate)
    x = rng.normal(0.0, noise_std, n)
    burst = rng.uniform(-1.0, 1.0, burst_len)
    truth = []
    frame = 10
    while True:
        start = frame * hop + hop // 2
        if start + burst_len >= n - sample_rate // 2:
            break
        x[start:start + burst_len] += burst
        truth.append(start / sample_rate)
        frame += int(rng.integers(min_gap_hops, max_gap_hops + 1))
    np.clip(x, -1.0, 1.0, out=x)
    return AudioBuffer(x, sample_rate), np.asarray(truth)


def double_peak_curve(duration_sec=30.0, frame_step=0.01, onset_every=0.35,
                      vowel_delay=0.12, seed=3):
    """External-style activation with a secondary (vowel-like) peak after
    every true onset. Returns (times, values, truth_times)."""
    rng = np.random.default_rng(seed)
    times = np.arange(0.0, duration_sec, frame_step)
    values = rng.uniform(0.0, 0.05, times.size)
    truth = np.arange(0.5, duration_sec - 1.0, onset_every)
    for t in truth:
        values[int(round(t / frame_step))] = 1.0
        values[int(round((t + vowel_delay) / frame_step))] = 0.9
    return times, values, truth


def distribute(total, n):
    base, extra = divmod(total, n)
    return [base + (1 if i < extra else 0) for i in range(n)]


def build_avp_tree(root, table=AVP_TABLE, participants=28, discarded=3,
                   sample_rate=8000):
    """Synthesize a corpus tree whose annotation accounting matches `table`.

    Layout: root/[Discarded/]P<i>/<modality>/<name>.{wav,csv}; the last
    `discarded` participants live under Discarded/. Audio files are short
    silence (the summary never reads them).
    """
    root = Path(root)
    labels = list(table)
    silence = np.zeros(64)
    per_label_personal = {lab: distribute(table[lab][0], participants) for lab in labels}
    per_label_fixed = {lab: distribute(table[lab][1], participants) for lab in labels}
    improv_files = 2 * participants
    per_label_improv = {lab: distribute(table[lab][2], improv_files) for lab in labels}

    for p in range(participants):
        name = f"P{p + 1:02d}"
        is_discarded = p >= participants - discarded
        base = root / "Discarded" / name if is_discarded else root / name
        for m_i, modality in enumerate(("personal", "fixed")):
            mdir = base / modality
            mdir.mkdir(parents=True, exist_ok=True)
            per_label = per_label_personal if modality == "personal" else per_label_fixed
            for lab in labels:
                count = per_label[lab][p]
                times = [0.5 + 0.25 * k for k in range(count)]
                write_wav(mdir / f"{lab}.wav", silence, sample_rate)
                write_annotations(mdir / f"{lab}.csv", times, [lab] * count, sep=",")
            improv_idx = 2 * p + m_i
            seq = []
            for lab in labels:
                seq.extend([lab] * per_label_improv[lab][improv_idx])
            times = [0.5 + 0.25 * k for k in range(len(seq))]
            write_wav(mdir / "improv.wav", silence, sample_rate)
            write_annotations(mdir / "improv.csv", times, seq, sep=",")
    return root


@pytest.fixture(scope="session")
def clicks60():
    """The 60 s click train used by the end-to-end checks (built once)."""
    return click_train()


@pytest.fixture(scope="session")
def avp_like_tree(tmp_path_factory):
    """Full-size synthetic corpus tree matching the published accounting."""
    root = tmp_path_factory.mktemp("avp_like")
    return build_avp_tree(root)
