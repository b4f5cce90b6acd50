"""Turn onset curves into onset times.

Peak picking is threshold + strict local maximum; post-filters implement
a greedy minimum onset separation and spectral-flux refinement of onset
locations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .odf import OnsetCurve

LABELS = ("kd", "sd", "hhc", "hho")


@dataclass(frozen=True)
class PeakConfig:
    threshold: float = 0.8
    min_separation_sec: float = 0.0
    local_window_frames: int = 3

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValidationError("threshold must lie in [0, 1]")
        if self.min_separation_sec < 0:
            raise ValidationError("min_separation_sec must be >= 0")
        if self.local_window_frames < 1 or self.local_window_frames % 2 == 0:
            raise ValidationError("local_window_frames must be a positive odd integer")


@dataclass
class OnsetList:
    """Strictly increasing onset times in seconds, optionally labelled."""

    times: np.ndarray
    labels: list[str] | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        if self.times.ndim != 1:
            raise ValidationError("onset times must be a 1-D sequence")
        if self.times.size and (not np.all(np.isfinite(self.times)) or self.times.min() < 0):
            raise ValidationError("onset times must be finite and >= 0")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValidationError("onset times must be strictly increasing")
        if self.labels is not None:
            self.labels = list(self.labels)
            if len(self.labels) != self.times.size:
                raise ValidationError("labels must parallel onset times")

    def __len__(self) -> int:
        return self.times.size


def pick_peaks(curve: OnsetCurve, cfg: PeakConfig) -> OnsetList:
    """Select frames that are at/above threshold and a strict local maximum.

    A frame wins over equal-valued later frames in its window (ties break
    toward the earlier frame); onset time is the frame's start time. The
    minimum-separation filter is applied afterwards when enabled.
    """
    v = curve.values
    if v.size and (v.min() < -1e-9 or v.max() > 1.0 + 1e-9):
        raise ValidationError("pick_peaks expects a normalized curve (values in [0, 1])")
    half = (cfg.local_window_frames - 1) // 2
    kept = []
    for n in np.flatnonzero(v >= cfg.threshold):
        left = v[max(0, n - half):n]
        right = v[n + 1:n + 1 + half]
        if (left.size == 0 or v[n] > left.max()) and (right.size == 0 or v[n] >= right.max()):
            kept.append(n)
    onsets = OnsetList(curve.frame_times[kept])
    if cfg.min_separation_sec > 0:
        onsets = min_separation_filter(onsets, cfg.min_separation_sec)
    return onsets


def min_separation_filter(onsets: OnsetList, min_sep_sec: float) -> OnsetList:
    """Greedy left-to-right filter: drop onsets closer than min_sep_sec
    to the last kept onset. Labels follow their onsets."""
    if min_sep_sec < 0:
        raise ValidationError("min_sep_sec must be >= 0")
    if min_sep_sec == 0 or len(onsets) <= 1:
        return OnsetList(onsets.times.copy(), None if onsets.labels is None else list(onsets.labels))
    keep = [0]
    last = onsets.times[0]
    for i in range(1, len(onsets)):
        if onsets.times[i] - last >= min_sep_sec:
            keep.append(i)
            last = onsets.times[i]
    labels = None if onsets.labels is None else [onsets.labels[i] for i in keep]
    return OnsetList(onsets.times[keep], labels)


def refine_onsets(onsets: OnsetList, sf: OnsetCurve, window_sec: float) -> OnsetList:
    """Move each onset to the spectral-flux maximum within a centred window.

    Ties go to the earliest frame; a window with no frames leaves the
    onset in place; window_sec = 0 is the identity. Exact duplicates
    created by the move collapse to one onset (first label wins).
    """
    if window_sec < 0:
        raise ValidationError("window_sec must be >= 0")
    if window_sec == 0 or len(onsets) == 0:
        return OnsetList(onsets.times.copy(), None if onsets.labels is None else list(onsets.labels))
    half = window_sec / 2.0
    times = sf.frame_times
    moved = []
    for i, t in enumerate(onsets.times):
        lo = np.searchsorted(times, t - half, side="left")
        hi = np.searchsorted(times, t + half, side="right")
        if hi > lo:
            t = times[lo + int(np.argmax(sf.values[lo:hi]))]
        moved.append((t, None if onsets.labels is None else onsets.labels[i]))
    moved.sort(key=lambda pair: pair[0])
    out_times, out_labels = [], []
    for t, lab in moved:
        if out_times and t == out_times[-1]:
            continue
        out_times.append(t)
        out_labels.append(lab)
    labels = None if onsets.labels is None else out_labels
    return OnsetList(np.asarray(out_times), labels)


def select_refinement_window(
    rows: Sequence[tuple[float, float, float]], baseline_f1: float
) -> float:
    """Pick the refinement window from measured (window_sec, f1, mad_sec) rows.

    Qualifying rows keep at least 99% of the unrefined F1; among those the
    window with the smallest mean deviation wins (ties to the smaller
    window). With no qualifier, refinement is disabled (returns 0).
    """
    if not rows:
        raise ValidationError("no candidate windows given")
    best = None
    for window_sec, f1, mad_sec in rows:
        if f1 < 0.99 * baseline_f1:
            continue
        key = (mad_sec, window_sec)
        if best is None or key < best[0]:
            best = (key, window_sec)
    return 0.0 if best is None else best[1]
