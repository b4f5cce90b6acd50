"""Scoring and studies: onset matching, F1/MAD reports, parameter sweeps.

Predictions are matched one-to-one to references within a tolerance
(50 ms by default). Matching seeds a nearest-first greedy pass and then
augments it to maximum cardinality, so the true-positive count always
equals the optimum for the instance. Counts are pooled across files
(micro-average); detection wall-clock excludes file I/O.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .detect import DetectorConfig, detect_audio, detect_curve
from .errors import FormatError, ValidationError
from .odf import load_curve
from .peaks import OnsetList, select_refinement_window

DEFAULT_TOLERANCE_SEC = 0.050


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[tuple[float, float], ...]
    unmatched_refs: int
    unmatched_preds: int

    @property
    def tp(self) -> int:
        return len(self.pairs)


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    mad_sec: float
    tp: int
    fp: int
    fn: int
    wall_clock_sec: float = 0.0

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "mad_sec": self.mad_sec,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "wall_clock_sec": self.wall_clock_sec,
        }


def _times(onsets) -> np.ndarray:
    if isinstance(onsets, OnsetList):
        return onsets.times
    return np.asarray(onsets, dtype=np.float64)


def match_onsets(reference, predicted, tolerance_sec: float) -> MatchResult:
    """One-to-one matching of predictions to references within a tolerance.

    Candidate pairs are taken nearest-first (ties: earlier reference, then
    earlier prediction); an augmenting-path pass then repairs the rare
    instances where pure nearest-first greed strands a feasible pair, so
    the matching is always maximum-cardinality.
    """
    refs = _times(reference)
    preds = _times(predicted)
    if tolerance_sec <= 0:
        raise ValidationError("tolerance must be positive")

    compatible = [
        [j for j in range(preds.size) if abs(refs[i] - preds[j]) <= tolerance_sec]
        for i in range(refs.size)
    ]
    candidates = sorted(
        (abs(refs[i] - preds[j]), refs[i], preds[j], i, j)
        for i in range(refs.size)
        for j in compatible[i]
    )
    ref_of_pred: dict[int, int] = {}
    pred_of_ref: dict[int, int] = {}
    for _, _, _, i, j in candidates:
        if i not in pred_of_ref and j not in ref_of_pred:
            pred_of_ref[i] = j
            ref_of_pred[j] = i

    def try_assign(i: int, seen: set[int]) -> bool:
        for j in compatible[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in ref_of_pred or try_assign(ref_of_pred[j], seen):
                pred_of_ref[i] = j
                ref_of_pred[j] = i
                return True
        return False

    for i in range(refs.size):
        if i not in pred_of_ref and compatible[i]:
            try_assign(i, set())

    pairs = tuple(sorted((refs[i], preds[j]) for i, j in pred_of_ref.items()))
    return MatchResult(
        pairs=pairs,
        unmatched_refs=refs.size - len(pairs),
        unmatched_preds=preds.size - len(pairs),
    )


def score(match: MatchResult) -> EvalReport:
    """Precision, recall, F1 and mean absolute deviation for one matching."""
    tp, fp, fn = match.tp, match.unmatched_preds, match.unmatched_refs
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    mad = float(np.mean([abs(r - p) for r, p in match.pairs])) if match.pairs else 0.0
    return EvalReport(precision, recall, f1, mad, tp, fp, fn)


@dataclass(frozen=True)
class EvalItem:
    """One evaluable file: detector input, its annotations, optional audio.

    input_path is a WAV file for the built-in detectors or a curve file
    for the external detector (audio_path then optionally names the WAV
    so spectral-flux refinement can run).
    """

    input_path: Path
    annotation_path: Path
    audio_path: Path | None = None


@dataclass
class FileReport:
    item: EvalItem
    report: EvalReport
    deviations: list[float] = field(default_factory=list)


@dataclass
class EvalRun:
    aggregate: EvalReport
    per_file: list[FileReport]
    skipped: list[tuple[str, str]]  # (path, reason)


def _coerce_item(entry) -> EvalItem:
    if isinstance(entry, EvalItem):
        return entry
    parts = tuple(entry)
    return EvalItem(Path(parts[0]), Path(parts[1]), Path(parts[2]) if len(parts) > 2 else None)


def evaluate_detector(
    cfg: DetectorConfig,
    items: Sequence,
    tolerance_sec: float = DEFAULT_TOLERANCE_SEC,
) -> EvalRun:
    """Detect and score every file, pooling counts and deviations.

    Files whose annotations or input are missing/unreadable are recorded
    under skipped and the run continues. Wall clock covers detection and
    post-processing only.
    """
    from .dataset import parse_annotations, read_audio

    items = sorted((_coerce_item(e) for e in items), key=lambda it: str(it.input_path))
    per_file: list[FileReport] = []
    skipped: list[tuple[str, str]] = []
    tp = fp = fn = 0
    deviations: list[float] = []
    wall = 0.0
    for item in items:
        try:
            annotation = parse_annotations(
                Path(item.annotation_path).read_text(encoding="utf-8")
            )
        except (OSError, FormatError) as exc:
            skipped.append((str(item.annotation_path), f"annotation error: {exc}"))
            continue
        try:
            if cfg.detector == "external":
                curve = load_curve(item.input_path)
                audio = read_audio(item.audio_path) if item.audio_path is not None else None
                start = time.perf_counter()
                onsets = detect_curve(curve, cfg, audio)
                elapsed = time.perf_counter() - start
            else:
                audio = read_audio(item.input_path)
                start = time.perf_counter()
                onsets = detect_audio(audio, cfg)
                elapsed = time.perf_counter() - start
        except (OSError, FormatError, ValidationError) as exc:
            skipped.append((str(item.input_path), f"detection error: {exc}"))
            continue
        match = match_onsets(annotation.onsets, onsets, tolerance_sec)
        report = score(match)
        report.wall_clock_sec = elapsed
        devs = [abs(r - p) for r, p in match.pairs]
        per_file.append(FileReport(item, report, devs))
        tp += report.tp
        fp += report.fp
        fn += report.fn
        deviations.extend(devs)
        wall += elapsed

    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    mad = float(np.mean(deviations)) if deviations else 0.0
    aggregate = EvalReport(precision, recall, f1, mad, tp, fp, fn, wall)
    return EvalRun(aggregate, per_file, skipped)


@dataclass(frozen=True)
class SweepSpec:
    """Linear grid over one detector parameter, other parameters fixed."""

    parameter: str
    minimum: float
    maximum: float
    num_values: int = 10

    def __post_init__(self):
        if self.num_values < 2:
            raise ValidationError("num_values must be >= 2")
        if not self.minimum < self.maximum:
            raise ValidationError("sweep needs minimum < maximum")

    def values(self) -> list[float]:
        return list(np.linspace(self.minimum, self.maximum, self.num_values))


@dataclass
class SweepResult:
    parameter: str
    rows: list[tuple[float, EvalReport]]
    best_value: float  # argmax F1, ties to the smaller parameter value


def sweep_values(
    parameter: str,
    values: Sequence[float],
    cfg: DetectorConfig,
    items: Sequence,
    tolerance_sec: float = DEFAULT_TOLERANCE_SEC,
) -> SweepResult:
    """Evaluate the detector at each parameter value, all else fixed."""
    if not len(values):
        raise ValidationError("sweep needs at least one value")
    rows = []
    for value in values:
        run = evaluate_detector(cfg.with_param(parameter, float(value)), items, tolerance_sec)
        rows.append((float(value), run.aggregate))
    best_value = min(rows, key=lambda row: (-row[1].f1, row[0]))[0]
    return SweepResult(parameter, rows, best_value)


def sweep(
    spec: SweepSpec,
    cfg: DetectorConfig,
    items: Sequence,
    tolerance_sec: float = DEFAULT_TOLERANCE_SEC,
) -> SweepResult:
    return sweep_values(spec.parameter, spec.values(), cfg, items, tolerance_sec)


def grid_search(
    grid: dict[str, Sequence[float]],
    cfg: DetectorConfig,
    items: Sequence,
    tolerance_sec: float = DEFAULT_TOLERANCE_SEC,
) -> tuple[list[tuple[dict, EvalReport]], dict]:
    """Cartesian product over several parameters; returns rows and the
    argmax-F1 combination (ties to the lexicographically smaller values)."""
    import itertools

    names = sorted(grid)
    rows = []
    for combo in itertools.product(*(grid[name] for name in names)):
        c = cfg
        for name, value in zip(names, combo):
            c = c.with_param(name, float(value))
        run = evaluate_detector(c, items, tolerance_sec)
        rows.append((dict(zip(names, combo)), run.aggregate))
    best = min(rows, key=lambda row: (-row[1].f1, tuple(row[0][n] for n in names)))[0]
    return rows, best


def min_separation_study(
    separations_sec: Sequence[float],
    cfg: DetectorConfig,
    items: Sequence,
    tolerance_sec: float = DEFAULT_TOLERANCE_SEC,
) -> SweepResult:
    """Evaluate with each minimum-separation value; emits a plottable table."""
    return sweep_values("min_sep_sec", list(separations_sec), cfg, items, tolerance_sec)


@dataclass
class RefinementStudy:
    rows: list[tuple[float, EvalReport]]
    baseline: EvalReport
    selected_window_sec: float


def refinement_study(
    windows_sec: Sequence[float],
    cfg: DetectorConfig,
    items: Sequence,
    tolerance_sec: float = DEFAULT_TOLERANCE_SEC,
) -> RefinementStudy:
    """Sweep refinement windows and pick one by the 1%-of-F1 rule.

    The baseline is the unrefined run; a window qualifies if its F1 stays
    at or above 99% of the baseline, and the qualifier with the smallest
    mean deviation wins.
    """
    baseline = evaluate_detector(cfg.with_param("refine_sec", 0.0), items, tolerance_sec).aggregate
    result = sweep_values("refine_sec", list(windows_sec), cfg, items, tolerance_sec)
    selected = select_refinement_window(
        [(value, report.f1, report.mad_sec) for value, report in result.rows],
        baseline.f1,
    )
    return RefinementStudy(result.rows, baseline, selected)


def export_run(path, cfg: DetectorConfig, run: EvalRun, tolerance_sec: float) -> None:
    """Write one JSON object describing the run: config, per-file and
    aggregate reports, and any skipped files."""
    payload = {
        "config": {
            "detector": cfg.detector,
            "frame_ms": cfg.frame_ms,
            "hop_ms": cfg.stft_config().resolved_hop_ms,
            "window_kind": cfg.window_kind,
            "threshold": cfg.resolved_threshold(),
            "min_sep_sec": cfg.resolved_min_sep_sec(),
            "local_window_frames": cfg.local_window_frames,
            "refine_sec": cfg.refine_sec,
            "tolerance_sec": tolerance_sec,
        },
        "files": [
            {"input": str(fr.item.input_path), "annotations": str(fr.item.annotation_path),
             **fr.report.as_dict()}
            for fr in run.per_file
        ],
        "skipped": [{"path": p, "reason": r} for p, r in run.skipped],
        "aggregate": run.aggregate.as_dict(),
    }
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def export_sweep_csv(path, result: SweepResult) -> None:
    """Write a sweep table as comma-separated values for plotting."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([result.parameter, "precision", "recall", "f1", "mad_ms",
                         "tp", "fp", "fn", "wall_clock_sec"])
        for value, report in result.rows:
            writer.writerow([value, report.precision, report.recall, report.f1,
                             report.mad_sec * 1000.0, report.tp, report.fp, report.fn,
                             report.wall_clock_sec])
