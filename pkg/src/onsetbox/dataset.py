"""AVP corpus ingestion: annotation parsing, WAV decoding, tree indexing.

The published corpus is a directory tree of WAV recordings with sidecar
annotation text files (one onset per line, "time<TAB>label" or
"time,label", labels kd/sd/hhc/hho). Discarded participants live under a
"Discarded" folder and are excluded from evaluation sets by default but
counted in the content summary. Folder and file naming is matched with
configurable tokens since the release does not pin exact names.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError
from .evaluate import EvalItem
from .peaks import LABELS, OnsetList
from .stft import AudioBuffer

STATS_COLUMNS = ("personal", "fixed", "improvisation")


@dataclass
class AnnotationFile:
    onsets: OnsetList
    was_unsorted: bool = False


def parse_annotations(text: str) -> AnnotationFile:
    """Parse annotation text into a sorted, optionally labelled onset list.

    Each non-empty, non-comment line is "time<SEP>label" with SEP a tab or
    comma; the label field is optional but must be consistent across the
    file. Out-of-order input is sorted and flagged.
    """
    times: list[float] = []
    labels: list[str | None] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        sep = "\t" if "\t" in line else ("," if "," in line else None)
        parts = [p.strip() for p in line.split(sep)] if sep else [line]
        parts = [p for p in parts if p]
        if len(parts) not in (1, 2):
            raise FormatError(f"line {lineno}: expected 'time<SEP>label', got {raw!r}")
        try:
            t = float(parts[0])
        except ValueError:
            raise FormatError(f"line {lineno}: bad onset time {parts[0]!r}") from None
        if t < 0:
            raise FormatError(f"line {lineno}: negative onset time {parts[0]}")
        label = parts[1] if len(parts) == 2 else None
        if label is not None and label not in LABELS:
            raise FormatError(f"line {lineno}: unknown label {label!r}")
        times.append(t)
        labels.append(label)

    labelled = [lab is not None for lab in labels]
    if any(labelled) and not all(labelled):
        missing = labelled.index(False)
        raise FormatError(f"onset {missing + 1}: missing label in a labelled file")

    order = sorted(range(len(times)), key=lambda i: times[i])
    was_unsorted = order != list(range(len(times)))
    sorted_times = [times[i] for i in order]
    for a, b in zip(sorted_times, sorted_times[1:]):
        if a == b:
            raise FormatError(f"duplicate onset time {a}")
    sorted_labels = [labels[i] for i in order] if all(labelled) and labels else None
    onsets = OnsetList(np.asarray(sorted_times), sorted_labels)
    return AnnotationFile(onsets, was_unsorted)


def serialize_annotations(annotation: AnnotationFile) -> str:
    """Tab-separated text that parse_annotations reads back exactly."""
    lines = []
    onsets = annotation.onsets
    for i, t in enumerate(onsets.times):
        if onsets.labels is None:
            lines.append(f"{t.item()!r}")
        else:
            lines.append(f"{t.item()!r}\t{onsets.labels[i]}")
    return "\n".join(lines) + ("\n" if lines else "")


def read_audio(path) -> AudioBuffer:
    """Decode a linear-PCM WAV file (16- or 24-bit) to a mono AudioBuffer.

    Samples are scaled to [-1, 1]; stereo files are downmixed by channel
    mean; the sample rate comes from the header.
    """
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wav:
            if wav.getcomptype() != "NONE":
                raise FormatError(f"{path}: compressed WAV ({wav.getcomptype()}) is not supported")
            width = wav.getsampwidth()
            channels = wav.getnchannels()
            rate = wav.getframerate()
            n = wav.getnframes()
            data = wav.readframes(n)
    except wave.Error as exc:
        raise FormatError(f"{path}: not a readable PCM WAV file ({exc})") from None
    except EOFError:
        raise FormatError(f"{path}: truncated WAV header") from None
    if width not in (2, 3):
        raise FormatError(f"{path}: {8 * width}-bit samples unsupported (need 16- or 24-bit PCM)")
    if len(data) < n * channels * width:
        raise FormatError(f"{path}: truncated WAV data "
                          f"({len(data)} bytes for {n} frames of {channels}x{width} bytes)")
    if width == 2:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    else:
        raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3)
        as_int = (
            raw[:, 0].astype(np.int32)
            | (raw[:, 1].astype(np.int32) << 8)
            | (raw[:, 2].astype(np.int32) << 16)
        )
        as_int = np.where(as_int >= 1 << 23, as_int - (1 << 24), as_int)
        samples = as_int.astype(np.float64) / float(1 << 23)
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    return AudioBuffer(samples, rate)


@dataclass(frozen=True)
class IndexConfig:
    """Name-matching rules for walking a corpus tree."""

    audio_suffixes: tuple[str, ...] = (".wav",)
    annotation_suffixes: tuple[str, ...] = (".csv", ".txt")
    discarded_token: str = "discarded"
    personal_token: str = "personal"
    fixed_token: str = "fixed"
    improvisation_tokens: tuple[str, ...] = ("improv",)


@dataclass(frozen=True)
class DatasetFile:
    audio_path: Path
    annotation_path: Path
    participant: str
    modality: str  # personal | fixed | unknown
    kind: str  # single | improvisation
    discarded: bool


@dataclass
class DatasetIndex:
    root: Path
    files: list[DatasetFile] = field(default_factory=list)

    @property
    def participants(self) -> list[str]:
        return sorted({f.participant for f in self.files})

    def file_pairs(self, include_discarded: bool = False) -> list[EvalItem]:
        return [
            EvalItem(f.audio_path, f.annotation_path)
            for f in self.files
            if include_discarded or not f.discarded
        ]

    def validate(self) -> list[str]:
        """Structural problems relative to the published corpus shape."""
        problems = []
        if not self.files:
            problems.append("no audio files indexed")
            return problems
        participants = self.participants
        if len(participants) != 28:
            problems.append(f"expected 28 participants, found {len(participants)}")
        if len(self.files) != 280:
            problems.append(f"expected 280 audio files, found {len(self.files)}")
        unknown = sorted(str(f.audio_path) for f in self.files if f.modality == "unknown")
        if unknown:
            problems.append(f"{len(unknown)} files with undetermined modality, e.g. {unknown[0]}")
        for participant in participants:
            for modality in ("personal", "fixed"):
                count = sum(
                    1 for f in self.files
                    if f.participant == participant and f.modality == modality
                )
                if count != 5:
                    problems.append(
                        f"{participant}/{modality}: expected 5 files, found {count}"
                    )
        return problems


def _classify(rel_parts: tuple[str, ...], stem: str, cfg: IndexConfig):
    parts_lower = [p.lower() for p in rel_parts]
    discarded = any(p == cfg.discarded_token for p in parts_lower[:-1])
    haystack = parts_lower[:-1] + [stem.lower()]
    if any(cfg.personal_token in p for p in haystack):
        modality = "personal"
    elif any(cfg.fixed_token in p for p in haystack):
        modality = "fixed"
    else:
        modality = "unknown"
    kind = (
        "improvisation"
        if any(tok in stem.lower() for tok in cfg.improvisation_tokens)
        else "single"
    )
    participant_parts = [
        p for p, low in zip(rel_parts[:-1], parts_lower[:-1])
        if low != cfg.discarded_token
        and cfg.personal_token not in low
        and cfg.fixed_token not in low
    ]
    participant = "/".join(participant_parts) if participant_parts else "(root)"
    return participant, modality, kind, discarded


def build_index(root, cfg: IndexConfig = IndexConfig()) -> DatasetIndex:
    """Index every audio file under root with its annotation sidecar.

    The sidecar shares the audio file's stem with one of the configured
    annotation suffixes. Audio without a sidecar is a format error
    listing all orphans.
    """
    root = Path(root)
    if not root.is_dir():
        raise FormatError(f"{root}: not a directory")
    audio_paths = sorted(
        p for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in cfg.audio_suffixes
    )
    files = []
    orphans = []
    for audio in audio_paths:
        annotation = None
        for suffix in cfg.annotation_suffixes:
            candidate = audio.with_suffix(suffix)
            if candidate.is_file():
                annotation = candidate
                break
        if annotation is None:
            orphans.append(str(audio))
            continue
        participant, modality, kind, discarded = _classify(
            audio.relative_to(root).parts, audio.stem, cfg
        )
        files.append(DatasetFile(audio, annotation, participant, modality, kind, discarded))
    if orphans:
        raise FormatError(
            f"{len(orphans)} audio file(s) without annotations: " + ", ".join(orphans)
        )
    return DatasetIndex(root, files)


@dataclass
class DatasetStats:
    """Utterance counts per label and column (personal/fixed/improvisation)."""

    counts: dict[str, dict[str, int]]
    unlabeled: int
    files: int
    participants: int
    include_discarded: bool

    @property
    def total(self) -> int:
        return sum(sum(row.values()) for row in self.counts.values()) + self.unlabeled

    def column_totals(self) -> dict[str, int]:
        return {
            col: sum(self.counts[label][col] for label in LABELS)
            for col in STATS_COLUMNS
        }

    def to_csv_text(self) -> str:
        lines = ["label," + ",".join(STATS_COLUMNS)]
        for label in LABELS:
            row = self.counts[label]
            lines.append(label + "," + ",".join(str(row[col]) for col in STATS_COLUMNS))
        return "\n".join(lines) + "\n"


def dataset_stats(index: DatasetIndex, include_discarded: bool = True) -> DatasetStats:
    """Count labelled utterances per label and column from the annotations.

    Improvisation files (either modality) feed the improvisation column;
    single-class files feed their modality's column. The published content
    summary includes the discarded participants, so they are counted by
    default.
    """
    counts = {label: {col: 0 for col in STATS_COLUMNS} for label in LABELS}
    unlabeled = 0
    files = 0
    participants = set()
    for f in index.files:
        if f.discarded and not include_discarded:
            continue
        annotation = parse_annotations(Path(f.annotation_path).read_text(encoding="utf-8"))
        files += 1
        participants.add(f.participant)
        column = "improvisation" if f.kind == "improvisation" else f.modality
        if column not in STATS_COLUMNS:
            raise ValidationError(
                f"{f.audio_path}: cannot place file with modality {f.modality!r} in the summary"
            )
        onsets = annotation.onsets
        if onsets.labels is None:
            unlabeled += len(onsets)
            continue
        for label in onsets.labels:
            counts[label][column] += 1
    return DatasetStats(counts, unlabeled, files, len(participants), include_discarded)
