"""Pydantic request/response models for the onset service.

Time-valued knobs are given in milliseconds to match the CLI flags; the
service converts to the core units. Paths are resolved on the host the
service runs on.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..detect import DetectorConfig


class DetectorParams(BaseModel):
    detector: Literal["hfc", "complex", "spectral_flux", "external"] = "hfc"
    frame_ms: float = Field(default=11.0, gt=0)
    hop_ms: float | None = Field(default=None, gt=0)
    window_kind: Literal["hann", "rectangular"] = "hann"
    threshold: float | None = Field(default=None, ge=0.0, le=1.0)
    min_sep_ms: float | None = Field(default=None, ge=0.0)
    local_window_frames: int = Field(default=3, ge=1)
    refine_ms: float = Field(default=0.0, ge=0.0)

    def to_config(self) -> DetectorConfig:
        return DetectorConfig(
            detector=self.detector,
            frame_ms=self.frame_ms,
            hop_ms=self.hop_ms,
            window_kind=self.window_kind,
            threshold=self.threshold,
            min_sep_sec=None if self.min_sep_ms is None else self.min_sep_ms / 1000.0,
            local_window_frames=self.local_window_frames,
            refine_sec=self.refine_ms / 1000.0,
        )


class DetectRequest(BaseModel):
    audio_path: str | None = None
    curve_path: str | None = None
    params: DetectorParams = DetectorParams()
    export_path: str | None = None


class DetectResponse(BaseModel):
    onsets_sec: list[float]
    count: int
    detector: str
    wall_clock_sec: float


class FilePairRequest(BaseModel):
    input_path: str
    annotation_path: str
    audio_path: str | None = None


class EvalRequest(BaseModel):
    root: str | None = None
    files: list[FilePairRequest] | None = None
    params: DetectorParams = DetectorParams()
    tolerance_ms: float = Field(default=50.0, gt=0)
    include_discarded: bool = False
    curve_suffix: str | None = None  # sidecar suffix for external runs over a tree
    export_path: str | None = None


class FileReportModel(BaseModel):
    input_path: str
    precision: float
    recall: float
    f1: float
    mad_ms: float
    tp: int
    fp: int
    fn: int


class EvalResponse(BaseModel):
    precision: float
    recall: float
    f1: float
    mad_ms: float
    tp: int
    fp: int
    fn: int
    wall_clock_sec: float
    files_evaluated: int
    skipped: list[str]
    per_file: list[FileReportModel]


class SweepRequest(BaseModel):
    root: str | None = None
    files: list[FilePairRequest] | None = None
    parameter: Literal["threshold", "frame_ms", "hop_ms", "min_sep_ms", "refine_ms"]
    minimum: float | None = None
    maximum: float | None = None
    num_values: int = Field(default=10, ge=2)
    values: list[float] | None = None  # explicit grid overrides min/max
    params: DetectorParams = DetectorParams()
    tolerance_ms: float = Field(default=50.0, gt=0)
    include_discarded: bool = False
    curve_suffix: str | None = None
    export_path: str | None = None


class SweepRow(BaseModel):
    value: float
    precision: float
    recall: float
    f1: float
    mad_ms: float
    tp: int
    fp: int
    fn: int


class SweepResponse(BaseModel):
    parameter: str
    rows: list[SweepRow]
    best_value: float
    selected_refine_ms: float | None = None  # set for refine_ms sweeps (1% rule)


class StatsRequest(BaseModel):
    root: str
    include_discarded: bool = True
    export_path: str | None = None


class StatsResponse(BaseModel):
    counts: dict[str, dict[str, int]]
    column_totals: dict[str, int]
    unlabeled: int
    total_utterances: int
    audio_files: int
    participants: int
    problems: list[str]


class HealthResponse(BaseModel):
    status: str
    version: str
