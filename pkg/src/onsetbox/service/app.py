"""FastAPI service exposing detection, evaluation, sweeps and stats.

Errors carry a category so clients can distinguish bad parameters
("validation", HTTP 400) from unreadable files ("format", HTTP 415;
"not_found", HTTP 404).

Run with:  uvicorn onsetbox.service.app:app
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..dataset import build_index, dataset_stats
from ..detect import detect_file
from ..errors import FormatError, ValidationError
from ..evaluate import (
    EvalItem,
    evaluate_detector,
    export_run,
    export_sweep_csv,
    refinement_study,
    sweep_values,
)
from . import schemas


def _eval_items(req) -> list[EvalItem]:
    """Resolve the request's file set: explicit pairs or an indexed tree."""
    if (req.root is None) == (req.files is None):
        raise ValidationError("provide exactly one of 'root' or 'files'")
    if req.files is not None:
        return [
            EvalItem(Path(f.input_path), Path(f.annotation_path),
                     None if f.audio_path is None else Path(f.audio_path))
            for f in req.files
        ]
    index = build_index(req.root)
    items = index.file_pairs(include_discarded=req.include_discarded)
    if req.params.detector == "external":
        if req.curve_suffix is None:
            raise ValidationError("external runs over a tree need curve_suffix")
        items = [
            EvalItem(item.input_path.with_suffix(req.curve_suffix),
                     item.annotation_path, item.input_path)
            for item in items
        ]
    return items


def _sweep_grid(req: schemas.SweepRequest) -> tuple[str, list[float]]:
    """Translate the request's parameter name/grid to core units."""
    ms_to_sec = {"min_sep_ms": "min_sep_sec", "refine_ms": "refine_sec"}
    if req.values is not None:
        values = [float(v) for v in req.values]
    else:
        if req.minimum is None or req.maximum is None:
            raise ValidationError("sweep needs either explicit values or minimum/maximum")
        if not req.minimum < req.maximum:
            raise ValidationError("sweep needs minimum < maximum")
        import numpy as np

        values = list(np.linspace(req.minimum, req.maximum, req.num_values))
    if req.parameter in ms_to_sec:
        return ms_to_sec[req.parameter], [v / 1000.0 for v in values]
    return req.parameter, values


def create_app() -> FastAPI:
    app = FastAPI(title="onsetbox", version=__version__)

    @app.exception_handler(ValidationError)
    def _validation(request: Request, exc: ValidationError):
        return JSONResponse(status_code=400,
                            content={"detail": str(exc), "category": "validation"})

    @app.exception_handler(FormatError)
    def _format(request: Request, exc: FormatError):
        return JSONResponse(status_code=415,
                            content={"detail": str(exc), "category": "format"})

    @app.exception_handler(FileNotFoundError)
    def _missing(request: Request, exc: FileNotFoundError):
        return JSONResponse(status_code=404,
                            content={"detail": str(exc), "category": "not_found"})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/detect", response_model=schemas.DetectResponse)
    def detect(req: schemas.DetectRequest):
        cfg = req.params.to_config()
        if cfg.detector == "external":
            if req.curve_path is None:
                raise ValidationError("external detector requires curve_path")
            onsets, elapsed = detect_file(cfg, req.curve_path, req.audio_path)
        else:
            if req.audio_path is None:
                raise ValidationError("audio_path is required")
            onsets, elapsed = detect_file(cfg, req.audio_path)
        times = [float(t) for t in onsets.times]
        if req.export_path is not None:
            Path(req.export_path).write_text(
                "".join(f"{t:.6f}\n" for t in times), encoding="utf-8"
            )
        return schemas.DetectResponse(
            onsets_sec=times, count=len(times),
            detector=cfg.detector, wall_clock_sec=elapsed,
        )

    @app.post("/eval", response_model=schemas.EvalResponse)
    def evaluate(req: schemas.EvalRequest):
        cfg = req.params.to_config()
        items = _eval_items(req)
        tolerance = req.tolerance_ms / 1000.0
        run = evaluate_detector(cfg, items, tolerance)
        if not run.per_file:
            detail = "; ".join(reason for _, reason in run.skipped) or "no files to evaluate"
            raise ValidationError(f"no files evaluated: {detail}")
        if req.export_path is not None:
            export_run(req.export_path, cfg, run, tolerance)
        agg = run.aggregate
        return schemas.EvalResponse(
            precision=agg.precision, recall=agg.recall, f1=agg.f1,
            mad_ms=agg.mad_sec * 1000.0, tp=agg.tp, fp=agg.fp, fn=agg.fn,
            wall_clock_sec=agg.wall_clock_sec,
            files_evaluated=len(run.per_file),
            skipped=[f"{path}: {reason}" for path, reason in run.skipped],
            per_file=[
                schemas.FileReportModel(
                    input_path=str(fr.item.input_path),
                    precision=fr.report.precision, recall=fr.report.recall,
                    f1=fr.report.f1, mad_ms=fr.report.mad_sec * 1000.0,
                    tp=fr.report.tp, fp=fr.report.fp, fn=fr.report.fn,
                )
                for fr in run.per_file
            ],
        )

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep_endpoint(req: schemas.SweepRequest):
        cfg = req.params.to_config()
        items = _eval_items(req)
        tolerance = req.tolerance_ms / 1000.0
        core_param, values = _sweep_grid(req)
        selected_refine_ms = None
        if core_param == "refine_sec":
            study = refinement_study(values, cfg, items, tolerance)
            rows = study.rows
            best = min(rows, key=lambda row: (-row[1].f1, row[0]))[0]
            result_rows, best_value = rows, best
            selected_refine_ms = study.selected_window_sec * 1000.0
        else:
            result = sweep_values(core_param, values, cfg, items, tolerance)
            result_rows, best_value = result.rows, result.best_value
        scale = 1000.0 if core_param in ("min_sep_sec", "refine_sec") else 1.0
        if req.export_path is not None:
            from ..evaluate import SweepResult

            export_sweep_csv(req.export_path,
                             SweepResult(req.parameter,
                                         [(v * scale, r) for v, r in result_rows],
                                         best_value * scale))
        return schemas.SweepResponse(
            parameter=req.parameter,
            rows=[
                schemas.SweepRow(
                    value=value * scale,
                    precision=report.precision, recall=report.recall, f1=report.f1,
                    mad_ms=report.mad_sec * 1000.0,
                    tp=report.tp, fp=report.fp, fn=report.fn,
                )
                for value, report in result_rows
            ],
            best_value=best_value * scale,
            selected_refine_ms=selected_refine_ms,
        )

    @app.post("/stats", response_model=schemas.StatsResponse)
    def stats(req: schemas.StatsRequest):
        index = build_index(req.root)
        result = dataset_stats(index, include_discarded=req.include_discarded)
        if req.export_path is not None:
            Path(req.export_path).write_text(result.to_csv_text(), encoding="utf-8")
        return schemas.StatsResponse(
            counts=result.counts,
            column_totals=result.column_totals(),
            unlabeled=result.unlabeled,
            total_utterances=result.total,
            audio_files=result.files,
            participants=result.participants,
            problems=index.validate(),
        )

    return app


app = create_app()
