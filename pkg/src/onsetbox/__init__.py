"""Onset detection toolkit for vocal percussion.

Core DSP (STFT, detection functions, peak picking), an evaluation harness
(F1 at tolerance, deviation, sweeps), ingestion for the AVP corpus, a
FastAPI service wrapping it all, and a CLI thin client.
"""

__version__ = "0.1.0"

from .dataset import (
    AnnotationFile,
    DatasetIndex,
    IndexConfig,
    build_index,
    dataset_stats,
    parse_annotations,
    read_audio,
    serialize_annotations,
)
from .detect import DetectorConfig, detect_audio, detect_curve, detect_file
from .errors import FormatError, ValidationError
from .evaluate import (
    EvalItem,
    EvalReport,
    MatchResult,
    SweepSpec,
    evaluate_detector,
    grid_search,
    match_onsets,
    min_separation_study,
    refinement_study,
    score,
    sweep,
)
from .odf import (
    OnsetCurve,
    complex_detection_curve,
    half_wave_rectify,
    hfc,
    hfc_detection_curve,
    import_external_curve,
    load_curve,
    normalize,
    save_curve,
    spectral_flux,
)
from .peaks import (
    OnsetList,
    PeakConfig,
    min_separation_filter,
    pick_peaks,
    refine_onsets,
    select_refinement_window,
)
from .stft import AudioBuffer, Spectrogram, StftConfig, frame_signal, magnitude, stft

__all__ = [
    "AnnotationFile",
    "AudioBuffer",
    "DatasetIndex",
    "DetectorConfig",
    "EvalItem",
    "EvalReport",
    "FormatError",
    "IndexConfig",
    "MatchResult",
    "OnsetCurve",
    "OnsetList",
    "PeakConfig",
    "Spectrogram",
    "StftConfig",
    "SweepSpec",
    "ValidationError",
    "build_index",
    "complex_detection_curve",
    "dataset_stats",
    "detect_audio",
    "detect_curve",
    "detect_file",
    "evaluate_detector",
    "frame_signal",
    "grid_search",
    "half_wave_rectify",
    "hfc",
    "hfc_detection_curve",
    "import_external_curve",
    "load_curve",
    "magnitude",
    "match_onsets",
    "min_separation_filter",
    "min_separation_study",
    "normalize",
    "parse_annotations",
    "pick_peaks",
    "read_audio",
    "refine_onsets",
    "refinement_study",
    "save_curve",
    "score",
    "select_refinement_window",
    "serialize_annotations",
    "spectral_flux",
    "stft",
    "sweep",
]
