from .metrics import (
    AggregateStat,
    PhaseMetrics,
    ensemble_average,
    experience_accuracy,
    mae,
    mae_at_phase_end,
    mae_last_window,
    phase_metrics,
    video_experience_accuracy,
    video_phase_scores,
)
from .report import (
    MetricsReport,
    ReportConfig,
    VideoMetrics,
    build_report,
    default_windows,
    load_report,
    report_to_dict,
    write_report,
)
from .speed import SpeedStats, measure_inference_speed
from .tracks import PredictionTrack, predict_track, track_from_outputs

__all__ = [
    "AggregateStat",
    "MetricsReport",
    "PhaseMetrics",
    "PredictionTrack",
    "ReportConfig",
    "SpeedStats",
    "VideoMetrics",
    "build_report",
    "default_windows",
    "ensemble_average",
    "experience_accuracy",
    "load_report",
    "mae",
    "mae_at_phase_end",
    "mae_last_window",
    "measure_inference_speed",
    "phase_metrics",
    "predict_track",
    "report_to_dict",
    "track_from_outputs",
    "video_experience_accuracy",
    "video_phase_scores",
    "write_report",
]
