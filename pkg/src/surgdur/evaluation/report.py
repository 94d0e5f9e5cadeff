"""Report assembly: per-video metrics, experience-level groupings and
JSON/CSV serialization.

report.json schema:
  {unit, notes, groups: {all|senior|assistant:
      {mae|mae5|mae2|mae_hyd: {mean, std, n, excluded_ids}} or
      {omitted: true, n_videos: 0}},
   phase: {f1_macro, f1_hyd, acc}, experience_acc, speed}
report.csv holds the flat per-video rows the aggregates are computed from.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from ..errors import DatasetIOError, ValidationError
from ..phases import HYDRODISSECTION, ExperienceLevel
from .metrics import (
    mae,
    mae_at_phase_end,
    mae_last_window,
    video_experience_accuracy,
    video_phase_scores,
)
from .speed import SpeedStats
from .tracks import PredictionTrack


def default_windows(unit: str) -> Dict[str, float]:
    """MAE-5 / MAE-2 windows expressed in the dataset's time unit."""
    if unit in ("min", "minute", "minutes"):
        return {"mae5": 5.0, "mae2": 2.0}
    if unit in ("s", "sec", "second", "seconds"):
        return {"mae5": 300.0, "mae2": 120.0}
    return {"mae5": 5.0, "mae2": 2.0}


@dataclass
class ReportConfig:
    unit: str = "s"
    mae5_window: Optional[float] = None
    mae2_window: Optional[float] = None
    hyd_phase: int = HYDRODISSECTION

    def __post_init__(self):
        windows = default_windows(self.unit)
        if self.mae5_window is None:
            self.mae5_window = windows["mae5"]
        if self.mae2_window is None:
            self.mae2_window = windows["mae2"]


@dataclass
class VideoMetrics:
    video_id: str
    experience: str
    duration: float
    n_frames: int
    mae: float
    mae5: float
    mae2: float
    mae_hyd: Optional[float]
    acc: float
    f1_macro: float
    f1_hyd: Optional[float]
    exp_acc: float
    mae5_all_frames: bool
    mae2_all_frames: bool


@dataclass
class MetricsReport:
    unit: str
    videos: List[VideoMetrics]
    speed: Optional[SpeedStats] = None
    notes: Dict[str, object] = field(default_factory=dict)

    def group(self, experience: Optional[str]) -> List[VideoMetrics]:
        if experience is None:
            return self.videos
        return [v for v in self.videos if v.experience == experience]


def build_report(
    tracks: Sequence[PredictionTrack],
    speed_stats: Optional[SpeedStats] = None,
    config: Optional[ReportConfig] = None,
) -> MetricsReport:
    if not tracks:
        raise ValidationError("no tracks to report on")
    config = config or ReportConfig()
    videos = []
    for track in tracks:
        acc, f1_macro, f1_hyd = video_phase_scores(track)
        duration = track.total_duration_s
        videos.append(
            VideoMetrics(
                video_id=track.video_id,
                experience=track.experience.label,
                duration=duration,
                n_frames=len(track),
                mae=mae(track),
                mae5=mae_last_window(track, config.mae5_window),
                mae2=mae_last_window(track, config.mae2_window),
                mae_hyd=mae_at_phase_end(track, config.hyd_phase),
                acc=acc,
                f1_macro=f1_macro,
                f1_hyd=f1_hyd,
                exp_acc=video_experience_accuracy(track),
                mae5_all_frames=duration < config.mae5_window,
                mae2_all_frames=duration < config.mae2_window,
            )
        )
    notes = {
        "rsd_clipped_at_zero": True,
        "window_anchoring": "ground_truth_rsd",
        "argmax_ties": "lowest_index",
        "experience_accuracy": "per_frame_argmax_then_per_video_mean",
        "windows": {"mae5": config.mae5_window, "mae2": config.mae2_window},
    }
    return MetricsReport(unit=config.unit, videos=videos, speed=speed_stats, notes=notes)


def _stat_block(values: List[float], excluded_ids: List[str]) -> dict:
    if not values:
        return {"mean": None, "std": None, "n": 0, "excluded_ids": excluded_ids}
    return {
        "mean": float(np.mean(values)),
        "std": float(np.std(values)),
        "n": len(values),
        "excluded_ids": excluded_ids,
    }


def _group_block(videos: List[VideoMetrics]) -> dict:
    if not videos:
        return {"omitted": True, "n_videos": 0}
    block = {}
    for metric in ("mae", "mae5", "mae2"):
        block[metric] = _stat_block([getattr(v, metric) for v in videos], [])
    with_hyd = [v for v in videos if v.mae_hyd is not None]
    block["mae_hyd"] = _stat_block(
        [v.mae_hyd for v in with_hyd],
        [v.video_id for v in videos if v.mae_hyd is None],
    )
    return block


def report_to_dict(report: MetricsReport) -> dict:
    groups = {}
    for name, level in (("all", None), ("senior", "senior"), ("assistant", "assistant")):
        groups[name] = _group_block(report.group(level))
    with_f1_hyd = [v for v in report.videos if v.f1_hyd is not None]
    phase_block = {
        "f1_macro": _stat_block([v.f1_macro for v in report.videos], []),
        "f1_hyd": _stat_block(
            [v.f1_hyd for v in with_f1_hyd],
            [v.video_id for v in report.videos if v.f1_hyd is None],
        ),
        "acc": _stat_block([v.acc for v in report.videos], []),
    }
    return {
        "unit": report.unit,
        "notes": report.notes,
        "groups": groups,
        "phase": phase_block,
        "experience_acc": _stat_block([v.exp_acc for v in report.videos], []),
        "speed": report.speed.to_dict() if report.speed else None,
    }


CSV_COLUMNS = [
    "video_id",
    "experience",
    "duration",
    "n_frames",
    "mae",
    "mae5",
    "mae2",
    "mae_hyd",
    "acc",
    "f1_macro",
    "f1_hyd",
    "exp_acc",
    "mae5_all_frames",
    "mae2_all_frames",
]


def write_report(
    report: MetricsReport,
    json_path: Union[str, Path],
    csv_path: Optional[Union[str, Path]] = None,
) -> dict:
    """Serialize the report; returns the JSON payload dict."""
    json_path = Path(json_path)
    if csv_path is None:
        csv_path = json_path.with_suffix(".csv")
    payload = report_to_dict(report)
    try:
        with open(json_path, "w") as fh:
            json.dump(payload, fh, indent=2)
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for v in report.videos:
                writer.writerow(
                    [
                        v.video_id,
                        v.experience,
                        repr(v.duration),
                        v.n_frames,
                        repr(v.mae),
                        repr(v.mae5),
                        repr(v.mae2),
                        "" if v.mae_hyd is None else repr(v.mae_hyd),
                        repr(v.acc),
                        repr(v.f1_macro),
                        "" if v.f1_hyd is None else repr(v.f1_hyd),
                        repr(v.exp_acc),
                        int(v.mae5_all_frames),
                        int(v.mae2_all_frames),
                    ]
                )
    except OSError as err:
        raise DatasetIOError(f"failed writing report to {json_path}: {err}") from err
    return payload


def load_report(path: Union[str, Path]) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as err:
        raise DatasetIOError(f"failed reading report {path}: {err}") from err
