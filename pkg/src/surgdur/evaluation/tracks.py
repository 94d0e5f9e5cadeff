"""Prediction tracks: per-frame model outputs aligned with ground truth."""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..errors import ValidationError
from ..data.types import FrameAnnotation, VideoSequence
from ..model.network import NetworkOutputs
from ..phases import ExperienceLevel


@dataclass
class PredictionTrack:
    video_id: str
    rsd_pred: np.ndarray
    phase_pred: np.ndarray
    exp_probs_pred: np.ndarray
    fps: float
    annotations: List[FrameAnnotation]

    def __post_init__(self):
        n = len(self.annotations)
        if n == 0:
            raise ValidationError(f"track {self.video_id} is empty")
        if not (len(self.rsd_pred) == len(self.phase_pred) == len(self.exp_probs_pred) == n):
            raise ValidationError(f"track {self.video_id}: field lengths differ")
        if self.fps <= 0:
            raise ValidationError(f"track {self.video_id}: fps must be > 0")

    def __len__(self) -> int:
        return len(self.annotations)

    @property
    def rsd_gt(self) -> np.ndarray:
        return np.array([a.rsd_s for a in self.annotations])

    @property
    def phase_gt(self) -> np.ndarray:
        return np.array([a.phase for a in self.annotations], dtype=np.int64)

    @property
    def experience(self) -> ExperienceLevel:
        return self.annotations[0].experience

    @property
    def total_duration_s(self) -> float:
        return self.annotations[0].elapsed_s + self.annotations[0].rsd_s


def track_from_outputs(
    video: VideoSequence, outputs: Sequence[NetworkOutputs]
) -> PredictionTrack:
    if len(outputs) != len(video):
        raise ValidationError(
            f"video {video.video_id}: {len(outputs)} outputs for {len(video)} frames"
        )
    return PredictionTrack(
        video_id=video.video_id,
        rsd_pred=np.array([o.rsd for o in outputs]),
        phase_pred=np.array([int(np.argmax(o.phase_probs)) for o in outputs]),
        exp_probs_pred=np.stack([o.experience_probs for o in outputs]),
        fps=video.fps,
        annotations=list(video.annotations),
    )


def predict_track(predictor, video: VideoSequence) -> PredictionTrack:
    """predictor is anything exposing predict_video(video) -> [NetworkOutputs]."""
    return track_from_outputs(video, predictor.predict_video(video))
