"""Comparison and ablation configurations.

Each variant fixes where the elapsed time enters the network, which heads
the encoder pretraining uses, and which terms the sequence loss keeps. All
network variants share the same encoder and training harness so comparisons
isolate the mechanism, not backbone capacity.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError
from .data.types import VideoSequence
from .model.config import ElapsedMode, ModelConfig, desk_model_config
from .training.schedule import TrainingSchedule, desk_schedule


class VariantId(str, Enum):
    CATANET = "catanet"
    ABL_PHASE_ONLY = "i"
    ABL_EXP_ONLY = "ii"
    ABL_RSD_ONLY = "iii"
    ABL_ELAPSED_AFTER = "iv"
    RSDNET = "rsdnet"
    TIMELSTM = "timelstm"
    NAIVE_MEAN = "naive"

    @classmethod
    def parse(cls, value: str) -> "VariantId":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValidationError(
                f"unknown variant {value!r}; choose from "
                f"{[v.value for v in cls]}"
            ) from None


@dataclass
class VariantSpec:
    variant_id: VariantId
    elapsed_mode: ElapsedMode
    cnn_terms: Tuple[str, ...]
    rnn_terms: Tuple[str, ...]
    trains_network: bool = True


_VARIANTS = {
    VariantId.CATANET: VariantSpec(
        VariantId.CATANET, ElapsedMode.INPUT_CHANNEL, ("phase", "exp"), ("rsd", "phase", "exp")
    ),
    VariantId.ABL_PHASE_ONLY: VariantSpec(
        VariantId.ABL_PHASE_ONLY, ElapsedMode.INPUT_CHANNEL, ("phase",), ("rsd", "phase")
    ),
    VariantId.ABL_EXP_ONLY: VariantSpec(
        VariantId.ABL_EXP_ONLY, ElapsedMode.INPUT_CHANNEL, ("exp",), ("rsd", "exp")
    ),
    VariantId.ABL_RSD_ONLY: VariantSpec(
        VariantId.ABL_RSD_ONLY, ElapsedMode.INPUT_CHANNEL, ("rsd",), ("rsd",)
    ),
    VariantId.ABL_ELAPSED_AFTER: VariantSpec(
        VariantId.ABL_ELAPSED_AFTER, ElapsedMode.AFTER_RNN, ("rsd",), ("rsd",)
    ),
    VariantId.RSDNET: VariantSpec(
        VariantId.RSDNET, ElapsedMode.AFTER_RNN, ("progress",), ("rsd",)
    ),
    VariantId.TIMELSTM: VariantSpec(
        VariantId.TIMELSTM, ElapsedMode.NONE, ("phase",), ("rsd",)
    ),
    VariantId.NAIVE_MEAN: VariantSpec(
        VariantId.NAIVE_MEAN, ElapsedMode.NONE, (), (), trains_network=False
    ),
}


def variant_spec(variant_id: VariantId) -> VariantSpec:
    if variant_id not in _VARIANTS:
        raise ValidationError(f"unknown variant id: {variant_id}")
    return _VARIANTS[variant_id]


def build_variant(
    variant_id,
    base_config: Optional[ModelConfig] = None,
    base_schedule: Optional[TrainingSchedule] = None,
) -> Tuple[Optional[ModelConfig], Optional[TrainingSchedule]]:
    """Derive the (ModelConfig, TrainingSchedule) pair for a variant from
    desk-scale defaults. The naive baseline has no network: (None, None)."""
    if isinstance(variant_id, str):
        variant_id = VariantId.parse(variant_id)
    spec = variant_spec(variant_id)
    if not spec.trains_network:
        return None, None
    config = base_config if base_config is not None else desk_model_config()
    schedule = base_schedule if base_schedule is not None else desk_schedule()
    config = ModelConfig.from_dict({**config.to_dict(), "elapsed_mode": spec.elapsed_mode.value})
    schedule = TrainingSchedule.from_dict(
        {**schedule.to_dict(), "cnn_terms": list(spec.cnn_terms), "rnn_terms": list(spec.rnn_terms)}
    )
    return config, schedule


def progress_labels(video: VideoSequence) -> np.ndarray:
    """Per-frame surgery progress in [0, 1]: elapsed / total duration."""
    total = video.total_duration_s
    if total <= 0:
        raise ValidationError(f"video {video.video_id} has zero duration")
    return video.elapsed_times / total


class NaiveMeanPredictor:
    """Predicts max(mean training duration - elapsed, 0); the acceptance
    floor every trained model must beat."""

    def __init__(self, mean_duration_s: float):
        self.mean_duration_s = float(mean_duration_s)

    def __call__(self, elapsed_s: float) -> float:
        return max(self.mean_duration_s - elapsed_s, 0.0)


def naive_mean_predictor(train_videos: Sequence[VideoSequence]) -> NaiveMeanPredictor:
    if not train_videos:
        raise ValidationError("naive predictor needs a non-empty training set")
    durations = [v.total_duration_s for v in train_videos]
    return NaiveMeanPredictor(float(np.mean(durations)))


def naive_track_predictions(
    predictor: NaiveMeanPredictor, videos: Sequence[VideoSequence]
) -> List[np.ndarray]:
    return [
        np.array([predictor(a.elapsed_s) for a in video.annotations]) for video in videos
    ]
