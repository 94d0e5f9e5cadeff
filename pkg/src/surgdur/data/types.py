"""Core dataset containers: per-frame annotations, video sequences, generator
specs and train/test splits."""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import ValidationError
from ..phases import N_PHASES, ExperienceLevel


@dataclass(frozen=True)
class FrameAnnotation:
    """Ground truth for a single frame.

    elapsed_s + rsd_s is constant over a video (the total duration) and
    rsd_s never increases along the sequence.
    """

    frame_index: int
    elapsed_s: float
    phase: int
    rsd_s: float
    experience: ExperienceLevel

    def __post_init__(self):
        if self.frame_index < 0:
            raise ValidationError(f"frame_index must be >= 0, got {self.frame_index}")
        if self.elapsed_s < 0 or self.rsd_s < 0:
            raise ValidationError(
                f"negative time in annotation: elapsed={self.elapsed_s}, rsd={self.rsd_s}"
            )
        if not 0 <= self.phase < N_PHASES:
            raise ValidationError(f"phase index out of range: {self.phase}")

    @property
    def total_duration_s(self) -> float:
        return self.elapsed_s + self.rsd_s


@dataclass
class VideoSequence:
    """One video: frames as a (T, H, W, 3) float array in [0, 1] plus
    per-frame annotations. frames[i] is the i-th image."""

    video_id: str
    frames: np.ndarray
    annotations: List[FrameAnnotation]
    fps: float
    surgeon_id: str

    def __post_init__(self):
        if self.fps <= 0:
            raise ValidationError(f"fps must be > 0, got {self.fps}")
        if len(self.frames) == 0 or len(self.frames) != len(self.annotations):
            raise ValidationError(
                f"video {self.video_id}: {len(self.frames)} frames vs "
                f"{len(self.annotations)} annotations (need equal, >= 1)"
            )

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def experience(self) -> ExperienceLevel:
        return self.annotations[0].experience

    @property
    def total_duration_s(self) -> float:
        return self.annotations[0].total_duration_s

    @property
    def elapsed_times(self) -> np.ndarray:
        return np.array([a.elapsed_s for a in self.annotations])

    @property
    def rsd_labels(self) -> np.ndarray:
        return np.array([a.rsd_s for a in self.annotations])

    @property
    def phase_labels(self) -> np.ndarray:
        return np.array([a.phase for a in self.annotations], dtype=np.int64)


@dataclass
class SurgerySpec:
    """Parameters for one synthetic surgery video.

    time_scale is the number of seconds one time unit represents; it only
    affects real-time pacing and unit labels, never the math.
    """

    experience: ExperienceLevel
    phase_duration_means_s: Sequence[float]
    phase_duration_stds_s: Sequence[float]
    frame_size: Tuple[int, int] = (64, 64)
    fps: float = 2.5
    noise_level: float = 0.05
    time_scale: float = 1.0

    def __post_init__(self):
        if len(self.phase_duration_means_s) != N_PHASES:
            raise ValidationError(
                f"need {N_PHASES} phase duration means, got {len(self.phase_duration_means_s)}"
            )
        if len(self.phase_duration_stds_s) != N_PHASES:
            raise ValidationError(
                f"need {N_PHASES} phase duration stds, got {len(self.phase_duration_stds_s)}"
            )
        if any(m <= 0 for m in self.phase_duration_means_s):
            raise ValidationError("phase duration means must all be > 0")
        if any(s < 0 for s in self.phase_duration_stds_s):
            raise ValidationError("phase duration stds must all be >= 0")
        if self.fps <= 0:
            raise ValidationError(f"fps must be > 0, got {self.fps}")
        if not 0 <= self.noise_level <= 1:
            raise ValidationError(f"noise_level must be in [0, 1], got {self.noise_level}")
        if self.time_scale <= 0:
            raise ValidationError(f"time_scale must be > 0, got {self.time_scale}")

    @property
    def expected_total_s(self) -> float:
        return float(sum(self.phase_duration_means_s))


@dataclass
class DatasetSplit:
    """Train/test video ids plus cross-validation folds over the train ids.

    folds is a list of (train_ids, val_ids) pairs; the val sets are disjoint
    and together cover train_ids exactly.
    """

    train_ids: List[str]
    test_ids: List[str]
    folds: List[Tuple[List[str], List[str]]] = field(default_factory=list)

    def __post_init__(self):
        if set(self.train_ids) & set(self.test_ids):
            raise ValidationError("train and test ids overlap")
        seen_val: set = set()
        for fold_train, fold_val in self.folds:
            if not set(fold_val) <= set(self.train_ids):
                raise ValidationError("fold val ids not a subset of train ids")
            if seen_val & set(fold_val):
                raise ValidationError("fold val sets overlap")
            seen_val |= set(fold_val)
        if self.folds and seen_val != set(self.train_ids):
            raise ValidationError("fold val sets do not partition the train ids")
