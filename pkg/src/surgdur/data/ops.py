"""Dataset operations: RSD label computation, temporal downsampling,
stratified frame sampling and train/test/fold splitting."""

from collections import defaultdict
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import ValidationError
from .types import DatasetSplit, FrameAnnotation, VideoSequence


def compute_rsd_labels(
    total_duration_s: float, frame_times_s: Sequence[float]
) -> List[float]:
    """Remaining duration at each frame time: total - t."""
    labels = []
    for t in frame_times_s:
        if t < 0 or t > total_duration_s:
            raise ValidationError(
                f"frame time {t} outside [0, {total_duration_s}]"
            )
        labels.append(total_duration_s - t)
    return labels


def temporal_downsample(video: VideoSequence, target_fps: float) -> VideoSequence:
    """Keep every (fps/target_fps)-th frame starting at index 0.

    The ratio must be a positive integer; no resampling or interpolation.
    Annotations keep their original frame indices and timing.
    """
    if target_fps <= 0:
        raise ValidationError(f"target_fps must be > 0, got {target_fps}")
    ratio = video.fps / target_fps
    stride = int(round(ratio))
    if stride < 1 or abs(ratio - stride) > 1e-9:
        raise ValidationError(
            f"fps ratio {video.fps}/{target_fps} = {ratio} is not a positive integer"
        )
    if stride == 1:
        return video
    return VideoSequence(
        video_id=video.video_id,
        frames=video.frames[::stride],
        annotations=video.annotations[::stride],
        fps=target_fps,
        surgeon_id=video.surgeon_id,
    )


def stratified_sample(
    videos: Sequence[VideoSequence], n_per_phase: int, seed: int
) -> List[Tuple[np.ndarray, FrameAnnotation]]:
    """Draw exactly n_per_phase frames for every phase present in the corpus.

    Sampling is uniform without replacement when a phase has enough frames,
    with replacement otherwise. Deterministic under seed.
    """
    if n_per_phase < 1:
        raise ValidationError(f"n_per_phase must be >= 1, got {n_per_phase}")
    if not videos:
        raise ValidationError("empty corpus")
    by_phase: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    for vi, video in enumerate(videos):
        for fi, ann in enumerate(video.annotations):
            by_phase[ann.phase].append((vi, fi))

    rng = np.random.default_rng(seed)
    samples: List[Tuple[np.ndarray, FrameAnnotation]] = []
    for phase in sorted(by_phase):
        pool = by_phase[phase]
        replace = len(pool) < n_per_phase
        chosen = rng.choice(len(pool), size=n_per_phase, replace=replace)
        for c in chosen:
            vi, fi = pool[int(c)]
            samples.append((videos[vi].frames[fi], videos[vi].annotations[fi]))
    return samples


def split_dataset(
    videos: Sequence[VideoSequence],
    n_test_per_surgeon: int,
    k_folds: int,
    seed: int,
) -> DatasetSplit:
    """Hold out n_test_per_surgeon videos per surgeon for testing, then
    partition the remaining ids into k_folds near-equal validation groups."""
    if k_folds < 2:
        raise ValidationError(f"k_folds must be >= 2, got {k_folds}")
    if n_test_per_surgeon < 0:
        raise ValidationError("n_test_per_surgeon must be >= 0")
    by_surgeon: Dict[str, List[str]] = defaultdict(list)
    for video in videos:
        by_surgeon[video.surgeon_id].append(video.video_id)

    rng = np.random.default_rng(seed)
    test_ids: List[str] = []
    train_ids: List[str] = []
    for surgeon in sorted(by_surgeon):
        ids = sorted(by_surgeon[surgeon])
        if len(ids) <= n_test_per_surgeon:
            raise ValidationError(
                f"surgeon {surgeon} has {len(ids)} videos, "
                f"needs more than {n_test_per_surgeon}"
            )
        perm = rng.permutation(len(ids))
        test_ids.extend(ids[i] for i in perm[:n_test_per_surgeon])
        train_ids.extend(ids[i] for i in perm[n_test_per_surgeon:])

    if len(train_ids) < k_folds:
        raise ValidationError(
            f"{len(train_ids)} train videos cannot form {k_folds} folds"
        )
    train_ids = sorted(train_ids)
    perm = rng.permutation(len(train_ids))
    shuffled = [train_ids[i] for i in perm]
    folds = []
    for chunk in np.array_split(np.arange(len(shuffled)), k_folds):
        val = [shuffled[i] for i in chunk]
        fold_train = [v for v in shuffled if v not in set(val)]
        folds.append((fold_train, val))
    return DatasetSplit(train_ids=train_ids, test_ids=sorted(test_ids), folds=folds)
