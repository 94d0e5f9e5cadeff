"""RSD, phase and experience metrics plus fold-ensemble averaging.

RSD predictions are clipped at 0 before every MAE variant; window metrics
select frames by ground-truth RSD; argmax ties resolve to the lowest class
index.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ValidationError
from ..model.network import NetworkOutputs
from ..phases import HYDRODISSECTION
from .tracks import PredictionTrack


def _clipped_errors(track: PredictionTrack) -> np.ndarray:
    return np.abs(np.maximum(track.rsd_pred, 0.0) - track.rsd_gt)


def mae(track: PredictionTrack) -> float:
    """Frame-mean absolute RSD error over the whole track."""
    if len(track) == 0:
        raise ValidationError("empty track")
    return float(np.mean(_clipped_errors(track)))


def mae_last_window(track: PredictionTrack, window_s: float) -> float:
    """MAE restricted to frames with ground-truth RSD <= window_s. Videos
    shorter than the window contribute all their frames."""
    if window_s <= 0:
        raise ValidationError(f"window_s must be > 0, got {window_s}")
    mask = track.rsd_gt <= window_s
    errors = _clipped_errors(track)
    return float(np.mean(errors[mask]))


def mae_at_phase_end(track: PredictionTrack, phase: int) -> Optional[float]:
    """Absolute error at the last frame whose ground-truth phase matches.
    Returns None when the phase never occurs (the video is then excluded
    from the aggregate and listed in the report)."""
    matches = np.nonzero(track.phase_gt == phase)[0]
    if len(matches) == 0:
        return None
    idx = int(matches[-1])
    return float(_clipped_errors(track)[idx])


def _f1_for_class(pred: np.ndarray, gt: np.ndarray, cls: int) -> float:
    tp = int(np.sum((pred == cls) & (gt == cls)))
    fp = int(np.sum((pred == cls) & (gt != cls)))
    fn = int(np.sum((pred != cls) & (gt == cls)))
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom else 0.0


def video_phase_scores(track: PredictionTrack) -> Tuple[float, float, Optional[float]]:
    """(micro accuracy, macro F1 over classes present in ground truth,
    Hydrodissection F1 or None when the phase is absent and never predicted)."""
    pred = track.phase_pred
    gt = track.phase_gt
    acc = float(np.mean(pred == gt))
    present = sorted(set(gt.tolist()))
    f1_macro = float(np.mean([_f1_for_class(pred, gt, c) for c in present]))
    if HYDRODISSECTION in present or np.any(pred == HYDRODISSECTION):
        f1_hyd: Optional[float] = _f1_for_class(pred, gt, HYDRODISSECTION)
    else:
        f1_hyd = None
    return acc, f1_macro, f1_hyd


def video_experience_accuracy(track: PredictionTrack) -> float:
    """Per-frame argmax vs the video's label (np.argmax breaks ties toward
    the lowest index)."""
    pred = np.argmax(track.exp_probs_pred, axis=1)
    return float(np.mean(pred == int(track.experience)))


@dataclass
class AggregateStat:
    mean: float
    std: float
    n: int
    per_video: List[float]

    @classmethod
    def over(cls, values: Sequence[float]) -> "AggregateStat":
        values = list(values)
        if not values:
            return cls(mean=float("nan"), std=float("nan"), n=0, per_video=[])
        return cls(
            mean=float(np.mean(values)),
            std=float(np.std(values)),
            n=len(values),
            per_video=values,
        )


@dataclass
class PhaseMetrics:
    f1_macro: AggregateStat
    f1_hyd: AggregateStat
    acc: AggregateStat
    f1_hyd_excluded: List[str]


def phase_metrics(tracks: Sequence[PredictionTrack]) -> PhaseMetrics:
    if not tracks:
        raise ValidationError("no tracks")
    accs, macros, hyds, excluded = [], [], [], []
    for track in tracks:
        acc, f1_macro, f1_hyd = video_phase_scores(track)
        accs.append(acc)
        macros.append(f1_macro)
        if f1_hyd is None:
            excluded.append(track.video_id)
        else:
            hyds.append(f1_hyd)
    return PhaseMetrics(
        f1_macro=AggregateStat.over(macros),
        f1_hyd=AggregateStat.over(hyds),
        acc=AggregateStat.over(accs),
        f1_hyd_excluded=excluded,
    )


def experience_accuracy(tracks: Sequence[PredictionTrack]) -> AggregateStat:
    if not tracks:
        raise ValidationError("no tracks")
    return AggregateStat.over([video_experience_accuracy(t) for t in tracks])


def ensemble_average(
    fold_outputs: Sequence[Sequence[NetworkOutputs]],
) -> List[NetworkOutputs]:
    """Per-frame arithmetic mean of RSD and the probability vectors across
    fold models (averaged probabilities already sum to 1 by linearity)."""
    if not fold_outputs:
        raise ValidationError("no fold outputs")
    lengths = {len(outputs) for outputs in fold_outputs}
    if len(lengths) != 1:
        raise ValidationError(f"fold output lengths differ: {sorted(lengths)}")
    (n_frames,) = lengths
    averaged = []
    for i in range(n_frames):
        frame_outputs = [outputs[i] for outputs in fold_outputs]
        averaged.append(
            NetworkOutputs(
                phase_probs=np.mean([o.phase_probs for o in frame_outputs], axis=0),
                experience_probs=np.mean(
                    [o.experience_probs for o in frame_outputs], axis=0
                ),
                rsd=float(np.mean([o.rsd for o in frame_outputs])),
                frame_descriptor=np.mean(
                    [o.frame_descriptor for o in frame_outputs], axis=0
                ),
                video_descriptor=np.mean(
                    [o.video_descriptor for o in frame_outputs], axis=0
                ),
            )
        )
    return averaged
