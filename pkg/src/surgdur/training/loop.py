"""The staged training loop: stratified encoder pretraining, recurrent
training on full sequences, end-to-end fine-tuning with truncated
backpropagation, and a final recurrent fine-tune. Early stopping with
best-weight restore applies in every stage.
"""

import copy
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch.optim import Adam

from ..errors import ValidationError
from ..data.ops import stratified_sample
from ..data.types import DatasetSplit, FrameAnnotation, VideoSequence
from ..model.config import ModelConfig
from ..model.network import CnnAuxHeads, SequenceResult, SurgeryNet
from .losses import ce_from_logits, l1_term
from .schedule import ENCODER, RNN, StageLoss, StageSpec, TrainingSchedule


@dataclass
class FoldData:
    train_videos: List[VideoSequence]
    val_videos: List[VideoSequence]


@dataclass
class LabelUsage:
    """Counts every label actually consumed by a loss term; lets tests audit
    that label-free variants really are label-free."""

    counts: Dict[str, int] = field(
        default_factory=lambda: {"phase": 0, "exp": 0, "rsd": 0, "progress": 0}
    )

    def touch(self, key: str, n: int = 1) -> None:
        self.counts[key] += n


@dataclass
class LogRow:
    stage: int
    step: float
    split: str
    loss: float
    phase_acc: float
    exp_acc: float


@dataclass
class StageLog:
    stage_id: int
    rows: List[LogRow]
    best_val_loss: float
    n_evals: int
    stopped_early: bool


class EarlyStopper:
    """Stop after `patience` consecutive non-improving evaluations; the
    caller snapshots weights whenever update() reports an improvement."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = math.inf
        self.bad = 0
        self.n_evals = 0

    def update(self, val_loss: float) -> bool:
        self.n_evals += 1
        if val_loss < self.best:
            self.best = val_loss
            self.bad = 0
            return True
        self.bad += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.bad >= self.patience


def tbptt_segments(video_length: int, window: int) -> List[Tuple[int, int]]:
    """Consecutive non-overlapping [start, end) segments of length window;
    the last segment may be shorter."""
    if window < 1:
        raise ValidationError(f"window must be >= 1, got {window}")
    return [(s, min(s + window, video_length)) for s in range(0, video_length, window)]


def _video_total_duration(video: VideoSequence) -> float:
    total = video.total_duration_s
    if total <= 0:
        raise ValidationError(f"video {video.video_id} has non-positive duration")
    return total


def _labels_for_term(
    term: str,
    anns: Sequence[FrameAnnotation],
    totals: Optional[Sequence[float]],
    label_usage: Optional[LabelUsage],
) -> torch.Tensor:
    if label_usage is not None:
        label_usage.touch(term, len(anns))
    if term == "phase":
        return torch.tensor([a.phase for a in anns], dtype=torch.long)
    if term == "exp":
        return torch.tensor([int(a.experience) for a in anns], dtype=torch.long)
    if term == "rsd":
        return torch.tensor([a.rsd_s for a in anns], dtype=torch.float32)
    if term == "progress":
        return torch.tensor(
            [a.elapsed_s / t for a, t in zip(anns, totals)], dtype=torch.float32
        )
    raise ValidationError(f"unknown loss term: {term}")


# ---------------------------------------------------------------------------
# stage 1: encoder pretraining on stratified frame batches
# ---------------------------------------------------------------------------


def _build_aux_heads(config: ModelConfig, schedule: TrainingSchedule) -> CnnAuxHeads:
    terms = schedule.cnn_terms
    regression = "rsd" in terms or "progress" in terms
    return CnnAuxHeads(
        config.frame_descriptor_dim,
        n_phases=config.n_phases,
        n_experience=config.n_experience,
        with_phase="phase" in terms,
        with_experience="exp" in terms,
        with_regression=regression,
        regression_scale=config.t_max_s if "rsd" in terms else 1.0,
    )


def _stage1_batch_loss(
    model: SurgeryNet,
    aux: CnnAuxHeads,
    frames: np.ndarray,
    anns: Sequence[FrameAnnotation],
    schedule: TrainingSchedule,
    label_usage: Optional[LabelUsage],
) -> Tuple[torch.Tensor, dict]:
    elapsed = np.array([a.elapsed_s for a in anns])
    x = model.prepare_input(frames, elapsed)
    out = aux(model.encoder(x))
    totals = [a.total_duration_s for a in anns]
    terms = []
    accs = {}
    for term in schedule.cnn_terms:
        y = _labels_for_term(term, anns, totals, label_usage)
        if term == "phase":
            terms.append(ce_from_logits(out["phase_logits"], y).mean())
            accs["phase_acc"] = float((out["phase_logits"].argmax(-1) == y).float().mean())
        elif term == "exp":
            terms.append(ce_from_logits(out["exp_logits"], y).mean())
            accs["exp_acc"] = float((out["exp_logits"].argmax(-1) == y).float().mean())
        else:
            terms.append(l1_term(out["regression"], y).mean())
    return sum(terms), accs


def _stage1_eval(
    model: SurgeryNet,
    aux: CnnAuxHeads,
    samples: list,
    schedule: TrainingSchedule,
    batch_size: int,
    label_usage: Optional[LabelUsage],
) -> Tuple[float, float, float]:
    model.eval()
    aux.eval()
    losses, paccs, eaccs = [], [], []
    with torch.no_grad():
        for start in range(0, len(samples), batch_size):
            chunk = samples[start : start + batch_size]
            frames = np.stack([f for f, _ in chunk])
            anns = [a for _, a in chunk]
            loss, accs = _stage1_batch_loss(model, aux, frames, anns, schedule, label_usage)
            losses.append(float(loss) * len(chunk))
            if "phase_acc" in accs:
                paccs.append(accs["phase_acc"] * len(chunk))
            if "exp_acc" in accs:
                eaccs.append(accs["exp_acc"] * len(chunk))
    n = len(samples)
    model.train()
    aux.train()
    return (
        sum(losses) / n,
        sum(paccs) / n if paccs else float("nan"),
        sum(eaccs) / n if eaccs else float("nan"),
    )


def _run_stage1(
    model: SurgeryNet,
    data: FoldData,
    stage: StageSpec,
    schedule: TrainingSchedule,
    label_usage: Optional[LabelUsage],
) -> StageLog:
    rng = np.random.default_rng(schedule.seed * 1009 + stage.stage_id)
    samples = stratified_sample(
        data.train_videos, schedule.n_per_phase, seed=int(rng.integers(2**31))
    )
    val_samples = stratified_sample(
        data.val_videos, max(1, schedule.n_per_phase // 8), seed=int(rng.integers(2**31))
    )
    torch.manual_seed(schedule.seed * 5003 + 11)
    aux = _build_aux_heads(model.config, schedule)

    params = list(model.encoder.parameters()) + list(aux.parameters())
    opt = Adam(params, lr=stage.learning_rate)
    batch = schedule.batch_size_stage1
    n_batches = math.ceil(len(samples) / batch)
    eval_every = max(1, round(n_batches * stage.early_stopping.eval_interval))
    stopper = EarlyStopper(stage.early_stopping.patience)
    rows: List[LogRow] = []
    running: List[float] = []
    step = 0
    model.train()
    aux.train()

    # entry evaluation so a stage that never improves restores entry weights
    val_loss, pacc, eacc = _stage1_eval(model, aux, val_samples, schedule, batch, label_usage)
    rows.append(LogRow(1, 0.0, "val", val_loss, pacc, eacc))
    stopper.update(val_loss)
    snapshot = (copy.deepcopy(model.state_dict()), copy.deepcopy(aux.state_dict()))

    for epoch in range(stage.epochs):
        order = rng.permutation(len(samples))
        for start in range(0, len(samples), batch):
            chunk = [samples[i] for i in order[start : start + batch]]
            frames = np.stack([f for f, _ in chunk])
            anns = [a for _, a in chunk]
            loss, _ = _stage1_batch_loss(model, aux, frames, anns, schedule, label_usage)
            opt.zero_grad()
            loss.backward()
            opt.step()
            running.append(float(loss.detach()))
            step += 1
            if step % eval_every == 0:
                frac = step / n_batches
                val_loss, pacc, eacc = _stage1_eval(
                    model, aux, val_samples, schedule, batch, label_usage
                )
                rows.append(LogRow(1, frac, "train", float(np.mean(running)), math.nan, math.nan))
                rows.append(LogRow(1, frac, "val", val_loss, pacc, eacc))
                running = []
                if stopper.update(val_loss):
                    snapshot = (
                        copy.deepcopy(model.state_dict()),
                        copy.deepcopy(aux.state_dict()),
                    )
                if stopper.should_stop:
                    break
        if stopper.should_stop:
            break

    if snapshot is not None:
        model.load_state_dict(snapshot[0])
        aux.load_state_dict(snapshot[1])
    model.stage_reached = 1
    return StageLog(1, rows, stopper.best, stopper.n_evals, stopper.should_stop)


# ---------------------------------------------------------------------------
# stages 2-4: sequence training
# ---------------------------------------------------------------------------


def _sequence_loss(
    result: SequenceResult,
    anns: Sequence[FrameAnnotation],
    schedule: TrainingSchedule,
    label_usage: Optional[LabelUsage],
) -> torch.Tensor:
    totals = [a.total_duration_s for a in anns]
    terms = []
    for term in schedule.rnn_terms:
        y = _labels_for_term(term, anns, totals, label_usage)
        if term == "phase":
            terms.append(ce_from_logits(result.phase_logits, y).mean())
        elif term == "exp":
            terms.append(ce_from_logits(result.exp_logits, y).mean())
        elif term == "rsd":
            terms.append(schedule.alpha * l1_term(result.rsd, y).mean())
        else:
            terms.append(l1_term(result.rsd, y).mean())
    return sum(terms)


def _precompute_descriptors(
    model: SurgeryNet, videos: Sequence[VideoSequence], chunk: int = 256
) -> Dict[str, torch.Tensor]:
    model.eval()
    cache = {}
    with torch.no_grad():
        for video in videos:
            elapsed = video.elapsed_times
            parts = []
            for start in range(0, len(video), chunk):
                x = model.prepare_input(
                    video.frames[start : start + chunk], elapsed[start : start + chunk]
                )
                parts.append(model.encoder(x))
            cache[video.video_id] = torch.cat(parts)
    model.train()
    return cache


def _video_result(
    model: SurgeryNet,
    video: VideoSequence,
    descriptors: Optional[Dict[str, torch.Tensor]],
) -> SequenceResult:
    elapsed_t = torch.from_numpy(video.elapsed_times.astype(np.float32))
    if descriptors is not None:
        return model.forward_from_descriptors(descriptors[video.video_id], elapsed_t)
    x = model.prepare_input(video.frames, video.elapsed_times)
    return model.forward_from_input(x, elapsed_t)


def _sequence_val(
    model: SurgeryNet,
    videos: Sequence[VideoSequence],
    schedule: TrainingSchedule,
    descriptors: Optional[Dict[str, torch.Tensor]],
    label_usage: Optional[LabelUsage],
) -> Tuple[float, float, float]:
    model.eval()
    losses, paccs, eaccs = [], [], []
    with torch.no_grad():
        for video in videos:
            result = _video_result(model, video, descriptors)
            losses.append(float(_sequence_loss(result, video.annotations, schedule, label_usage)))
            phase_y = torch.from_numpy(video.phase_labels)
            exp_y = torch.tensor([int(a.experience) for a in video.annotations])
            paccs.append(float((result.phase_logits.argmax(-1) == phase_y).float().mean()))
            eaccs.append(float((result.exp_logits.argmax(-1) == exp_y).float().mean()))
    model.train()
    return float(np.mean(losses)), float(np.mean(paccs)), float(np.mean(eaccs))


def _set_requires_grad(model: SurgeryNet, stage: StageSpec) -> None:
    for p in model.encoder.parameters():
        p.requires_grad_(ENCODER not in stage.frozen)
    for p in model.temporal.parameters():
        p.requires_grad_(RNN not in stage.frozen)
    for p in model.heads.parameters():
        p.requires_grad_(True)


def _run_rnn_stage(
    model: SurgeryNet,
    data: FoldData,
    stage: StageSpec,
    schedule: TrainingSchedule,
    label_usage: Optional[LabelUsage],
) -> StageLog:
    rng = np.random.default_rng(schedule.seed * 1009 + stage.stage_id)
    encoder_frozen = ENCODER in stage.frozen
    _set_requires_grad(model, stage)
    params = [p for p in model.parameters() if p.requires_grad]
    opt = Adam(params, lr=stage.learning_rate)

    descriptors = None
    if encoder_frozen:
        descriptors = _precompute_descriptors(model, data.train_videos + data.val_videos)

    stopper = EarlyStopper(stage.early_stopping.patience)
    rows: List[LogRow] = []
    model.train()

    # entry evaluation so a stage that never improves restores entry weights
    val_loss, pacc, eacc = _sequence_val(model, data.val_videos, schedule, descriptors, label_usage)
    rows.append(LogRow(stage.stage_id, 0.0, "val", val_loss, pacc, eacc))
    stopper.update(val_loss)
    snapshot = copy.deepcopy(model.state_dict())

    for epoch in range(stage.epochs):
        order = rng.permutation(len(data.train_videos))
        epoch_losses = []
        for vi in order:
            video = data.train_videos[int(vi)]
            _video_total_duration(video)
            elapsed = video.elapsed_times.astype(np.float32)
            if encoder_frozen:
                result = _video_result(model, video, descriptors)
                loss = _sequence_loss(result, video.annotations, schedule, label_usage)
                opt.zero_grad()
                loss.backward()
                opt.step()
                epoch_losses.append(float(loss.detach()))
            else:
                # truncated backpropagation: state crosses segments and gradients
                # accumulate across them, but backprop never crosses a boundary;
                # one optimizer step per video
                state = None
                video_loss = 0.0
                opt.zero_grad()
                for s, e in tbptt_segments(len(video), schedule.tbptt_window):
                    x = model.prepare_input(video.frames[s:e], elapsed[s:e])
                    result = model.forward_from_input(
                        x, torch.from_numpy(elapsed[s:e]), state
                    )
                    loss = _sequence_loss(
                        result, video.annotations[s:e], schedule, label_usage
                    ) * ((e - s) / len(video))
                    loss.backward()
                    state = result.state.detached()
                    video_loss += float(loss.detach())
                opt.step()
                epoch_losses.append(video_loss)

        val_loss, pacc, eacc = _sequence_val(
            model, data.val_videos, schedule, descriptors, label_usage
        )
        rows.append(
            LogRow(stage.stage_id, epoch + 1.0, "train", float(np.mean(epoch_losses)), math.nan, math.nan)
        )
        rows.append(LogRow(stage.stage_id, epoch + 1.0, "val", val_loss, pacc, eacc))
        if stopper.update(val_loss):
            snapshot = copy.deepcopy(model.state_dict())
        if stopper.should_stop:
            break

    if snapshot is not None:
        model.load_state_dict(snapshot)
    for p in model.parameters():
        p.requires_grad_(True)
    model.stage_reached = stage.stage_id
    return StageLog(stage.stage_id, rows, stopper.best, stopper.n_evals, stopper.should_stop)


def train_stage(
    model: SurgeryNet,
    data: FoldData,
    stage: StageSpec,
    schedule: TrainingSchedule,
    label_usage: Optional[LabelUsage] = None,
) -> Tuple[SurgeryNet, StageLog]:
    """Run one stage. Stages must run in schedule order; frozen components
    come back bitwise unchanged and the best-validation weights are restored
    at stage end."""
    if not data.train_videos or not data.val_videos:
        raise ValidationError("stage needs non-empty train and val video sets")
    prior = [s.stage_id for s in schedule.stages if s.stage_id < stage.stage_id]
    required = max(prior, default=0)
    if model.stage_reached < required:
        raise ValidationError(
            f"stage {stage.stage_id} requires a stage-{required} checkpoint "
            f"(model is at stage {model.stage_reached})"
        )
    if model.stage_reached >= stage.stage_id:
        raise ValidationError(
            f"stage {stage.stage_id} already completed (model at {model.stage_reached})"
        )
    if stage.loss is StageLoss.CNN_LOSS:
        log = _run_stage1(model, data, stage, schedule, label_usage)
    else:
        log = _run_rnn_stage(model, data, stage, schedule, label_usage)
    return model, log


@dataclass
class FoldRun:
    """Everything produced by one fold's full training run."""

    fold_id: int
    model: SurgeryNet
    logs: List[StageLog]
    label_usage: LabelUsage
    trained_on: List[str]
    val_ids: List[str]

    @property
    def best_val_loss(self) -> float:
        return self.logs[-1].best_val_loss if self.logs else math.nan


def run_full_training(
    videos: Sequence[VideoSequence],
    split: DatasetSplit,
    model_config: ModelConfig,
    schedule: TrainingSchedule,
) -> List[FoldRun]:
    """One complete multi-stage run per fold; reproducible under the
    schedule seed."""
    by_id = {v.video_id: v for v in videos}
    missing = [i for i in split.train_ids if i not in by_id]
    if missing:
        raise ValidationError(f"split references unknown video ids: {missing[:5]}")
    if not split.folds:
        raise ValidationError("split has no folds")

    runs = []
    for fold_id, (fold_train, fold_val) in enumerate(split.folds):
        torch.manual_seed(schedule.seed * 1000 + fold_id)
        model = SurgeryNet(model_config)
        data = FoldData(
            train_videos=[by_id[i] for i in fold_train],
            val_videos=[by_id[i] for i in fold_val],
        )
        usage = LabelUsage()
        logs = []
        for stage in schedule.stages:
            model, log = train_stage(model, data, stage, schedule, usage)
            logs.append(log)
        runs.append(
            FoldRun(
                fold_id=fold_id,
                model=model,
                logs=logs,
                label_usage=usage,
                trained_on=list(fold_train),
                val_ids=list(fold_val),
            )
        )
    return runs


def write_stage_logs(logs: Sequence[StageLog], path) -> None:
    """CSV log: stage,step,split,loss,phase_acc,exp_acc."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "step", "split", "loss", "phase_acc", "exp_acc"])
        for log in logs:
            for row in log.rows:
                writer.writerow(
                    [row.stage, row.step, row.split, row.loss, row.phase_acc, row.exp_acc]
                )
