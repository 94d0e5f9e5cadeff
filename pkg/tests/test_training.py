import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from surgdur.data import generate_synthetic_video, split_dataset
from surgdur.data.types import VideoSequence
from surgdur.errors import ValidationError
from surgdur.model import SurgeryNet
from surgdur.training import (
    EarlyStopper,
    FoldData,
    LabelUsage,
    TrainingSchedule,
    run_full_training,
    tbptt_segments,
    train_stage,
)
from surgdur.training.schedule import desk_schedule, full_scale_schedule

from conftest import micro_stages
from test_dataset import flat_spec


class TestTbpttSegments:
    def test_window_48_over_100(self):
        assert tbptt_segments(100, 48) == [(0, 48), (48, 96), (96, 100)]

    def test_exact_fit(self):
        assert tbptt_segments(48, 48) == [(0, 48)]

    def test_short_video(self):
        assert tbptt_segments(10, 48) == [(0, 10)]

    def test_invalid_window(self):
        with pytest.raises(ValidationError):
            tbptt_segments(10, 0)

    @given(length=st.integers(1, 500), window=st.integers(1, 64))
    @settings(max_examples=50, deadline=None)
    def test_segments_tile_exactly(self, length, window):
        segments = tbptt_segments(length, window)
        assert segments[0][0] == 0
        assert segments[-1][1] == length
        for (s0, e0), (s1, e1) in zip(segments, segments[1:]):
            assert e0 == s1
            assert e0 - s0 == window
        assert all(e > s for s, e in segments)


class TestEarlyStopper:
    def test_patience_two_rule(self):
        # curve [3, 2, 2.5, 2.6, 2.4]: halt after the 4th evaluation,
        # keeping the weights snapshotted at the 2nd
        stopper = EarlyStopper(patience=2)
        snapshots = []
        for i, loss in enumerate([3.0, 2.0, 2.5, 2.6, 2.4]):
            if stopper.should_stop:
                break
            if stopper.update(loss):
                snapshots.append(i)
        assert stopper.n_evals == 4
        assert stopper.should_stop
        assert snapshots[-1] == 1
        assert stopper.best == 2.0

    def test_monotone_improvement_never_stops(self):
        stopper = EarlyStopper(patience=2)
        for loss in [5.0, 4.0, 3.0, 2.0]:
            assert stopper.update(loss)
        assert not stopper.should_stop


def two_phase_toy(n_train=2, n_val=1, frames_per_phase=40):
    """Videos containing only phases 0 and 1; linearly separable by hue."""
    videos = []
    for i in range(n_train + n_val):
        video = generate_synthetic_video(
            flat_spec(mean=frames_per_phase / 2.5, frame_size=(16, 16), noise=0.02), seed=100 + i
        )
        keep = [j for j, a in enumerate(video.annotations) if a.phase < 2]
        videos.append(
            VideoSequence(
                video_id=f"toy{i}",
                frames=video.frames[keep],
                annotations=[video.annotations[j] for j in keep],
                fps=video.fps,
                surgeon_id="s0",
            )
        )
    return FoldData(videos[:n_train], videos[n_train:])


@pytest.fixture(scope="module")
def toy_config():
    from surgdur.model import ModelConfig

    return ModelConfig(
        frame_size=(16, 16),
        encoder_channels=[8, 16],
        frame_descriptor_dim=16,
        video_descriptor_dim=16,
        recurrent_layers=1,
        t_max_s=40.0,
    )


class TestTrainStage:
    def test_stage1_learns_two_phase_toy(self, toy_config):
        # small fixed-seed run: the frame-level heads must separate the toy set
        from surgdur.training.schedule import EarlyStoppingSpec, StageLoss, StageSpec

        data = two_phase_toy()
        stage1 = StageSpec(
            1, 10, 1e-3, (), StageLoss.CNN_LOSS, EarlyStoppingSpec(patience=8, eval_interval=0.5)
        )
        schedule = TrainingSchedule(
            stages=[stage1], seed=3, n_per_phase=80, batch_size_stage1=16
        )
        torch.manual_seed(0)
        model = SurgeryNet(toy_config)
        model, log = train_stage(model, data, schedule.stages[0], schedule)
        val_rows = [r for r in log.rows if r.split == "val"]
        assert val_rows[-1].loss < val_rows[0].loss
        best_row = min(val_rows, key=lambda r: r.loss)
        assert best_row.phase_acc > 0.9

    def test_stage2_keeps_encoder_bitwise_frozen(self, toy_config, micro_schedule, tiny_corpus):
        data = FoldData(tiny_corpus[:3], tiny_corpus[3:5])
        torch.manual_seed(0)
        model = SurgeryNet(toy_config)
        model.stage_reached = 1
        before = {k: v.clone() for k, v in model.encoder.state_dict().items()}
        model, _ = train_stage(model, data, micro_schedule.stages[1], micro_schedule)
        after = model.encoder.state_dict()
        for key in before:
            assert torch.equal(before[key], after[key])

    def test_stage4_keeps_encoder_bitwise_frozen(self, toy_config, micro_schedule, tiny_corpus):
        data = FoldData(tiny_corpus[:3], tiny_corpus[3:5])
        torch.manual_seed(0)
        model = SurgeryNet(toy_config)
        model.stage_reached = 3
        before = {k: v.clone() for k, v in model.encoder.state_dict().items()}
        model, _ = train_stage(model, data, micro_schedule.stages[3], micro_schedule)
        after = model.encoder.state_dict()
        for key in before:
            assert torch.equal(before[key], after[key])

    def test_stage_requires_predecessor(self, toy_config, micro_schedule, tiny_corpus):
        data = FoldData(tiny_corpus[:3], tiny_corpus[3:5])
        model = SurgeryNet(toy_config, seed=0)
        with pytest.raises(ValidationError, match="stage"):
            train_stage(model, data, micro_schedule.stages[1], micro_schedule)

    def test_stage_rerun_rejected(self, toy_config, micro_schedule, tiny_corpus):
        data = FoldData(tiny_corpus[:3], tiny_corpus[3:5])
        model = SurgeryNet(toy_config, seed=0)
        model.stage_reached = 2
        with pytest.raises(ValidationError):
            train_stage(model, data, micro_schedule.stages[1], micro_schedule)

    def test_empty_data_rejected(self, toy_config, micro_schedule):
        model = SurgeryNet(toy_config, seed=0)
        with pytest.raises(ValidationError):
            train_stage(model, FoldData([], []), micro_schedule.stages[0], micro_schedule)


class TestScheduleValidation:
    def test_stage1_must_use_frame_loss(self):
        from surgdur.training.schedule import StageLoss, StageSpec

        with pytest.raises(ValidationError):
            StageSpec(1, 1, 1e-4, (), StageLoss.RNN_LOSS)

    def test_stage2_must_freeze_encoder(self):
        from surgdur.training.schedule import StageLoss, StageSpec

        with pytest.raises(ValidationError):
            StageSpec(2, 1, 1e-4, (), StageLoss.RNN_LOSS)

    def test_full_scale_schedule_matches_published_parameters(self):
        schedule = full_scale_schedule()
        assert [s.epochs for s in schedule.stages] == [3, 50, 10, 20]
        assert [s.learning_rate for s in schedule.stages] == [1e-4, 1e-3, 5e-4, 5e-4]
        assert schedule.alpha == 1.0
        assert schedule.tbptt_window == 48
        assert schedule.batch_size_stage1 == 100
        assert schedule.n_per_phase == 8000

    def test_schedule_round_trips_through_dict(self):
        schedule = desk_schedule(seed=9)
        again = TrainingSchedule.from_dict(schedule.to_dict())
        assert again.to_dict() == schedule.to_dict()


@pytest.fixture(scope="module")
def tiny_split(tiny_corpus):
    return split_dataset(tiny_corpus, n_test_per_surgeon=1, k_folds=2, seed=5)


class TestRunFullTraining:
    def test_one_checkpoint_per_fold(self, tiny_corpus, tiny_split, toy_config, micro_schedule):
        runs = run_full_training(tiny_corpus, tiny_split, toy_config, micro_schedule)
        assert [r.fold_id for r in runs] == [0, 1]
        assert all(r.model.stage_reached == 4 for r in runs)

    def test_reproducible_under_seed(self, tiny_corpus, tiny_split, toy_config, micro_schedule):
        a = run_full_training(tiny_corpus, tiny_split, toy_config, micro_schedule)
        b = run_full_training(tiny_corpus, tiny_split, toy_config, micro_schedule)
        for ra, rb in zip(a, b):
            assert ra.best_val_loss == rb.best_val_loss

    def test_folds_never_train_on_their_val_videos(
        self, tiny_corpus, tiny_split, toy_config, micro_schedule
    ):
        runs = run_full_training(tiny_corpus, tiny_split, toy_config, micro_schedule)
        for run in runs:
            assert not set(run.trained_on) & set(run.val_ids)
            fold_train, fold_val = tiny_split.folds[run.fold_id]
            assert run.trained_on == list(fold_train)
            assert run.val_ids == list(fold_val)


class TestLabelUsage:
    def test_counts_accumulate(self):
        usage = LabelUsage()
        usage.touch("phase", 5)
        usage.touch("exp")
        assert usage.counts["phase"] == 5
        assert usage.counts["exp"] == 1
        assert usage.counts["progress"] == 0
