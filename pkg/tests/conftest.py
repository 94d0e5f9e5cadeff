import numpy as np
import pytest
import torch

from surgdur.data import generate_corpus
from surgdur.model import ModelConfig
from surgdur.training import TrainingSchedule
from surgdur.training.schedule import EarlyStoppingSpec, StageLoss, StageSpec

torch.set_num_threads(1)


@pytest.fixture(scope="session")
def tiny_corpus():
    """8 short videos at 32x32 / 2.5 fps; enough for pipeline tests."""
    return generate_corpus(
        8,
        seed=123,
        senior_total_mean_s=20.0,
        assistant_total_mean_s=32.0,
        frame_size=(32, 32),
        fps=2.5,
        noise_level=0.05,
    )


@pytest.fixture(scope="session")
def tiny_config():
    return ModelConfig(
        frame_size=(32, 32),
        encoder_channels=[8, 16],
        frame_descriptor_dim=16,
        video_descriptor_dim=16,
        recurrent_layers=1,
        t_max_s=48.0,
    )


def micro_stages(epochs=(1, 2, 1, 1), lrs=(3e-4, 1e-3, 1e-4, 5e-4)):
    sub = EarlyStoppingSpec(patience=2, eval_interval=0.5)
    per = EarlyStoppingSpec(patience=5, eval_interval=1.0)
    return [
        StageSpec(1, epochs[0], lrs[0], (), StageLoss.CNN_LOSS, sub),
        StageSpec(2, epochs[1], lrs[1], ("ENCODER",), StageLoss.RNN_LOSS, per),
        StageSpec(3, epochs[2], lrs[2], (), StageLoss.RNN_LOSS, per),
        StageSpec(4, epochs[3], lrs[3], ("ENCODER",), StageLoss.RNN_LOSS, per),
    ]


@pytest.fixture()
def micro_schedule():
    """Minimal 4-stage schedule for wiring tests (not for accuracy)."""
    return TrainingSchedule(
        stages=micro_stages(),
        seed=7,
        tbptt_window=16,
        batch_size_stage1=32,
        n_per_phase=12,
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
