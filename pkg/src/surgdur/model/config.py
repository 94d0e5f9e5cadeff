"""Architecture hyperparameters for the joint phase/experience/RSD network."""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

from ..errors import ValidationError


class ElapsedMode(str, Enum):
    """Where the elapsed time enters the network.

    INPUT_CHANNEL appends min(t/t_max, 1) as a constant fourth image channel
    before the encoder; AFTER_RNN concatenates the same scalar to the video
    descriptor instead; NONE omits it entirely.
    """

    INPUT_CHANNEL = "input_channel"
    AFTER_RNN = "after_rnn"
    NONE = "none"


@dataclass
class ModelConfig:
    frame_size: Tuple[int, int] = (64, 64)
    encoder_channels: List[int] = field(default_factory=lambda: [16, 32, 64, 128])
    frame_descriptor_dim: int = 128
    video_descriptor_dim: int = 128
    recurrent_layers: int = 2
    t_max_s: float = 180.0
    elapsed_mode: ElapsedMode = ElapsedMode.INPUT_CHANNEL
    n_phases: int = 10
    n_experience: int = 2
    rnn_cell: str = "lstm"
    # zero the first-layer weights feeding the elapsed channel at init
    # (useful with warm-started encoders; random init keeps the channel
    # immediately influential)
    zero_init_elapsed: bool = False

    def __post_init__(self):
        if isinstance(self.elapsed_mode, str):
            self.elapsed_mode = ElapsedMode(self.elapsed_mode)
        if self.frame_descriptor_dim <= 0 or self.video_descriptor_dim <= 0:
            raise ValidationError("descriptor dims must be > 0")
        if self.t_max_s <= 0:
            raise ValidationError(f"t_max_s must be > 0, got {self.t_max_s}")
        if self.recurrent_layers < 1:
            raise ValidationError("recurrent_layers must be >= 1")
        if self.rnn_cell not in ("lstm", "gru"):
            raise ValidationError(f"unknown rnn_cell: {self.rnn_cell}")
        if not self.encoder_channels:
            raise ValidationError("encoder_channels must be non-empty")

    @property
    def encoder_in_channels(self) -> int:
        return 4 if self.elapsed_mode is ElapsedMode.INPUT_CHANNEL else 3

    @property
    def head_input_dim(self) -> int:
        extra = 1 if self.elapsed_mode is ElapsedMode.AFTER_RNN else 0
        return self.video_descriptor_dim + extra

    def to_dict(self) -> dict:
        return {
            "frame_size": list(self.frame_size),
            "encoder_channels": list(self.encoder_channels),
            "frame_descriptor_dim": self.frame_descriptor_dim,
            "video_descriptor_dim": self.video_descriptor_dim,
            "recurrent_layers": self.recurrent_layers,
            "t_max_s": self.t_max_s,
            "elapsed_mode": self.elapsed_mode.value,
            "n_phases": self.n_phases,
            "n_experience": self.n_experience,
            "rnn_cell": self.rnn_cell,
            "zero_init_elapsed": self.zero_init_elapsed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        data = dict(data)
        data["frame_size"] = tuple(data.get("frame_size", (64, 64)))
        return cls(**data)


def desk_model_config(**overrides) -> ModelConfig:
    """Small configuration that trains in minutes on one CPU core.

    t_max covers the longest plausible desk video (~120 s assistant mean
    plus variance headroom)."""
    params = dict(frame_size=(64, 64), t_max_s=180.0)
    params.update(overrides)
    return ModelConfig(**params)


def full_scale_model_config(**overrides) -> ModelConfig:
    """The published geometry: 224x224 inputs, 1664-d frame descriptors,
    two 128-cell recurrent layers, 20-minute elapsed-time cap (times here
    are in minutes)."""
    params = dict(
        frame_size=(224, 224),
        encoder_channels=[32, 64, 128, 256, 416],
        frame_descriptor_dim=1664,
        video_descriptor_dim=128,
        recurrent_layers=2,
        t_max_s=20.0,
    )
    params.update(overrides)
    return ModelConfig(**params)
