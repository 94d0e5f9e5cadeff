from .checkpoint import load_checkpoint, save_checkpoint, save_oracle_checkpoint
from .config import ElapsedMode, ModelConfig, desk_model_config, full_scale_model_config
from .network import (
    CnnAuxHeads,
    FrameEncoder,
    InferenceSession,
    NetworkOutputs,
    PredictionHeads,
    RecurrentState,
    SurgeryNet,
    TemporalNet,
    elapsed_fraction,
    embed_elapsed_time,
    forward_video,
)
from .oracle import OracleEchoModel
from .preprocess import preprocess_frame, preprocess_video_frames

__all__ = [
    "CnnAuxHeads",
    "ElapsedMode",
    "FrameEncoder",
    "InferenceSession",
    "ModelConfig",
    "NetworkOutputs",
    "OracleEchoModel",
    "PredictionHeads",
    "RecurrentState",
    "SurgeryNet",
    "TemporalNet",
    "desk_model_config",
    "elapsed_fraction",
    "embed_elapsed_time",
    "forward_video",
    "full_scale_model_config",
    "load_checkpoint",
    "preprocess_frame",
    "preprocess_video_frames",
    "save_checkpoint",
    "save_oracle_checkpoint",
]
