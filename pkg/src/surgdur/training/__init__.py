from .gradcheck import (
    analytic_gradients,
    gradient_check,
    make_cnn_loss_case,
    make_rnn_loss_case,
    tiny_model_config,
)
from .loop import (
    EarlyStopper,
    FoldData,
    FoldRun,
    LabelUsage,
    StageLog,
    run_full_training,
    tbptt_segments,
    train_stage,
    write_stage_logs,
)
from .losses import EPSILON, cross_entropy, loss_cnn, loss_rnn, loss_rnn_mean
from .schedule import (
    ENCODER,
    RNN,
    EarlyStoppingSpec,
    StageLoss,
    StageSpec,
    TrainingSchedule,
    desk_schedule,
    full_scale_schedule,
)

__all__ = [
    "ENCODER",
    "EPSILON",
    "EarlyStopper",
    "EarlyStoppingSpec",
    "FoldData",
    "FoldRun",
    "LabelUsage",
    "RNN",
    "StageLog",
    "StageLoss",
    "StageSpec",
    "TrainingSchedule",
    "analytic_gradients",
    "cross_entropy",
    "desk_schedule",
    "full_scale_schedule",
    "gradient_check",
    "loss_cnn",
    "loss_rnn",
    "loss_rnn_mean",
    "make_cnn_loss_case",
    "make_rnn_loss_case",
    "run_full_training",
    "tbptt_segments",
    "tiny_model_config",
    "train_stage",
    "write_stage_logs",
]
