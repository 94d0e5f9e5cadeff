"""The joint prediction network: elapsed-time embedding, convolutional frame
encoder, recurrent temporal network and the three prediction heads, plus the
temporary frame-level heads used while pretraining the encoder.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..errors import ValidationError
from ..data.types import VideoSequence
from .config import ElapsedMode, ModelConfig
from .preprocess import preprocess_video_frames


def elapsed_fraction(t_s: float, t_max_s: float) -> float:
    """Elapsed time scaled into [0, 1]; clamps at 1 beyond t_max."""
    if t_s < 0:
        raise ValidationError(f"elapsed time must be >= 0, got {t_s}")
    if t_max_s <= 0:
        raise ValidationError(f"t_max must be > 0, got {t_max_s}")
    return min(t_s / t_max_s, 1.0)


def embed_elapsed_time(frame: np.ndarray, t_s: float, t_max_s: float) -> np.ndarray:
    """Append the scaled elapsed time as a constant fourth channel."""
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValidationError(f"expected HxWx3 frame, got shape {frame.shape}")
    frac = elapsed_fraction(t_s, t_max_s)
    channel = np.full(frame.shape[:2] + (1,), frac, dtype=frame.dtype)
    return np.concatenate([frame, channel], axis=2)


def _elapsed_channel_batch(
    frames: torch.Tensor, elapsed: torch.Tensor, t_max_s: float
) -> torch.Tensor:
    """frames (T, 3, H, W) + elapsed (T,) -> (T, 4, H, W)."""
    frac = torch.clamp(elapsed / t_max_s, max=1.0)
    channel = frac.view(-1, 1, 1, 1).expand(-1, 1, *frames.shape[2:])
    return torch.cat([frames, channel.to(frames.dtype)], dim=1)


@dataclass
class NetworkOutputs:
    """Per-frame predictions plus the intermediate descriptors."""

    phase_probs: np.ndarray
    experience_probs: np.ndarray
    rsd: float
    frame_descriptor: np.ndarray
    video_descriptor: np.ndarray

    def validate(self, atol: float = 1e-5) -> None:
        for name, probs in (("phase", self.phase_probs), ("experience", self.experience_probs)):
            if np.any(probs < 0) or abs(float(probs.sum()) - 1.0) > atol:
                raise ValidationError(f"{name} probabilities invalid: {probs}")


@dataclass
class RecurrentState:
    """Opaque per-video recurrent state; create via TemporalNet.initial_state
    and advance exactly once per processed frame."""

    hidden: object
    steps: int = 0

    def detached(self) -> "RecurrentState":
        if isinstance(self.hidden, tuple):
            hidden = tuple(h.detach() for h in self.hidden)
        else:
            hidden = self.hidden.detach()
        return RecurrentState(hidden=hidden, steps=self.steps)


def _norm_groups(width: int) -> int:
    return 4 if width % 4 == 0 else 1


class FrameEncoder(nn.Module):
    """Small conv stack: per block Conv3x3 -> GroupNorm -> ReLU -> MaxPool,
    then global average pooling and a linear projection to the frame
    descriptor. Stands in for a large pretrained backbone; the descriptor
    dimension is config-driven so the published geometry can be
    instantiated."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        blocks = []
        prev = config.encoder_in_channels
        for width in config.encoder_channels:
            blocks += [
                nn.Conv2d(prev, width, kernel_size=3, padding=1),
                nn.GroupNorm(_norm_groups(width), width),
                nn.ReLU(inplace=True),
                nn.MaxPool2d(2),
            ]
            prev = width
        self.features = nn.Sequential(*blocks)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.project = nn.Linear(prev, config.frame_descriptor_dim)
        if config.zero_init_elapsed and config.encoder_in_channels == 4:
            with torch.no_grad():
                self.features[0].weight[:, 3].zero_()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1] != self.config.encoder_in_channels:
            raise ValidationError(
                f"encoder expects (B, {self.config.encoder_in_channels}, H, W), "
                f"got {tuple(x.shape)}"
            )
        if tuple(x.shape[2:]) != tuple(self.config.frame_size):
            raise ValidationError(
                f"encoder expects spatial size {self.config.frame_size}, "
                f"got {tuple(x.shape[2:])}"
            )
        h = self.features(x)
        h = self.pool(h).flatten(1)
        return self.project(h)


class TemporalNet(nn.Module):
    """Recurrent aggregator over frame descriptors (two-layer LSTM by
    default; GRU available via config)."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        rnn_cls = nn.LSTM if config.rnn_cell == "lstm" else nn.GRU
        self.rnn = rnn_cls(
            input_size=config.frame_descriptor_dim,
            hidden_size=config.video_descriptor_dim,
            num_layers=config.recurrent_layers,
            batch_first=True,
        )

    def initial_state(self, batch: int = 1) -> RecurrentState:
        shape = (self.config.recurrent_layers, batch, self.config.video_descriptor_dim)
        reference = next(self.parameters())
        h = torch.zeros(shape, device=reference.device, dtype=reference.dtype)
        if self.config.rnn_cell == "lstm":
            return RecurrentState(hidden=(h, torch.zeros_like(h)))
        return RecurrentState(hidden=h)

    def run(
        self, descriptors: torch.Tensor, state: Optional[RecurrentState] = None
    ) -> Tuple[torch.Tensor, RecurrentState]:
        """descriptors (B, T, D) -> (B, T, D') and the advanced state."""
        if state is None:
            state = self.initial_state(descriptors.shape[0])
        out, hidden = self.rnn(descriptors, state.hidden)
        return out, RecurrentState(hidden=hidden, steps=state.steps + descriptors.shape[1])

    def step(
        self, descriptor: torch.Tensor, state: RecurrentState
    ) -> Tuple[torch.Tensor, RecurrentState]:
        """descriptor (B, D) -> (B, D'); state must come from initial_state."""
        if not isinstance(state, RecurrentState):
            raise ValidationError("recurrent state not initialized; call initial_state()")
        out, new_state = self.run(descriptor.unsqueeze(1), state)
        return out[:, 0], new_state


class PredictionHeads(nn.Module):
    """Three independent linear heads on the video descriptor. Softmax is
    applied downstream for phase and experience; the RSD head stays linear
    (it learns in units of t_max and is scaled back to time units, which
    keeps the optimizer step size sane across time scales)."""

    def __init__(self, in_dim: int, n_phases: int, n_experience: int, rsd_scale: float):
        super().__init__()
        self.phase = nn.Linear(in_dim, n_phases)
        self.experience = nn.Linear(in_dim, n_experience)
        self.rsd = nn.Linear(in_dim, 1)
        self.rsd_scale = float(rsd_scale)

    def forward(self, x: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        return (
            self.phase(x),
            self.experience(x),
            self.rsd(x).squeeze(-1) * self.rsd_scale,
        )


class CnnAuxHeads(nn.Module):
    """Temporary frame-level heads on the encoder output, used only while
    pretraining the encoder; excluded from the final network. Which heads
    exist depends on the training variant (phase/experience classification
    and/or a scalar regression target)."""

    def __init__(
        self,
        frame_descriptor_dim: int,
        n_phases: int = 10,
        n_experience: int = 2,
        with_phase: bool = True,
        with_experience: bool = True,
        with_regression: bool = False,
        regression_scale: float = 1.0,
    ):
        super().__init__()
        self.phase = nn.Linear(frame_descriptor_dim, n_phases) if with_phase else None
        self.experience = (
            nn.Linear(frame_descriptor_dim, n_experience) if with_experience else None
        )
        self.regression = nn.Linear(frame_descriptor_dim, 1) if with_regression else None
        self.regression_scale = float(regression_scale)

    def forward(self, d: torch.Tensor) -> dict:
        out = {}
        if self.phase is not None:
            out["phase_logits"] = self.phase(d)
        if self.experience is not None:
            out["exp_logits"] = self.experience(d)
        if self.regression is not None:
            out["regression"] = self.regression(d).squeeze(-1) * self.regression_scale
        return out


@dataclass
class SequenceResult:
    """Raw tensors from a full or partial sequence pass."""

    phase_logits: torch.Tensor
    exp_logits: torch.Tensor
    rsd: torch.Tensor
    frame_descriptors: torch.Tensor
    video_descriptors: torch.Tensor
    state: RecurrentState


class SurgeryNet(nn.Module):
    """Frame encoder + recurrent network + three prediction heads."""

    def __init__(self, config: ModelConfig, seed: Optional[int] = None):
        super().__init__()
        if seed is not None:
            torch.manual_seed(seed)
        self.config = config
        self.encoder = FrameEncoder(config)
        self.temporal = TemporalNet(config)
        self.heads = PredictionHeads(
            config.head_input_dim, config.n_phases, config.n_experience, config.t_max_s
        )
        self.stage_reached = 0

    def prepare_input(self, frames: np.ndarray, elapsed: np.ndarray) -> torch.Tensor:
        """(T, H, W, 3) float frames -> (T, C, H, W) tensor for the encoder."""
        frames = preprocess_video_frames(frames, self.config.frame_size)
        x = torch.from_numpy(np.ascontiguousarray(frames)).permute(0, 3, 1, 2)
        if self.config.elapsed_mode is ElapsedMode.INPUT_CHANNEL:
            t = torch.from_numpy(np.asarray(elapsed, dtype=np.float32))
            if torch.any(t < 0):
                raise ValidationError("elapsed times must be >= 0")
            x = _elapsed_channel_batch(x, t, self.config.t_max_s)
        return x

    def _head_inputs(self, video_desc: torch.Tensor, elapsed: torch.Tensor) -> torch.Tensor:
        if self.config.elapsed_mode is ElapsedMode.AFTER_RNN:
            frac = torch.clamp(elapsed / self.config.t_max_s, max=1.0)
            return torch.cat([video_desc, frac.unsqueeze(-1).to(video_desc.dtype)], dim=-1)
        return video_desc

    def forward_from_input(
        self,
        x: torch.Tensor,
        elapsed: torch.Tensor,
        state: Optional[RecurrentState] = None,
    ) -> SequenceResult:
        """Full differentiable pass over a (T, C, H, W) input block."""
        d = self.encoder(x)
        return self.forward_from_descriptors(d, elapsed, state)

    def forward_from_descriptors(
        self,
        d: torch.Tensor,
        elapsed: torch.Tensor,
        state: Optional[RecurrentState] = None,
    ) -> SequenceResult:
        """Temporal network + heads over precomputed (T, D) descriptors."""
        out, new_state = self.temporal.run(d.unsqueeze(0), state)
        vd = out[0]
        head_in = self._head_inputs(vd, elapsed)
        phase_logits, exp_logits, rsd = self.heads(head_in)
        return SequenceResult(
            phase_logits=phase_logits,
            exp_logits=exp_logits,
            rsd=rsd,
            frame_descriptors=d,
            video_descriptors=vd,
            state=new_state,
        )

    def encode_frame(self, frame: np.ndarray, elapsed_s: Optional[float] = None) -> np.ndarray:
        """Evaluate the encoder on a single frame (HxWx3 plus elapsed time,
        or an already-embedded HxWx4 tensor)."""
        was_training = self.training
        self.eval()
        try:
            if frame.ndim != 3:
                raise ValidationError(f"expected HxWxC frame, got shape {frame.shape}")
            if self.config.elapsed_mode is ElapsedMode.INPUT_CHANNEL and frame.shape[2] == 3:
                if elapsed_s is None:
                    raise ValidationError("elapsed_s required in input-channel mode")
                frame = embed_elapsed_time(frame, elapsed_s, self.config.t_max_s)
            if frame.shape[2] != self.config.encoder_in_channels:
                raise ValidationError(
                    f"expected {self.config.encoder_in_channels} channels, "
                    f"got {frame.shape[2]}"
                )
            x = torch.from_numpy(np.ascontiguousarray(frame, dtype=np.float32))
            x = x.permute(2, 0, 1).unsqueeze(0)
            with torch.no_grad():
                return self.encoder(x)[0].numpy()
        finally:
            self.train(was_training)

    def heads_from_descriptor(
        self, video_descriptor: np.ndarray, elapsed_s: float = 0.0
    ) -> NetworkOutputs:
        """Run only the prediction heads on a video descriptor."""
        vd = torch.from_numpy(np.asarray(video_descriptor, dtype=np.float32))
        if vd.numel() != self.config.video_descriptor_dim:
            raise ValidationError(
                f"descriptor length {vd.numel()} != {self.config.video_descriptor_dim}"
            )
        with torch.no_grad():
            head_in = self._head_inputs(vd.unsqueeze(0), torch.tensor([float(elapsed_s)]))
            phase_logits, exp_logits, rsd = self.heads(head_in)
            return NetworkOutputs(
                phase_probs=F.softmax(phase_logits[0], dim=-1).numpy(),
                experience_probs=F.softmax(exp_logits[0], dim=-1).numpy(),
                rsd=float(rsd[0]),
                frame_descriptor=np.zeros(self.config.frame_descriptor_dim, dtype=np.float32),
                video_descriptor=np.asarray(video_descriptor, dtype=np.float32),
            )

    def predict_video(self, video: VideoSequence) -> List[NetworkOutputs]:
        return forward_video(self, video)

    def start_session(self) -> "InferenceSession":
        return InferenceSession(self)


def forward_video(model: SurgeryNet, video: VideoSequence) -> List[NetworkOutputs]:
    """One NetworkOutputs per frame, in order, with the recurrent state reset
    at frame 0."""
    was_training = model.training
    model.eval()
    try:
        elapsed = video.elapsed_times
        with torch.no_grad():
            x = model.prepare_input(video.frames, elapsed)
            result = model.forward_from_input(
                x, torch.from_numpy(elapsed.astype(np.float32))
            )
            phase_probs = F.softmax(result.phase_logits, dim=-1).numpy()
            exp_probs = F.softmax(result.exp_logits, dim=-1).numpy()
            rsd = result.rsd.numpy()
            d = result.frame_descriptors.numpy()
            vd = result.video_descriptors.numpy()
        return [
            NetworkOutputs(
                phase_probs=phase_probs[i],
                experience_probs=exp_probs[i],
                rsd=float(rsd[i]),
                frame_descriptor=d[i],
                video_descriptor=vd[i],
            )
            for i in range(len(video))
        ]
    finally:
        model.train(was_training)


class InferenceSession:
    """Stateful frame-by-frame inference; one session per video."""

    def __init__(self, model: SurgeryNet):
        model.eval()
        self.model = model
        self.state = model.temporal.initial_state(batch=1)
        self.frame_index = 0

    def step(self, frame: np.ndarray, elapsed_s: float) -> NetworkOutputs:
        model = self.model
        frames = preprocess_video_frames(frame[None], model.config.frame_size)
        with torch.no_grad():
            x = model.prepare_input(frames, np.array([elapsed_s]))
            d = model.encoder(x)
            vd, self.state = model.temporal.step(d, self.state)
            head_in = model._head_inputs(vd, torch.tensor([float(elapsed_s)]))
            phase_logits, exp_logits, rsd = model.heads(head_in)
            outputs = NetworkOutputs(
                phase_probs=F.softmax(phase_logits[0], dim=-1).numpy(),
                experience_probs=F.softmax(exp_logits[0], dim=-1).numpy(),
                rsd=float(rsd[0]),
                frame_descriptor=d[0].numpy(),
                video_descriptor=vd[0].numpy(),
            )
        self.frame_index += 1
        return outputs
