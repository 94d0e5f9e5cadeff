"""The two training objectives.

The encoder pretraining loss is the sum of phase and experience
cross-entropies on frame-level predictions; the sequence loss adds an
L1 term on the RSD prediction weighted by alpha. Cross-entropy uses
natural logs with a 1e-12 floor inside the log.
"""

import math
from typing import Sequence

import numpy as np
import torch

from ..errors import ValidationError
from ..data.types import FrameAnnotation
from ..model.network import NetworkOutputs

EPSILON = 1e-12


def _check_probs(probs: Sequence[float], label: int, name: str) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-5:
        raise ValidationError(f"invalid {name} probability vector: {p}")
    if not 0 <= label < len(p):
        raise ValidationError(f"{name} label {label} out of range for {len(p)} classes")
    return p


def cross_entropy(probs: Sequence[float], true_class: int, name: str = "class") -> float:
    """-ln p[true_class], floored at EPSILON."""
    p = _check_probs(probs, true_class, name)
    return -math.log(max(float(p[true_class]), EPSILON))


def loss_cnn(
    phase_probs: Sequence[float],
    exp_probs: Sequence[float],
    phase_label: int,
    exp_label: int,
) -> float:
    """Frame-level loss: H(phase) + H(experience)."""
    return cross_entropy(phase_probs, phase_label, "phase") + cross_entropy(
        exp_probs, exp_label, "experience"
    )


def loss_rnn(outputs: NetworkOutputs, labels: FrameAnnotation, alpha: float) -> float:
    """Per-frame sequence loss: alpha*|rsd_hat - rsd| + H(phase) + H(experience)."""
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    if not math.isfinite(outputs.rsd):
        raise ValidationError(f"non-finite rsd prediction: {outputs.rsd}")
    return alpha * abs(outputs.rsd - labels.rsd_s) + loss_cnn(
        outputs.phase_probs,
        outputs.experience_probs,
        labels.phase,
        int(labels.experience),
    )


def loss_rnn_mean(
    outputs: Sequence[NetworkOutputs],
    labels: Sequence[FrameAnnotation],
    alpha: float,
) -> float:
    """Sequence loss reduced by the mean over time steps."""
    if len(outputs) != len(labels) or not outputs:
        raise ValidationError("outputs and labels must be non-empty and equal length")
    return float(np.mean([loss_rnn(o, l, alpha) for o, l in zip(outputs, labels)]))


# ---------------------------------------------------------------------------
# differentiable batch versions used by the training loop (same math, torch)
# ---------------------------------------------------------------------------


def ce_from_logits(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Per-sample -ln(softmax(logits)[label] + EPSILON); shape (B,)."""
    probs = torch.softmax(logits, dim=-1)
    picked = probs.gather(-1, labels.unsqueeze(-1)).squeeze(-1)
    return -torch.log(picked + EPSILON)


def l1_term(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    return torch.abs(pred - target)
