"""Finite-difference verification of the loss gradients on a tiny model
(small enough that central differences over every parameter stay cheap)."""

from typing import Callable, Dict, List, Tuple

import torch

from ..errors import ValidationError
from ..model.config import ElapsedMode, ModelConfig
from ..model.network import CnnAuxHeads, SurgeryNet
from .losses import ce_from_logits, l1_term


def tiny_model_config(elapsed_mode: ElapsedMode = ElapsedMode.INPUT_CHANNEL) -> ModelConfig:
    return ModelConfig(
        frame_size=(8, 8),
        encoder_channels=[4],
        frame_descriptor_dim=8,
        video_descriptor_dim=8,
        recurrent_layers=1,
        t_max_s=10.0,
        elapsed_mode=elapsed_mode,
    )


def analytic_gradients(
    loss_fn: Callable[[], torch.Tensor], model: torch.nn.Module
) -> Dict[str, torch.Tensor]:
    for p in model.parameters():
        p.grad = None
    loss_fn().backward()
    return {
        name: (p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p))
        for name, p in model.named_parameters()
        if p.requires_grad
    }


def gradient_check(
    loss_fn: Callable[[], torch.Tensor],
    model: torch.nn.Module,
    h: float = 1e-4,
    param_limit: int = 2000,
) -> float:
    """Max relative error between autograd and central finite differences,
    taken over every parameter element. Run the model in float64."""
    params = [p for p in model.parameters() if p.requires_grad]
    total = sum(p.numel() for p in params)
    if total > param_limit:
        raise ValidationError(f"{total} parameters exceed the {param_limit} limit")
    grads = analytic_gradients(loss_fn, model)
    named = [(n, p) for n, p in model.named_parameters() if p.requires_grad]

    max_rel = 0.0
    with torch.no_grad():
        for name, p in named:
            flat = p.data.view(-1)
            gflat = grads[name].view(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + h
                lp = float(loss_fn())
                flat[i] = orig - h
                lm = float(loss_fn())
                flat[i] = orig
                fd = (lp - lm) / (2.0 * h)
                a = float(gflat[i])
                denom = max(abs(a), abs(fd), 1e-6)
                max_rel = max(max_rel, abs(a - fd) / denom)
    return max_rel


def make_cnn_loss_case(seed: int = 0) -> Tuple[Callable[[], torch.Tensor], torch.nn.Module]:
    """Frame-level loss (phase + experience cross-entropy) on a 3-frame batch."""
    torch.manual_seed(seed)
    config = tiny_model_config()
    net = SurgeryNet(config).double()
    aux = CnnAuxHeads(config.frame_descriptor_dim).double()
    container = torch.nn.ModuleDict({"encoder": net.encoder, "aux": aux})
    x = torch.rand(3, 4, 8, 8, dtype=torch.float64)
    phase_y = torch.tensor([1, 7, 3])
    exp_y = torch.tensor([0, 1, 0])

    def loss_fn() -> torch.Tensor:
        out = aux(net.encoder(x))
        return (
            ce_from_logits(out["phase_logits"], phase_y).mean()
            + ce_from_logits(out["exp_logits"], exp_y).mean()
        )

    return loss_fn, container


def make_rnn_loss_case(
    seed: int = 0, alpha: float = 1.0
) -> Tuple[Callable[[], torch.Tensor], torch.nn.Module, List[str]]:
    """Sequence loss on a 4-frame clip; the RSD targets sit far from the
    initial predictions so the L1 kink is never crossed by the probes."""
    torch.manual_seed(seed)
    config = tiny_model_config()
    model = SurgeryNet(config).double()
    x = torch.rand(4, 4, 8, 8, dtype=torch.float64)
    elapsed = torch.tensor([0.0, 1.0, 2.0, 3.0], dtype=torch.float64)
    phase_y = torch.tensor([0, 2, 5, 9])
    exp_y = torch.tensor([1, 1, 1, 1])
    with torch.no_grad():
        initial_rsd = model.forward_from_input(x, elapsed).rsd
    rsd_y = initial_rsd + 5.0  # fixed offset keeps |pred - target| away from 0

    def loss_fn() -> torch.Tensor:
        result = model.forward_from_input(x, elapsed)
        return (
            alpha * l1_term(result.rsd, rsd_y).mean()
            + ce_from_logits(result.phase_logits, phase_y).mean()
            + ce_from_logits(result.exp_logits, exp_y).mean()
        )

    rsd_head_params = [f"heads.rsd.{n}" for n, _ in model.heads.rsd.named_parameters()]
    return loss_fn, model, rsd_head_params
