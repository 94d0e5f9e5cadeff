"""Checkpoint persistence: a torch weight blob plus a checkpoint.json sidecar
describing the architecture, training stage reached, seed, variant and time
unit."""

import json
from pathlib import Path
from typing import Optional, Tuple, Union

import torch

from ..errors import DatasetIOError, ValidationError
from .config import ModelConfig
from .network import SurgeryNet
from .oracle import OracleEchoModel


def save_checkpoint(
    path: Union[str, Path],
    model: SurgeryNet,
    seed: int,
    variant: str = "catanet",
    fold_id: int = 0,
    time_unit: str = "s",
    schedule: Optional[dict] = None,
    label_usage: Optional[dict] = None,
    trained_on: Optional[list] = None,
) -> Path:
    """Write <path>.pt and the <path>.json sidecar; returns the .pt path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pt_path = path.with_suffix(".pt")
    sidecar = {
        "kind": "surgery_net",
        "model_config": model.config.to_dict(),
        "stage_reached": model.stage_reached,
        "seed": seed,
        "variant": variant,
        "fold_id": fold_id,
        "time_unit": time_unit,
        "schedule": schedule,
        # per-stage learning rates live in the schedule; the rest are torch defaults
        "optimizer": {"name": "adam", "betas": [0.9, 0.999], "eps": 1e-8, "weight_decay": 0.0},
        "label_usage": label_usage,
        "trained_on": trained_on,
    }
    torch.save({"state_dict": model.state_dict(), "sidecar": sidecar}, pt_path)
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2)
    return pt_path


def save_oracle_checkpoint(path: Union[str, Path]) -> Path:
    """Checkpoint stub for the label-echoing oracle (evaluation diagnostics)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sidecar = {"kind": "oracle_echo", "stage_reached": 4, "variant": "oracle", "fold_id": 0}
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2)
    return path.with_suffix(".json")


def load_checkpoint(path: Union[str, Path]) -> Tuple[object, dict]:
    """Load either a trained network (.pt) or an oracle stub (.json).

    Returns (model, sidecar)."""
    path = Path(path)
    if path.suffix == ".json" or (not path.exists() and path.with_suffix(".json").exists()):
        json_path = path if path.suffix == ".json" else path.with_suffix(".json")
        with open(json_path) as fh:
            sidecar = json.load(fh)
        if sidecar.get("kind") == "oracle_echo":
            return OracleEchoModel(), sidecar
        pt_path = json_path.with_suffix(".pt")
        if not pt_path.exists():
            raise DatasetIOError(f"missing weight blob for checkpoint {json_path}")
        path = pt_path
    if not path.exists():
        raise DatasetIOError(f"checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=False)
    sidecar = payload["sidecar"]
    if sidecar.get("kind") != "surgery_net":
        raise ValidationError(f"unknown checkpoint kind: {sidecar.get('kind')}")
    config = ModelConfig.from_dict(sidecar["model_config"])
    model = SurgeryNet(config)
    model.load_state_dict(payload["state_dict"])
    model.stage_reached = sidecar.get("stage_reached", 0)
    model.eval()
    return model, sidecar
