"""Frame preprocessing: resize shorter side, center-crop, normalize to [0, 1]."""

from typing import Tuple

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import ValidationError


def preprocess_frame(raw: np.ndarray, target_size: Tuple[int, int] = (64, 64)) -> np.ndarray:
    """Map an RGB image of any size onto the model input grid.

    The shorter side is resized (bilinear) so the image covers the target,
    then the center is cropped. Inputs already at the target size pass
    through unchanged.
    """
    if not isinstance(raw, np.ndarray) or raw.ndim != 3 or raw.shape[2] != 3:
        raise ValidationError(
            f"expected an HxWx3 RGB array, got shape {getattr(raw, 'shape', None)}"
        )
    frame = raw.astype(np.float32)
    if raw.dtype == np.uint8:
        frame = frame / np.float32(255.0)
    th, tw = target_size
    h, w = frame.shape[:2]
    if (h, w) == (th, tw):
        return frame

    scale = max(th / h, tw / w)
    nh = max(th, int(round(h * scale)))
    nw = max(tw, int(round(w * scale)))
    tensor = torch.from_numpy(frame).permute(2, 0, 1).unsqueeze(0)
    resized = F.interpolate(tensor, size=(nh, nw), mode="bilinear", align_corners=False)
    top = (nh - th) // 2
    left = (nw - tw) // 2
    cropped = resized[0, :, top : top + th, left : left + tw]
    return cropped.permute(1, 2, 0).clamp(0.0, 1.0).numpy()


def preprocess_video_frames(frames: np.ndarray, target_size: Tuple[int, int]) -> np.ndarray:
    """Vectorized pass-through when already at target size, else per frame."""
    if frames.shape[1:3] == tuple(target_size):
        return frames.astype(np.float32, copy=False)
    return np.stack([preprocess_frame(f, target_size) for f in frames])
