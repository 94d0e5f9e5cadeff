"""Inference throughput measurement: warm up, then time each of the next
n_measure frames. The clock and the per-frame work are injectable so the
protocol itself is testable with a deterministic clock."""

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import ValidationError


@dataclass
class SpeedStats:
    mean_ms: float
    std_ms: float
    fps: float
    n_warmup: int
    n_measure: int

    def to_dict(self) -> dict:
        return {
            "mean_ms": self.mean_ms,
            "std_ms": self.std_ms,
            "fps": self.fps,
            "n_warmup": self.n_warmup,
            "n_measure": self.n_measure,
        }


def measure_inference_speed(
    model=None,
    n_warmup: int = 100,
    n_measure: int = 1000,
    clock: Optional[Callable[[], float]] = None,
    step_fn: Optional[Callable[[int], None]] = None,
) -> SpeedStats:
    """Wall-clock per-frame time over n_measure frames after n_warmup
    warm-up frames. Pass step_fn/clock to measure something other than a
    live inference session."""
    if n_warmup < 0 or n_measure < 1:
        raise ValidationError("need n_warmup >= 0 and n_measure >= 1")
    if clock is None:
        clock = time.perf_counter
    if step_fn is None:
        if model is None:
            raise ValidationError("need a model or an injected step_fn")
        session = model.start_session()
        h, w = model.config.frame_size
        frame = np.full((h, w, 3), 0.5, dtype=np.float32)
        fps = 2.5

        def step_fn(i: int) -> None:
            session.step(frame, i / fps)

    samples_ms = []
    for i in range(n_warmup + n_measure):
        t0 = clock()
        step_fn(i)
        t1 = clock()
        if i >= n_warmup:
            samples_ms.append((t1 - t0) * 1000.0)
    mean_ms = float(np.mean(samples_ms))
    std_ms = float(np.std(samples_ms))
    return SpeedStats(
        mean_ms=mean_ms,
        std_ms=std_ms,
        fps=1000.0 / mean_ms if mean_ms > 0 else float("inf"),
        n_warmup=n_warmup,
        n_measure=n_measure,
    )
