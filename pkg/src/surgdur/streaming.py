"""Frame-by-frame streaming over a stateful inference session, with optional
real-time pacing and a per-frame latency budget check. The clock and sleep
functions are injectable so pacing logic is testable."""

import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .data.types import VideoSequence
from .model.network import NetworkOutputs


@dataclass
class StreamLine:
    frame_index: int
    elapsed_s: float
    rsd_pred: float
    phase_pred: int
    p_senior: float
    latency_ms: float

    def format(self) -> str:
        return (
            f"{self.frame_index},{self.elapsed_s!r},{self.rsd_pred!r},"
            f"{self.phase_pred},{self.p_senior!r},{self.latency_ms:.3f}"
        )


@dataclass
class RealtimeSummary:
    fps: float
    budget_ms: float
    max_latency_ms: float
    mean_latency_ms: float
    within_budget: bool

    @property
    def status(self) -> str:
        return "PASS" if self.within_budget else "FAIL"


def stream_video(
    step_fn: Callable[[np.ndarray, float], NetworkOutputs],
    video: VideoSequence,
    realtime: bool = False,
    budget_ms: Optional[float] = None,
    clock: Callable[[], float] = time.perf_counter,
    sleep: Callable[[float], None] = time.sleep,
    sink: Optional[Callable[[StreamLine], None]] = None,
) -> Tuple[List[StreamLine], Optional[RealtimeSummary]]:
    """Feed frames in order through step_fn, one line per frame.

    With realtime=True, input is paced at the video's fps and the summary
    reports whether every frame stayed under the per-frame budget
    (default 1000/fps ms)."""
    if budget_ms is None:
        budget_ms = 1000.0 / video.fps
    lines: List[StreamLine] = []
    start = clock()
    for i in range(len(video)):
        ann = video.annotations[i]
        if realtime:
            due = start + i / video.fps
            wait = due - clock()
            if wait > 0:
                sleep(wait)
        t0 = clock()
        outputs = step_fn(video.frames[i], ann.elapsed_s)
        latency_ms = (clock() - t0) * 1000.0
        line = StreamLine(
            frame_index=i,
            elapsed_s=float(ann.elapsed_s),
            rsd_pred=float(outputs.rsd),
            phase_pred=int(np.argmax(outputs.phase_probs)),
            p_senior=float(outputs.experience_probs[0]),
            latency_ms=latency_ms,
        )
        lines.append(line)
        if sink is not None:
            sink(line)
    summary = None
    if realtime:
        latencies = [l.latency_ms for l in lines]
        summary = RealtimeSummary(
            fps=video.fps,
            budget_ms=budget_ms,
            max_latency_ms=max(latencies),
            mean_latency_ms=float(np.mean(latencies)),
            within_budget=max(latencies) <= budget_ms,
        )
    return lines, summary
