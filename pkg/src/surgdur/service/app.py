"""FastAPI inference service.

Wraps one loaded checkpoint; clients open a session per video and stream
frames to it, receiving the joint RSD/phase/experience prediction per frame.
Sessions hold the recurrent state, so frames must arrive in order.
"""

import base64
import io
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
from fastapi import FastAPI, HTTPException
from PIL import Image

from ..errors import ValidationError
from ..model.checkpoint import load_checkpoint
from ..model.network import InferenceSession, SurgeryNet
from ..phases import PHASE_NAMES, ExperienceLevel
from .schemas import (
    FramePrediction,
    FrameRequest,
    HealthResponse,
    ModelInfo,
    SessionCreateRequest,
    SessionCreateResponse,
    SessionSummary,
)


@dataclass
class _SessionState:
    session: InferenceSession
    fps: float
    video_id: Optional[str] = None
    frames_processed: int = 0


@dataclass
class ServiceState:
    model: SurgeryNet
    sidecar: dict
    sessions: Dict[str, _SessionState] = field(default_factory=dict)


def _decode_frame(payload: str) -> np.ndarray:
    try:
        raw = base64.b64decode(payload, validate=True)
        image = Image.open(io.BytesIO(raw)).convert("RGB")
    except Exception as err:
        raise HTTPException(status_code=422, detail=f"undecodable frame: {err}") from err
    return np.asarray(image, dtype=np.uint8).astype(np.float32) / np.float32(255.0)


def create_app(
    checkpoint: Optional[Union[str, Path]] = None,
    model: Optional[SurgeryNet] = None,
    sidecar: Optional[dict] = None,
) -> FastAPI:
    """Build the service around a checkpoint path or an in-memory model."""
    if model is None:
        if checkpoint is None:
            raise ValidationError("create_app needs a checkpoint path or a model")
        model, sidecar = load_checkpoint(checkpoint)
        if not isinstance(model, SurgeryNet):
            raise ValidationError("the service needs a trained network checkpoint")
    state = ServiceState(model=model, sidecar=sidecar or {})

    app = FastAPI(title="surgdur inference service", version="0.1.0")
    app.state.service = state

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok",
            variant=state.sidecar.get("variant"),
            stage_reached=state.sidecar.get("stage_reached"),
        )

    @app.get("/model", response_model=ModelInfo)
    def model_info() -> ModelInfo:
        config = state.model.config
        return ModelInfo(
            variant=state.sidecar.get("variant", "catanet"),
            elapsed_mode=config.elapsed_mode.value,
            frame_size=list(config.frame_size),
            t_max_s=config.t_max_s,
            n_phases=config.n_phases,
            time_unit=state.sidecar.get("time_unit", "s"),
            stage_reached=state.sidecar.get("stage_reached", 0),
            phase_names=PHASE_NAMES,
        )

    @app.post("/sessions", response_model=SessionCreateResponse)
    def create_session(request: SessionCreateRequest) -> SessionCreateResponse:
        session_id = uuid.uuid4().hex
        state.sessions[session_id] = _SessionState(
            session=state.model.start_session(),
            fps=request.fps,
            video_id=request.video_id,
        )
        return SessionCreateResponse(
            session_id=session_id, video_id=request.video_id, fps=request.fps
        )

    def _get_session(session_id: str) -> _SessionState:
        if session_id not in state.sessions:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return state.sessions[session_id]

    @app.post("/sessions/{session_id}/frames", response_model=FramePrediction)
    def push_frame(session_id: str, request: FrameRequest) -> FramePrediction:
        entry = _get_session(session_id)
        frame = _decode_frame(request.frame_png_base64)
        elapsed = request.elapsed_s
        if elapsed is None:
            elapsed = entry.frames_processed / entry.fps
        t0 = time.perf_counter()
        try:
            outputs = entry.session.step(frame, elapsed)
        except ValidationError as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        latency_ms = (time.perf_counter() - t0) * 1000.0
        index = entry.frames_processed
        entry.frames_processed += 1
        phase = int(np.argmax(outputs.phase_probs))
        return FramePrediction(
            frame_index=index,
            elapsed_s=float(elapsed),
            rsd_pred=float(outputs.rsd),
            phase_pred=phase,
            phase_name=PHASE_NAMES[phase],
            p_senior=float(outputs.experience_probs[int(ExperienceLevel.SENIOR)]),
            phase_probs=[float(p) for p in outputs.phase_probs],
            latency_ms=latency_ms,
        )

    @app.get("/sessions/{session_id}", response_model=SessionSummary)
    def session_summary(session_id: str) -> SessionSummary:
        entry = _get_session(session_id)
        return SessionSummary(
            session_id=session_id,
            video_id=entry.video_id,
            fps=entry.fps,
            frames_processed=entry.frames_processed,
        )

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str) -> dict:
        _get_session(session_id)
        del state.sessions[session_id]
        return {"closed": session_id}

    return app
