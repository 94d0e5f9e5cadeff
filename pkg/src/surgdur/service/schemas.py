"""Pydantic request/response models for the inference service."""

from typing import List, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    variant: Optional[str] = None
    stage_reached: Optional[int] = None


class ModelInfo(BaseModel):
    variant: str
    elapsed_mode: str
    frame_size: List[int]
    t_max_s: float
    n_phases: int
    time_unit: str
    stage_reached: int
    phase_names: List[str]


class SessionCreateRequest(BaseModel):
    video_id: Optional[str] = None
    fps: float = Field(default=2.5, gt=0)


class SessionCreateResponse(BaseModel):
    session_id: str
    video_id: Optional[str] = None
    fps: float


class FrameRequest(BaseModel):
    frame_png_base64: str
    elapsed_s: Optional[float] = Field(default=None, ge=0)


class FramePrediction(BaseModel):
    frame_index: int
    elapsed_s: float
    rsd_pred: float
    phase_pred: int
    phase_name: str
    p_senior: float
    phase_probs: List[float]
    latency_ms: float


class SessionSummary(BaseModel):
    session_id: str
    video_id: Optional[str] = None
    fps: float
    frames_processed: int
