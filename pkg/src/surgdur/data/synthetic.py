"""Synthetic cataract-like video generator.

Every video carries a per-frame phase cue (background hue plus a striped
pattern unique to the phase), a moving tool-like shape whose angular speed
depends on surgeon experience (seniors move faster), and pixel noise.
Phase identity is decodable from a single frame; experience is only
decodable from dynamics and durations.
"""

import colorsys
from typing import List, Optional

import numpy as np

from ..errors import ValidationError
from ..phases import N_PHASES, ExperienceLevel
from .types import FrameAnnotation, SurgerySpec, VideoSequence

# fraction of the expected total duration spent in each of the 10 phases
PHASE_FRACTIONS = np.array(
    [0.06, 0.05, 0.10, 0.07, 0.28, 0.12, 0.06, 0.10, 0.09, 0.07]
)

# expected total durations in time units (senior surgeries are shorter and
# less variable)
SENIOR_MEAN_TOTAL = 5.6
ASSISTANT_MEAN_TOTAL = 11.8
SENIOR_REL_STD = 0.06
ASSISTANT_REL_STD = 0.10

# tool sweep speed in radians per time unit; the senior factor is the
# dynamics-only experience cue
TOOL_BASE_SPEED = 0.45
SENIOR_SPEED_FACTOR = 1.6

# phase backgrounds: evenly spaced hues so single frames identify the phase
PHASE_PALETTE = np.array(
    [colorsys.hsv_to_rgb(k / N_PHASES, 0.55, 0.75) for k in range(N_PHASES)],
    dtype=np.float64,
)

TOOL_COLOR = np.array([0.97, 0.97, 0.99])


def default_surgery_spec(
    experience: ExperienceLevel,
    total_mean_s: Optional[float] = None,
    rel_std: Optional[float] = None,
    frame_size=(64, 64),
    fps: float = 2.5,
    noise_level: float = 0.05,
    time_scale: float = 1.0,
) -> SurgerySpec:
    """Build a spec from the canonical per-phase duration profile.

    Defaults give expected totals of 5.6 (senior) and 11.8 (assistant)
    time units; pass total_mean_s to rescale (e.g. 60/120 for desk runs
    in seconds).
    """
    if total_mean_s is None:
        total_mean_s = (
            SENIOR_MEAN_TOTAL
            if experience is ExperienceLevel.SENIOR
            else ASSISTANT_MEAN_TOTAL
        )
    if rel_std is None:
        rel_std = (
            SENIOR_REL_STD
            if experience is ExperienceLevel.SENIOR
            else ASSISTANT_REL_STD
        )
    means = PHASE_FRACTIONS * total_mean_s
    stds = means * rel_std
    return SurgerySpec(
        experience=experience,
        phase_duration_means_s=means.tolist(),
        phase_duration_stds_s=stds.tolist(),
        frame_size=tuple(frame_size),
        fps=fps,
        noise_level=noise_level,
        time_scale=time_scale,
    )


def _phase_base_frames(h: int, w: int) -> np.ndarray:
    """Pre-render the 10 static phase backgrounds: solid hue + stripes whose
    angle and frequency are unique per phase."""
    yy, xx = np.meshgrid(
        np.linspace(0.0, 1.0, h, endpoint=False),
        np.linspace(0.0, 1.0, w, endpoint=False),
        indexing="ij",
    )
    bases = np.empty((N_PHASES, h, w, 3), dtype=np.float64)
    for k in range(N_PHASES):
        angle = np.pi * k / N_PHASES
        coord = np.cos(angle) * xx + np.sin(angle) * yy
        stripes = np.sign(np.sin(2.0 * np.pi * (2.0 + 0.5 * k) * coord))
        base = PHASE_PALETTE[k][None, None, :] + 0.10 * stripes[:, :, None]
        bases[k] = np.clip(base, 0.0, 1.0)
    return bases


def _tool_mask(h: int, w: int, cx: float, cy: float, radius: float) -> np.ndarray:
    yy, xx = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= radius**2


def generate_synthetic_video(
    spec: SurgerySpec,
    seed: int,
    video_id: Optional[str] = None,
    surgeon_id: Optional[str] = None,
) -> VideoSequence:
    """Render one synthetic surgery. Deterministic for a fixed (spec, seed):
    repeated calls return byte-identical frames and annotations."""
    rng = np.random.default_rng(seed)
    means = np.asarray(spec.phase_duration_means_s, dtype=np.float64)
    stds = np.asarray(spec.phase_duration_stds_s, dtype=np.float64)

    # one duration draw per phase, clipped at 0.2x the mean
    durations = rng.normal(means, stds)
    durations = np.maximum(durations, 0.2 * means)
    boundaries = np.cumsum(durations)
    total = float(boundaries[-1])

    n_frames = int(np.floor(total * spec.fps - 1e-9)) + 1
    times = np.arange(n_frames) / spec.fps
    phase_ids = np.minimum(
        np.searchsorted(boundaries, times, side="right"), N_PHASES - 1
    )

    h, w = spec.frame_size
    bases = _phase_base_frames(h, w)
    tool_radius = max(2.0, 0.07 * min(h, w))
    sweep_radius_x = 0.30 * w
    sweep_radius_y = 0.30 * h
    speed = TOOL_BASE_SPEED * (
        SENIOR_SPEED_FACTOR if spec.experience is ExperienceLevel.SENIOR else 1.0
    )
    phase_x = rng.uniform(0.0, 2.0 * np.pi)
    phase_y = rng.uniform(0.0, 2.0 * np.pi)

    frames_u8 = np.empty((n_frames, h, w, 3), dtype=np.uint8)
    annotations: List[FrameAnnotation] = []
    for i in range(n_frames):
        t = float(times[i])
        frame = bases[phase_ids[i]].copy()
        cx = w / 2.0 + sweep_radius_x * np.cos(speed * t + phase_x)
        cy = h / 2.0 + sweep_radius_y * np.sin(0.71 * speed * t + phase_y)
        mask = _tool_mask(h, w, cx, cy, tool_radius)
        frame[mask] = 0.25 * frame[mask] + 0.75 * TOOL_COLOR
        if spec.noise_level > 0:
            frame += rng.normal(0.0, spec.noise_level, frame.shape)
        frames_u8[i] = np.clip(np.round(frame * 255.0), 0, 255).astype(np.uint8)
        annotations.append(
            FrameAnnotation(
                frame_index=i,
                elapsed_s=t,
                phase=int(phase_ids[i]),
                rsd_s=total - t,
                experience=spec.experience,
            )
        )

    # quantize to the 8-bit grid so PNG round-trips are exact
    frames = frames_u8.astype(np.float32) / np.float32(255.0)
    if video_id is None:
        video_id = f"synth-{seed:08d}"
    if surgeon_id is None:
        surgeon_id = f"{spec.experience.label}-0"
    return VideoSequence(
        video_id=video_id,
        frames=frames,
        annotations=annotations,
        fps=spec.fps,
        surgeon_id=surgeon_id,
    )


def generate_corpus(
    n_videos: int,
    seed: int,
    senior_total_mean_s: Optional[float] = None,
    assistant_total_mean_s: Optional[float] = None,
    surgeons_per_level: int = 1,
    frame_size=(64, 64),
    fps: float = 2.5,
    noise_level: float = 0.05,
    rel_std: Optional[float] = None,
    time_scale: float = 1.0,
) -> List[VideoSequence]:
    """Generate a corpus split evenly between senior and assistant surgeons,
    with video ids v000, v001, ... Deterministic under seed."""
    if n_videos < 1:
        raise ValidationError(f"n_videos must be >= 1, got {n_videos}")
    if surgeons_per_level < 1:
        raise ValidationError("surgeons_per_level must be >= 1")
    specs = {
        ExperienceLevel.SENIOR: default_surgery_spec(
            ExperienceLevel.SENIOR,
            total_mean_s=senior_total_mean_s,
            rel_std=rel_std,
            frame_size=frame_size,
            fps=fps,
            noise_level=noise_level,
            time_scale=time_scale,
        ),
        ExperienceLevel.ASSISTANT: default_surgery_spec(
            ExperienceLevel.ASSISTANT,
            total_mean_s=assistant_total_mean_s,
            rel_std=rel_std,
            frame_size=frame_size,
            fps=fps,
            noise_level=noise_level,
            time_scale=time_scale,
        ),
    }
    videos = []
    for idx in range(n_videos):
        level = ExperienceLevel.SENIOR if idx % 2 == 0 else ExperienceLevel.ASSISTANT
        surgeon = f"{level.label}-{(idx // 2) % surgeons_per_level}"
        videos.append(
            generate_synthetic_video(
                specs[level],
                seed=seed * 100003 + idx,
                video_id=f"v{idx:03d}",
                surgeon_id=surgeon,
            )
        )
    return videos
