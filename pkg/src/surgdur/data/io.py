"""On-disk dataset layout.

<root>/manifest.json                  ids, fps, frame size, time unit
<root>/<video_id>/frames/%06d.png     8-bit RGB, lossless
<root>/<video_id>/annotations.csv     frame_index,elapsed_s,phase_id,rsd_s,experience,surgeon_id

Frames are quantized to the 8-bit grid at generation time, so a save/load
round trip reproduces them exactly.
"""

import csv
import json
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
from PIL import Image

from ..errors import DatasetIOError
from ..phases import ExperienceLevel
from .types import FrameAnnotation, VideoSequence

ANNOTATION_HEADER = ["frame_index", "elapsed_s", "phase_id", "rsd_s", "experience", "surgeon_id"]


def save_dataset(
    videos: Sequence[VideoSequence], root_path: Union[str, Path], time_unit: str = "s"
) -> None:
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for video in videos:
        vdir = root / video.video_id
        frames_dir = vdir / "frames"
        frames_dir.mkdir(parents=True, exist_ok=True)
        for i in range(len(video)):
            u8 = np.clip(np.round(video.frames[i] * 255.0), 0, 255).astype(np.uint8)
            Image.fromarray(u8, mode="RGB").save(frames_dir / f"{i:06d}.png")
        with open(vdir / "annotations.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ANNOTATION_HEADER)
            for ann in video.annotations:
                writer.writerow(
                    [
                        ann.frame_index,
                        repr(float(ann.elapsed_s)),
                        ann.phase,
                        repr(float(ann.rsd_s)),
                        ann.experience.label,
                        video.surgeon_id,
                    ]
                )
        h, w = video.frames.shape[1:3]
        entries.append(
            {
                "video_id": video.video_id,
                "fps": video.fps,
                "frame_size": [int(h), int(w)],
                "n_frames": len(video),
                "surgeon_id": video.surgeon_id,
                "experience": video.experience.label,
            }
        )
    manifest = {"videos": entries, "time_unit": time_unit}
    with open(root / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)


def load_manifest(root_path: Union[str, Path]) -> dict:
    root = Path(root_path)
    path = root / "manifest.json"
    if not path.exists():
        raise DatasetIOError(f"no manifest.json under {root}")
    with open(path) as fh:
        return json.load(fh)


def load_dataset(root_path: Union[str, Path]) -> List[VideoSequence]:
    """Load every video listed in the manifest. An empty or manifest-less
    directory with no video folders yields an empty list."""
    root = Path(root_path)
    if not root.exists():
        raise DatasetIOError(f"dataset root does not exist: {root}")
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        subdirs = [p for p in root.iterdir() if p.is_dir()]
        if not subdirs:
            return []
        raise DatasetIOError(f"no manifest.json under {root}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)

    videos = []
    for entry in manifest["videos"]:
        videos.append(_load_video(root, entry))
    return videos


def _load_video(root: Path, entry: dict) -> VideoSequence:
    video_id = entry["video_id"]
    vdir = root / video_id
    ann_path = vdir / "annotations.csv"
    if not ann_path.exists():
        raise DatasetIOError(f"video {video_id}: missing {ann_path}")
    annotations: List[FrameAnnotation] = []
    surgeon_id = entry.get("surgeon_id", "")
    with open(ann_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ANNOTATION_HEADER:
            raise DatasetIOError(
                f"video {video_id}: unexpected annotation header {reader.fieldnames}"
            )
        for row in reader:
            annotations.append(
                FrameAnnotation(
                    frame_index=int(row["frame_index"]),
                    elapsed_s=float(row["elapsed_s"]),
                    phase=int(row["phase_id"]),
                    rsd_s=float(row["rsd_s"]),
                    experience=ExperienceLevel.from_label(row["experience"]),
                )
            )
            surgeon_id = row["surgeon_id"]

    frames_dir = vdir / "frames"
    frame_paths = sorted(frames_dir.glob("*.png")) if frames_dir.exists() else []
    if len(frame_paths) != len(annotations):
        raise DatasetIOError(
            f"video {video_id}: {len(frame_paths)} frames on disk but "
            f"{len(annotations)} annotation rows"
        )
    if not frame_paths:
        raise DatasetIOError(f"video {video_id}: no frames")
    frames = np.stack(
        [np.asarray(Image.open(p).convert("RGB"), dtype=np.uint8) for p in frame_paths]
    )
    return VideoSequence(
        video_id=video_id,
        frames=frames.astype(np.float32) / np.float32(255.0),
        annotations=annotations,
        fps=float(entry["fps"]),
        surgeon_id=surgeon_id,
    )
