from .io import load_dataset, load_manifest, save_dataset
from .ops import compute_rsd_labels, split_dataset, stratified_sample, temporal_downsample
from .synthetic import default_surgery_spec, generate_corpus, generate_synthetic_video
from .types import DatasetSplit, FrameAnnotation, SurgerySpec, VideoSequence

__all__ = [
    "DatasetSplit",
    "FrameAnnotation",
    "SurgerySpec",
    "VideoSequence",
    "compute_rsd_labels",
    "default_surgery_spec",
    "generate_corpus",
    "generate_synthetic_video",
    "load_dataset",
    "load_manifest",
    "save_dataset",
    "split_dataset",
    "stratified_sample",
    "temporal_downsample",
]
