"""surgdur: joint remaining-surgery-duration, phase and surgeon-experience
prediction from cataract surgery video, with a synthetic benchmark."""

__version__ = "0.1.0"

from . import baselines, data, evaluation, model, training
from .errors import DatasetIOError, ValidationError
from .phases import (
    HYDRODISSECTION,
    LENS_IMPLANTATION,
    N_PHASES,
    PHASE_NAMES,
    ExperienceLevel,
    phase_name,
)

__all__ = [
    "DatasetIOError",
    "ExperienceLevel",
    "HYDRODISSECTION",
    "LENS_IMPLANTATION",
    "N_PHASES",
    "PHASE_NAMES",
    "ValidationError",
    "baselines",
    "data",
    "evaluation",
    "model",
    "phase_name",
    "training",
]
