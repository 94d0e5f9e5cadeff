"""Surgical phase vocabulary and surgeon experience levels.

The 10-phase index scheme is a repo convention: index 3 is Hydrodissection
(the anchor for the MAE@Hyd metric) and index 7 is Lens implantation.
"""

from enum import IntEnum

N_PHASES = 10

PHASE_NAMES = [
    "Incision",
    "Viscoelastic injection",
    "Capsulorhexis",
    "Hydrodissection",
    "Phacoemulsification",
    "Cortex removal",
    "Capsule polishing",
    "Lens implantation",
    "Viscoelastic removal",
    "Wound sealing",
]

HYDRODISSECTION = 3
LENS_IMPLANTATION = 7


class ExperienceLevel(IntEnum):
    SENIOR = 0
    ASSISTANT = 1

    @property
    def label(self) -> str:
        return "senior" if self is ExperienceLevel.SENIOR else "assistant"

    @classmethod
    def from_label(cls, label: str) -> "ExperienceLevel":
        key = label.strip().lower()
        if key == "senior":
            return cls.SENIOR
        if key == "assistant":
            return cls.ASSISTANT
        raise ValueError(f"unknown experience label: {label!r}")


def phase_name(index: int) -> str:
    if not 0 <= index < N_PHASES:
        raise ValueError(f"phase index out of range: {index}")
    return PHASE_NAMES[index]
