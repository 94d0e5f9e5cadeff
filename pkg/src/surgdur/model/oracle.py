"""Label-echoing predictor used to validate the evaluation pipeline: it
reads the ground truth off the video annotations and returns it as if it
were a model output (one-hot probabilities, exact RSD)."""

from typing import List

import numpy as np

from ..data.types import VideoSequence
from ..phases import N_PHASES
from .network import NetworkOutputs


class OracleEchoModel:
    """Perfect predictor; MAE is 0 and all accuracies are 1 by construction."""

    kind = "oracle_echo"

    def __init__(self, n_phases: int = N_PHASES, n_experience: int = 2):
        self.n_phases = n_phases
        self.n_experience = n_experience

    def predict_video(self, video: VideoSequence) -> List[NetworkOutputs]:
        outputs = []
        for ann in video.annotations:
            phase_probs = np.zeros(self.n_phases)
            phase_probs[ann.phase] = 1.0
            exp_probs = np.zeros(self.n_experience)
            exp_probs[int(ann.experience)] = 1.0
            outputs.append(
                NetworkOutputs(
                    phase_probs=phase_probs,
                    experience_probs=exp_probs,
                    rsd=float(ann.rsd_s),
                    frame_descriptor=np.zeros(1),
                    video_descriptor=np.zeros(1),
                )
            )
        return outputs
