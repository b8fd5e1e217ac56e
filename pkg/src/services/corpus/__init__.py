"""
Corpus services: labeled vector sets, trial lists, file I/O and synthetic data.
"""

from .io import load_trials, load_vectors, save_trials, save_vectors, VectorFormat
from .models import LabeledVectorSet, SpeakerGroup, Trial, TrialLabel, TrialList
from .synthetic import (
    SynthConfig,
    VerificationTask,
    generate_synthetic,
    generate_verification_task,
    split_trials,
)

__all__ = [
    "LabeledVectorSet",
    "SpeakerGroup",
    "SynthConfig",
    "Trial",
    "TrialLabel",
    "TrialList",
    "VectorFormat",
    "VerificationTask",
    "generate_synthetic",
    "generate_verification_task",
    "load_trials",
    "load_vectors",
    "save_trials",
    "save_vectors",
    "split_trials",
]
