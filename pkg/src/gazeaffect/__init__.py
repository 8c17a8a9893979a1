"""Gaze features and linear classifiers for recognizing image pleasantness."""

from .core import (
    EmotionClass,
    Fixation,
    GazeSample,
    ImageRecord,
    Saccade,
    TrialSet,
    dataset_summary,
    label_emotion_class,
)

__version__ = "0.1.0"

__all__ = [
    "EmotionClass",
    "Fixation",
    "GazeSample",
    "ImageRecord",
    "Saccade",
    "TrialSet",
    "__version__",
    "dataset_summary",
    "label_emotion_class",
]
