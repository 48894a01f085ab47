"""EEG mental-workload indexes: denoising, band-power indexes, feature extraction, selection and evaluation."""

from .records import Condition, EegRecording, FeatureMatrix, Rating, WorkloadClass

__version__ = "0.1.0"

__all__ = ["Condition", "EegRecording", "FeatureMatrix", "Rating", "WorkloadClass", "__version__"]
