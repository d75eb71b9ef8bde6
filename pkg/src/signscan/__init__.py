"""Road-sign detection: colour segmentation, randomized Hough ellipses and a
texture/moment classifier, plus a synthetic benchmark to measure it."""

from .evaluation import (
    DetectionRecord, MatchCounts, match_detections, pr_curve, precision_recall,
)
from .features import FeatureVector, feature_vector
from .learn import SignClassifier, fit_classifier, load_model, save_model
from .pipeline import PipelineConfig, find_candidates, run_pipeline, train_on_scenes
from .rht import Ellipse, RhtConfig, rht_detect
from .segmentation import Channel, SegmentationConfig, segment
from .synth import GroundTruth, SceneConfig, synth_scene

__version__ = "0.1.0"

__all__ = [
    "Channel", "DetectionRecord", "Ellipse", "FeatureVector", "GroundTruth", "MatchCounts",
    "PipelineConfig", "RhtConfig", "SceneConfig", "SegmentationConfig", "SignClassifier",
    "feature_vector", "find_candidates", "fit_classifier", "load_model", "match_detections",
    "pr_curve", "precision_recall", "rht_detect", "run_pipeline", "save_model", "segment",
    "synth_scene", "train_on_scenes", "__version__",
]
