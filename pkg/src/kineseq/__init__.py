"""Streaming exercise-movement recognition from body keypoints.

Keypoints become joint-angle features, features become kNN pose labels,
label runs become pose sequences, and sequences are matched to a movement
dictionary by edit distance and scored for accuracy.
"""

from .classifier import (
    ClassifiedFrame,
    EvaluationDataset,
    LabeledSample,
    classify,
    embed,
    gate_null,
    load_dataset,
    pca_project,
)
from .geometry import (
    AngleSpec,
    FeatureVector,
    Keypoint,
    RawFrame,
    angular_metric,
    euclidean_distance,
    extract_features,
    joint_angle,
    triangle_angle,
)
from .matcher import (
    MatchResult,
    MovementDictionary,
    MovementEntry,
    expand,
    generate_variants,
    levenshtein,
    load_dictionary,
    match_movement,
    parse_tokens,
)
from .pipeline import AnalysisReport, Engine, EngineConfig, load_config, run_stream
from .scorer import align, locate_inaccuracies, total_accuracy, weighted_accuracy
from .sequencer import FrameBuffer, PoseSequence, RleToken, rle_encode, segment, smooth_nulls

__version__ = "0.1.0"
