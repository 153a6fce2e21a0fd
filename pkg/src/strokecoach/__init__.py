"""Real-time racket-stroke motion analysis and training engine.

Aligns a learner's body-joint and paddle orientation streams against
recorded expert strokes with quaternion-dissimilarity DTW, flags errors
against thresholds, and runs interactive training sessions behind an HTTP
and WebSocket service.
"""

from ._kernels import backend_name
from .align import (
    BodyCostTensor,
    ComparisonResult,
    PaddleCostMatrix,
    classify,
    dtw_body,
    dtw_paddle,
    window_compare,
)
from .quat import (
    KalmanParams,
    canonicalize,
    kalman_filter,
    normalize,
    quaternion_dissimilarity,
)
from .recording import StrokeLibrary, StrokeRecording, ingest, set_keyframes, trim
from .session import FeedbackEvent, GuidanceCue, TrainingSession, create_session
from .skeleton import (
    JointAngleFrame,
    PaddleFrame,
    PoseFrame,
    SkeletonTopology,
    default_topology,
    height_scale,
    joint_angles,
    normalize_pose,
)

__version__ = "0.1.0"

__all__ = [
    "BodyCostTensor",
    "ComparisonResult",
    "FeedbackEvent",
    "GuidanceCue",
    "JointAngleFrame",
    "KalmanParams",
    "PaddleCostMatrix",
    "PaddleFrame",
    "PoseFrame",
    "SkeletonTopology",
    "StrokeLibrary",
    "StrokeRecording",
    "TrainingSession",
    "backend_name",
    "canonicalize",
    "classify",
    "create_session",
    "default_topology",
    "dtw_body",
    "dtw_paddle",
    "height_scale",
    "ingest",
    "joint_angles",
    "kalman_filter",
    "normalize",
    "normalize_pose",
    "quaternion_dissimilarity",
    "set_keyframes",
    "trim",
    "window_compare",
]
