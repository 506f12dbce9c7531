"""Visual key-information extraction: static annotations and perspective changes."""

from .metrics import (
    histogram_distance,
    keypoint_match_ratio,
    semantic_similarity,
    ssim,
)
from .dynamic import (
    DynamicKeyframe,
    SceneBoundary,
    SimilarityProfile,
    build_profile,
    classify_boundary,
    depth_shift,
    detect_scene_boundaries,
)
from .static import (
    StaticAnnotation,
    SubtaskPlan,
    plan_static_subtasks,
    run_static_extraction,
)

__all__ = [
    "DynamicKeyframe",
    "SceneBoundary",
    "SimilarityProfile",
    "StaticAnnotation",
    "SubtaskPlan",
    "build_profile",
    "classify_boundary",
    "depth_shift",
    "detect_scene_boundaries",
    "histogram_distance",
    "keypoint_match_ratio",
    "plan_static_subtasks",
    "run_static_extraction",
    "semantic_similarity",
    "ssim",
]
