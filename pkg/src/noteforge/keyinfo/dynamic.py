"""Perspective-change detection: scene cuts plus a conjunction of metric criteria."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import DynamicThresholds
from ..errors import ProviderFailure
from ..ingest import FrameRecord
from .metrics import histogram_distance, keypoint_match_ratio, semantic_similarity, ssim


@dataclass(frozen=True)
class SceneBoundary:
    boundary_time: float
    pre_frame: FrameRecord
    post_frame: FrameRecord


@dataclass(frozen=True)
class SimilarityProfile:
    ssim_global: float
    ssim_center: float
    hist_distance: float
    keypoint_match_ratio: float
    semantic_sim: float
    depth_shift: float | None  # None when the depth provider was unavailable


@dataclass(frozen=True)
class DynamicKeyframe:
    boundary_time: float
    post_frame_index: int
    profile: SimilarityProfile
    low_confidence: bool = False


def detect_scene_boundaries(frames: list[FrameRecord], threshold: float = 0.30) -> list[SceneBoundary]:
    """Cut between consecutive frames whose histogram distance exceeds threshold."""
    if len(frames) < 2:
        return []
    boundaries = []
    for prev, cur in zip(frames, frames[1:]):
        if histogram_distance(prev.image, cur.image) > threshold:
            boundaries.append(SceneBoundary(boundary_time=cur.timestamp,
                                            pre_frame=prev, post_frame=cur))
    return boundaries


def depth_shift(depth_provider, frame_a: FrameRecord, frame_b: FrameRecord) -> float:
    """Absolute difference of the two frames' median relative depth."""
    da = depth_provider.estimate_depth(frame_a)
    db = depth_provider.estimate_depth(frame_b)
    return float(abs(np.median(da) - np.median(db)))


def build_profile(boundary: SceneBoundary, embed_provider, depth_provider,
                  warnings: list[str] | None = None) -> SimilarityProfile:
    """Compute all six criteria metrics for one boundary's frame pair.

    A depth provider failure leaves depth_shift as None (the criterion is
    then vacuously satisfied and the result flagged low-confidence).
    """
    a, b = boundary.pre_frame, boundary.post_frame
    shift: float | None
    try:
        shift = depth_shift(depth_provider, a, b)
    except ProviderFailure as exc:
        shift = None
        if warnings is not None:
            warnings.append(f"depth unavailable at {boundary.boundary_time:.3f}s: {exc}")
    return SimilarityProfile(
        ssim_global=ssim(a.image, b.image),
        ssim_center=ssim(a.image, b.image, center=True),
        hist_distance=histogram_distance(a.image, b.image),
        keypoint_match_ratio=keypoint_match_ratio(a.image, b.image),
        semantic_sim=semantic_similarity(embed_provider, a, b),
        depth_shift=shift,
    )


def classify_boundary(boundary: SceneBoundary, profile: SimilarityProfile,
                      thresholds: DynamicThresholds | None = None) -> DynamicKeyframe | None:
    """Emit a dynamic keyframe only when every criterion holds.

    The semantic floor keeps same-entity transitions (a zoom onto the thing
    already on screen) and rejects hard cuts to unrelated content; the
    remaining criteria require the views to differ structurally.
    """
    th = thresholds or DynamicThresholds()
    checks = [
        profile.semantic_sim >= th.semantic_min,
        profile.keypoint_match_ratio >= th.keypoint_min,
        profile.ssim_global <= th.ssim_global_max,
        profile.ssim_center <= th.ssim_center_max,
        profile.hist_distance >= th.hist_min,
        profile.depth_shift is None or profile.depth_shift >= th.depth_min,
    ]
    if not all(checks):
        return None
    return DynamicKeyframe(
        boundary_time=boundary.boundary_time,
        post_frame_index=boundary.post_frame.index,
        profile=profile,
        low_confidence=profile.depth_shift is None,
    )
