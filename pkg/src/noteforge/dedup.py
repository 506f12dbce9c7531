"""Keyframe redundancy filtering: dual similarity filters and intersection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, MismatchedSource, ZeroVector


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two embedding vectors."""
    va = np.asarray(getattr(a, "values", a), dtype=np.float64)
    vb = np.asarray(getattr(b, "values", b), dtype=np.float64)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"dims {va.shape} vs {vb.shape}")
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine undefined for a zero vector")
    return float(np.dot(va, vb) / (na * nb))


@dataclass(frozen=True)
class FilteredSet:
    """Indices kept by one similarity filter over a frame sequence."""

    kept_indices: tuple[int, ...]
    modality: str
    threshold: float
    source_len: int

    def __post_init__(self):
        if not self.kept_indices or self.kept_indices[0] != 0:
            raise ValueError("index 0 must be kept")
        if list(self.kept_indices) != sorted(set(self.kept_indices)):
            raise ValueError("indices must be strictly increasing")
        if self.kept_indices[-1] >= self.source_len:
            raise ValueError("index beyond source sequence")


@dataclass(frozen=True)
class KeyframeSet:
    indices: tuple[int, ...] = field(default_factory=tuple)


def filter_by_similarity(embeddings, threshold: float, modality: str = "semantic_image",
                         mode: str = "consecutive") -> FilteredSet:
    """Keep frame 0, then every frame whose similarity to its reference frame
    falls below ``threshold``.

    ``consecutive`` compares each frame with its immediate predecessor. The
    opt-in ``last_kept`` mode compares against the most recently kept frame,
    which catches slow drifts at the cost of the threshold-monotonicity
    property.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    if len(embeddings) == 0:
        raise ValueError("empty embedding sequence")
    if mode not in ("consecutive", "last_kept"):
        raise ValueError(f"unknown mode: {mode}")

    kept = [0]
    last_kept = 0
    for i in range(1, len(embeddings)):
        ref = i - 1 if mode == "consecutive" else last_kept
        if cosine_similarity(embeddings[ref], embeddings[i]) < threshold:
            kept.append(i)
            last_kept = i
    return FilteredSet(kept_indices=tuple(kept), modality=modality,
                       threshold=threshold, source_len=len(embeddings))


def intersect_keyframes(sem: FilteredSet, vis: FilteredSet) -> KeyframeSet:
    """Frames kept by both filters; frame 0 is present by construction."""
    if sem.source_len != vis.source_len:
        raise MismatchedSource(f"source lengths differ: {sem.source_len} vs {vis.source_len}")
    common = set(sem.kept_indices) & set(vis.kept_indices)
    result = KeyframeSet(indices=tuple(sorted(common)))
    assert set(result.indices) <= set(sem.kept_indices)
    assert set(result.indices) <= set(vis.kept_indices)
    return result
