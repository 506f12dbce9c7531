"""Perceptual similarity metrics between frame pairs.

All metrics are local computations except semantic_similarity, which goes
through the embedding provider.
"""

from __future__ import annotations

import cv2
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..dedup import cosine_similarity
from ..errors import DimensionMismatch
from ..rasters import center_crop, luminance

SSIM_WINDOW = 8
SSIM_STRIDE = 4
SSIM_C1 = (0.01 * 255) ** 2
SSIM_C2 = (0.03 * 255) ** 2

HIST_BINS = 32

# An octave step of sqrt(2) puts a 2x zoom exactly two pyramid levels apart,
# which is the scale change perspective cuts typically exhibit.
ORB_PARAMS = dict(nfeatures=800, scaleFactor=2.0 ** 0.5, nlevels=8)
RATIO_TEST = 0.75


def ssim(a: np.ndarray, b: np.ndarray, center: bool = False) -> float:
    """Mean structural similarity over 8x8 luma windows at stride 4.

    Images smaller than one window are compared as a single whole-image
    window. ``center`` restricts both images to their central 50% region
    first.
    """
    if a.shape != b.shape:
        raise DimensionMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    if center:
        a, b = center_crop(a), center_crop(b)
    la, lb = luminance(a), luminance(b)
    h, w = la.shape
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        return _window_ssim(la[None, None], lb[None, None])[0, 0].item()

    wa = sliding_window_view(la, (SSIM_WINDOW, SSIM_WINDOW))[::SSIM_STRIDE, ::SSIM_STRIDE]
    wb = sliding_window_view(lb, (SSIM_WINDOW, SSIM_WINDOW))[::SSIM_STRIDE, ::SSIM_STRIDE]
    return float(np.mean(_window_ssim(wa, wb)))


def _window_ssim(wa: np.ndarray, wb: np.ndarray) -> np.ndarray:
    """Per-window SSIM with population moments over the trailing two axes."""
    mu_a = wa.mean(axis=(-2, -1))
    mu_b = wb.mean(axis=(-2, -1))
    var_a = (wa ** 2).mean(axis=(-2, -1)) - mu_a ** 2
    var_b = (wb ** 2).mean(axis=(-2, -1)) - mu_b ** 2
    cov = (wa * wb).mean(axis=(-2, -1)) - mu_a * mu_b
    num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_a ** 2 + mu_b ** 2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return num / den


def color_histograms(image: np.ndarray) -> np.ndarray:
    """Per-channel normalized 32-bin histograms, shape (3, 32)."""
    hists = np.empty((3, HIST_BINS), dtype=np.float64)
    size = image.shape[0] * image.shape[1]
    for c in range(3):
        counts = np.bincount((image[:, :, c] // (256 // HIST_BINS)).ravel(),
                             minlength=HIST_BINS)
        hists[c] = counts / size
    return hists


def histogram_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Mean per-channel L1 histogram difference, scaled into [0, 1]."""
    ha, hb = color_histograms(a), color_histograms(b)
    return float(np.abs(ha - hb).sum(axis=1).mean() / 2.0)


def keypoint_match_ratio(a: np.ndarray, b: np.ndarray) -> float:
    """One-to-one ORB matches under the 0.75 ratio test, over min keypoints.

    Returns 0 when either frame yields no keypoints (featureless content).
    """
    orb = cv2.ORB_create(**ORB_PARAMS)
    ga = cv2.cvtColor(a, cv2.COLOR_RGB2GRAY)
    gb = cv2.cvtColor(b, cv2.COLOR_RGB2GRAY)
    kp_a, desc_a = orb.detectAndCompute(ga, None)
    kp_b, desc_b = orb.detectAndCompute(gb, None)
    if not kp_a or not kp_b or desc_a is None or desc_b is None:
        return 0.0
    matcher = cv2.BFMatcher(cv2.NORM_HAMMING)
    pairs = matcher.knnMatch(desc_a, desc_b, k=2)
    candidates = sorted(
        (m for pair in pairs if len(pair) == 2
         for m, n in [pair] if m.distance < RATIO_TEST * n.distance),
        key=lambda m: m.distance,
    )
    used_query: set[int] = set()
    used_train: set[int] = set()
    matched = 0
    for m in candidates:
        if m.queryIdx in used_query or m.trainIdx in used_train:
            continue
        used_query.add(m.queryIdx)
        used_train.add(m.trainIdx)
        matched += 1
    return matched / min(len(kp_a), len(kp_b))


def semantic_similarity(embed_provider, frame_a, frame_b) -> float:
    """Cosine similarity of the two frames' semantic embeddings."""
    ea = embed_provider.semantic_embed(frame_a)
    eb = embed_provider.semantic_embed(frame_b)
    return cosine_similarity(ea, eb)
