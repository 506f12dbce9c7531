"""Canonical raster handling: RGB conversion, resizing, digests, luminance."""

from __future__ import annotations

import hashlib

import cv2
import numpy as np


def canonicalize(bgr: np.ndarray, max_dimension: int = 512) -> np.ndarray:
    """Convert a decoded BGR frame to the canonical 8-bit RGB raster.

    Frames larger than ``max_dimension`` on their longest side are downscaled
    (aspect preserved); smaller frames pass through untouched so fixture
    digests stay stable.
    """
    rgb = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
    h, w = rgb.shape[:2]
    longest = max(h, w)
    if longest > max_dimension:
        scale = max_dimension / longest
        rgb = cv2.resize(rgb, (max(1, round(w * scale)), max(1, round(h * scale))),
                         interpolation=cv2.INTER_AREA)
    return np.ascontiguousarray(rgb)


def digest(image: np.ndarray) -> str:
    """Stable content hash of a canonical raster (dimensions included)."""
    h, w = image.shape[:2]
    hasher = hashlib.sha256(f"{w}x{h}:".encode("ascii"))
    hasher.update(np.ascontiguousarray(image).tobytes())
    return hasher.hexdigest()


def digest_bytes(data: bytes) -> str:
    """Short content-addressed name stem for encoded asset bytes."""
    return hashlib.sha256(data).hexdigest()[:16]


def luminance(image: np.ndarray) -> np.ndarray:
    """BT.601 luma of an RGB raster, as float64 in [0, 255]."""
    rgb = image.astype(np.float64)
    return 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]


def center_crop(image: np.ndarray, fraction: float = 0.5) -> np.ndarray:
    """Central ``fraction`` x ``fraction`` region of an image."""
    h, w = image.shape[:2]
    ch, cw = max(1, round(h * fraction)), max(1, round(w * fraction))
    y0, x0 = (h - ch) // 2, (w - cw) // 2
    return image[y0:y0 + ch, x0:x0 + cw]
