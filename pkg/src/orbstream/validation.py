"""Input validation helpers shared by the extractor modules and the estimator."""

from __future__ import annotations

import numpy as np

# A feature needs a 31x31 patch around it, and every smoothed pixel in that
# patch needs a 7x7 raw neighbourhood, so features stay 18 pixels off the edge.
PATCH_RADIUS = 15
SMOOTHING_APRON = 3
DETECTION_MARGIN = PATCH_RADIUS + SMOOTHING_APRON
MIN_DETECTION_SIDE = 38

MODES = ("batch", "stream")


def as_grayscale_image(x, name: str = "image") -> np.ndarray:
    """Coerce input to a 2-D uint8 array, validating shape and value range."""
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D (height, width), got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError(f"{name} must hold integer intensities, got dtype {arr.dtype}")
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError(f"{name} values must lie in 0..255")
        arr = arr.astype(np.uint8)
    return np.ascontiguousarray(arr)


def check_detection_size(img: np.ndarray) -> None:
    h, w = img.shape
    if w < MIN_DETECTION_SIDE or h < MIN_DETECTION_SIDE:
        raise ValueError(
            f"image {w}x{h} is too small for detection; "
            f"both sides must be >= {MIN_DETECTION_SIDE}"
        )


def check_patch_center(img: np.ndarray, x: int, y: int) -> None:
    h, w = img.shape
    m = DETECTION_MARGIN
    if not (m <= x < w - m and m <= y < h - m):
        raise ValueError(f"center ({x}, {y}) violates the {m}-pixel margin for {w}x{h}")


def check_threshold(threshold: int) -> int:
    t = int(threshold)
    if not 0 <= t <= 255:
        raise ValueError(f"threshold must lie in 0..255, got {threshold}")
    return t


def check_wordlen(wordlen) -> int | None:
    """Normalize a word-length argument: 1..20, or None/'full' for no truncation."""
    if wordlen is None or wordlen == "full":
        return None
    n = int(wordlen)
    if not 1 <= n <= 20:
        raise ValueError(f"wordlen must lie in 1..20 or be 'full', got {wordlen}")
    return n


def check_pairs(pairs: int) -> int:
    m = int(pairs)
    if m < 1:
        raise ValueError(f"pair count must be >= 1, got {pairs}")
    return m


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode
