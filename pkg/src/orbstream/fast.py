"""FAST-9 segment-test corner detection with patch-margin filtering."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .validation import DETECTION_MARGIN, as_grayscale_image, check_detection_size, check_threshold

# Bresenham circle of radius 3, clockwise from the top pixel (y grows downward).
RING_DX = np.array([0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1])
RING_DY = np.array([-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3])
RING_SIZE = 16
ARC_LENGTH = 9

DEFAULT_THRESHOLD = 20


def _has_arc(mask: int) -> bool:
    # bit j of the AND of rotations 0..8 is set iff bits j..j+8 (mod 16) are all set
    acc = mask
    for shift in range(1, ARC_LENGTH):
        acc &= ((mask >> shift) | (mask << (RING_SIZE - shift))) & 0xFFFF
        if not acc:
            return False
    return True


def segment_test(center: int, ring, threshold: int) -> bool:
    """True iff >= 9 contiguous ring pixels are all brighter than center+t
    or all darker than center-t (wrapping around the ring).

    ``ring`` must hold the 16 circle intensities in the RING_DX/RING_DY order.
    """
    if len(ring) != RING_SIZE:
        raise ValueError(f"ring must have {RING_SIZE} pixels, got {len(ring)}")
    c = int(center)
    t = int(threshold)
    bright = 0
    dark = 0
    for i, v in enumerate(ring):
        v = int(v)
        if v > c + t:
            bright |= 1 << i
        elif v < c - t:
            dark |= 1 << i
    return _has_arc(bright) or _has_arc(dark)


@lru_cache(maxsize=1)
def _arc_table() -> np.ndarray:
    """Corner flag for every 16-bit bright/dark mask."""
    masks = np.arange(1 << RING_SIZE, dtype=np.uint32)
    acc = masks.copy()
    for shift in range(1, ARC_LENGTH):
        acc &= ((masks >> shift) | (masks << (RING_SIZE - shift))) & 0xFFFF
    return acc != 0


def detect_features(img: np.ndarray, threshold: int = DEFAULT_THRESHOLD) -> list[tuple[int, int]]:
    """All in-margin pixels passing the segment test, as (x, y) in raster order."""
    img = as_grayscale_image(img)
    check_detection_size(img)
    t = check_threshold(threshold)
    h, w = img.shape
    m = DETECTION_MARGIN

    wide = img.astype(np.int32)
    center = wide[m : h - m, m : w - m]
    bright = np.zeros(center.shape, dtype=np.uint16)
    dark = np.zeros(center.shape, dtype=np.uint16)
    for i in range(RING_SIZE):
        dy, dx = int(RING_DY[i]), int(RING_DX[i])
        ring = wide[m + dy : h - m + dy, m + dx : w - m + dx]
        bright |= (ring > center + t).astype(np.uint16) << i
        dark |= (ring < center - t).astype(np.uint16) << i

    table = _arc_table()
    corner = table[bright] | table[dark]
    ys, xs = np.nonzero(corner)
    return [(int(x) + m, int(y) + m) for y, x in zip(ys, xs)]
