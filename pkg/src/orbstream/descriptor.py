"""7x7 integer Gaussian smoothing and steered binary descriptors.

The smoothing kernel is the outer product of the order-6 binomial row
``[1, 6, 15, 20, 15, 6, 1]``, giving integer weights that sum to the
power-of-two divisor 4096 (hardware-friendly shift normalization).  A
descriptor compares smoothed intensities at M offset pairs, each pair
rotated by the feature orientation before sampling; bit i is 1 when the
first intensity is >= the second.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .orientation import Orientation
from .util import round_half_away
from .validation import PATCH_RADIUS, as_grayscale_image, check_pairs, check_patch_center

GAUSSIAN_ROW = np.array([1, 6, 15, 20, 15, 6, 1], dtype=np.int64)
GAUSSIAN_KERNEL = np.outer(GAUSSIAN_ROW, GAUSSIAN_ROW)
GAUSSIAN_DIVISOR = int(GAUSSIAN_KERNEL.sum())  # 4096
KERNEL_APRON = 3

PATTERN_RADIUS = 13
PATTERN_SIGMA = PATTERN_RADIUS / 2.0
DEFAULT_PAIR_COUNT = 256
DEFAULT_SEED = 42


def gaussian_smooth(img: np.ndarray) -> np.ndarray:
    """Smooth with the 7x7 kernel, replicate borders, round-half-up output."""
    img = as_grayscale_image(img)
    h, w = img.shape
    pad = np.pad(img.astype(np.int64), KERNEL_APRON, mode="edge")
    acc = np.zeros((h, w), dtype=np.int64)
    for i in range(7):
        for j in range(7):
            acc += int(GAUSSIAN_KERNEL[i, j]) * pad[i : i + h, j : j + w]
    return ((acc + GAUSSIAN_DIVISOR // 2) // GAUSSIAN_DIVISOR).astype(np.uint8)


def generate_pattern(pairs: int = DEFAULT_PAIR_COUNT, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Deterministic comparison-pair offsets, shape (pairs, 4) = (ax, ay, bx, by).

    Offsets are drawn per axis from a Gaussian with sigma 6.5, rounded to
    integers, and rejection-sampled to the radius-13 disc so that any
    rotation keeps them inside the 31x31 patch.
    """
    m = check_pairs(pairs)
    rng = np.random.default_rng(seed)
    needed = 2 * m
    accepted: list[np.ndarray] = []
    count = 0
    while count < needed:
        draw = round_half_away(rng.normal(0.0, PATTERN_SIGMA, size=(4 * m, 2)))
        keep = draw[(draw * draw).sum(axis=1) <= PATTERN_RADIUS * PATTERN_RADIUS]
        accepted.append(keep)
        count += len(keep)
    points = np.concatenate(accepted)[:needed].astype(np.int32)
    return points.reshape(m, 4)


def brief_test(ia: int, ib: int) -> int:
    """The comparison operator: 1 when ia >= ib (ties produce 1), else 0."""
    return 1 if int(ia) >= int(ib) else 0


@dataclass(frozen=True)
class Descriptor:
    """Packed bit vector; bit of pair 0 is the most significant bit of byte 0."""

    data: bytes

    @property
    def nbits(self) -> int:
        return len(self.data) * 8

    def hex(self) -> str:
        return self.data.hex()


def descriptor_from_patch(
    patch: np.ndarray, orientation: Orientation, pattern: np.ndarray
) -> Descriptor:
    """Descriptor bits from a 31x31 smoothed patch centered on the feature.

    Every pattern offset is rotated by the orientation, rounded half away
    from zero, and clamped to the +-15 patch before sampling.
    """
    side = 2 * PATCH_RADIUS + 1
    if patch.shape != (side, side):
        raise ValueError(f"patch must be {side}x{side}, got {patch.shape}")
    pat = np.asarray(pattern, dtype=np.float64)
    sin, cos = orientation.sin, orientation.cos
    ax, ay, bx, by = pat[:, 0], pat[:, 1], pat[:, 2], pat[:, 3]
    r = PATCH_RADIUS

    rax = np.clip(round_half_away(ax * cos + ay * sin), -r, r).astype(np.intp)
    ray = np.clip(round_half_away(ay * cos - ax * sin), -r, r).astype(np.intp)
    rbx = np.clip(round_half_away(bx * cos + by * sin), -r, r).astype(np.intp)
    rby = np.clip(round_half_away(by * cos - bx * sin), -r, r).astype(np.intp)

    va = patch[r + ray, r + rax]
    vb = patch[r + rby, r + rbx]
    bits = va >= vb
    return Descriptor(data=np.packbits(bits).tobytes())


def compute_descriptor(
    smoothed: np.ndarray,
    center: tuple[int, int],
    orientation: Orientation,
    pattern: np.ndarray,
) -> Descriptor:
    """Steered descriptor for a feature on the smoothed level image."""
    smoothed = as_grayscale_image(smoothed, "smoothed")
    x, y = center
    check_patch_center(smoothed, x, y)
    r = PATCH_RADIUS
    patch = smoothed[y - r : y + r + 1, x - r : x + r + 1]
    return descriptor_from_patch(patch, orientation, pattern)


def hamming(a: Descriptor, b: Descriptor) -> int:
    """Popcount of the XOR of two equal-length descriptors."""
    if len(a.data) != len(b.data):
        raise ValueError(f"descriptor lengths differ: {a.nbits} vs {b.nbits} bits")
    ia = int.from_bytes(a.data, "big")
    ib = int.from_bytes(b.data, "big")
    return (ia ^ ib).bit_count()
