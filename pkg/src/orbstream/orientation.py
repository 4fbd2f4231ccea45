"""Circular-patch moments, word-length truncation, orientation, and rotation error.

The orientation of a feature is the direction of the intensity centroid of a
radius-15 circular patch: ``sin = m01 / sqrt(m10^2 + m01^2)`` and
``cos = m10 / sqrt(m10^2 + m01^2)``, where ``m10 = sum(dx * I)`` and
``m01 = sum(dy * I)`` over the patch.  Moments fit in a 20-bit magnitude plus
sign; the truncation here models a hardware unit that strips the leading
zeros shared by both magnitudes and keeps only the top N bits of what
remains.  ``wordlength_sweep`` quantifies how that truncation displaces
rotated sampling points across the 31x31 patch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .util import round_half_away
from .validation import PATCH_RADIUS, as_grayscale_image, check_patch_center

# Magnitude width of an untruncated moment; one more bit carries the sign.
MOMENT_MAGNITUDE_BITS = 20

DEFAULT_WORDLEN = 8
DEFAULT_SWEEP_SEED = 42
DEFAULT_RANDOM_SAMPLES = 512


class CircularMask:
    """Radius-15 circular patch membership, one max-|dx| extent per row."""

    def __init__(self, radius: int = PATCH_RADIUS):
        if radius != PATCH_RADIUS:
            raise ValueError(f"only radius {PATCH_RADIUS} is supported, got {radius}")
        self.radius = radius
        dy = np.arange(-radius, radius + 1)
        dx = np.arange(-radius, radius + 1)
        self.extents = np.array(
            [round(math.sqrt(radius * radius - d * d)) for d in dy], dtype=np.int64
        )
        inside = np.abs(dx)[None, :] <= self.extents[:, None]
        self.weight_x = np.where(inside, dx[None, :], 0).astype(np.int64)
        self.weight_y = np.where(inside, dy[:, None], 0).astype(np.int64)
        # extreme patch: 255 on every positive-dx mask pixel, 0 elsewhere
        self.max_abs_moment = 255 * int(self.weight_x[self.weight_x > 0].sum())

    def extent(self, dy: int) -> int:
        return int(self.extents[dy + self.radius])


@lru_cache(maxsize=1)
def circular_mask(radius: int = PATCH_RADIUS) -> CircularMask:
    return CircularMask(radius)


#: Largest |m10| (= largest |m01|) any radius-15 patch can produce.
MAX_ABS_MOMENT = CircularMask().max_abs_moment


@dataclass(frozen=True)
class Moments:
    m10: int
    m01: int


@dataclass(frozen=True)
class TruncatedMoments:
    """Sign/magnitude pair after shared-leading-zero truncation to N+1 bits."""

    sign10: int
    sign01: int
    mag10: int
    mag01: int
    wordlen: int

    @property
    def m10(self) -> int:
        return self.sign10 * self.mag10

    @property
    def m01(self) -> int:
        return self.sign01 * self.mag01


@dataclass(frozen=True)
class Orientation:
    sin: float
    cos: float

IDENTITY_ORIENTATION = Orientation(sin=0.0, cos=1.0)


def compute_moments(img: np.ndarray, center: tuple[int, int], mask: CircularMask | None = None) -> Moments:
    """Exact integer patch moments (m10, m01) around ``center`` = (x, y)."""
    img = as_grayscale_image(img)
    mask = mask or circular_mask()
    x, y = center
    check_patch_center(img, x, y)
    r = mask.radius
    patch = img[y - r : y + r + 1, x - r : x + r + 1].astype(np.int64)
    return Moments(
        m10=int((mask.weight_x * patch).sum()),
        m01=int((mask.weight_y * patch).sum()),
    )


def truncate_moments(m: Moments, wordlen: int) -> TruncatedMoments:
    """Drop the leading zero bits shared by |m10| and |m01|, keep the top N bits.

    Both magnitudes are viewed as 20-bit strings; the shared leading-zero
    count k is removed from both (a pure left shift, so the m01/m10 ratio is
    preserved), then the upper ``wordlen`` bits are kept, zero-filled on the
    right when fewer remain.  Signs are carried through unchanged.
    """
    if not 1 <= wordlen <= MOMENT_MAGNITUDE_BITS:
        raise ValueError(f"wordlen must lie in 1..{MOMENT_MAGNITUDE_BITS}, got {wordlen}")
    a, b = abs(int(m.m10)), abs(int(m.m01))
    limit = 1 << MOMENT_MAGNITUDE_BITS
    if a >= limit or b >= limit:
        raise ValueError(f"moment magnitudes ({a}, {b}) exceed {MOMENT_MAGNITUDE_BITS} bits")
    k = MOMENT_MAGNITUDE_BITS - (a | b).bit_length()
    drop = MOMENT_MAGNITUDE_BITS - wordlen
    return TruncatedMoments(
        sign10=1 if m.m10 >= 0 else -1,
        sign01=1 if m.m01 >= 0 else -1,
        mag10=(a << k) >> drop,
        mag01=(b << k) >> drop,
        wordlen=wordlen,
    )


def compute_sincos(m: Union[Moments, TruncatedMoments]) -> Orientation:
    """Orientation sin/cos from (possibly truncated) moments.

    The zero-moment patch has no defined direction; it maps to the identity
    rotation (sin 0, cos 1).
    """
    m10, m01 = m.m10, m.m01
    if m10 == 0 and m01 == 0:
        return IDENTITY_ORIENTATION
    h = math.hypot(m10, m01)
    return Orientation(sin=m01 / h, cos=m10 / h)


def rotate_point(p: tuple[float, float], o: Orientation) -> tuple[float, float]:
    """Rotate an offset pair by the feature orientation (real-valued)."""
    x, y = p
    return (x * o.cos + y * o.sin, y * o.cos - x * o.sin)


def rotate_to_patch(p: tuple[float, float], o: Orientation) -> tuple[int, int]:
    """Integer sampling offset: rotate, round half away from zero, clamp to +-15."""
    xr, yr = rotate_point(p, o)
    r = PATCH_RADIUS
    xi = min(max(int(round_half_away(xr)), -r), r)
    yi = min(max(int(round_half_away(yr)), -r), r)
    return xi, yi


def rotation_error(p: tuple[float, float], full: Orientation, truncated: Orientation) -> float:
    """Displacement of ``p`` between the full and truncated rotations (unrounded)."""
    xf, yf = rotate_point(p, full)
    xt, yt = rotate_point(p, truncated)
    return math.hypot(xf - xt, yf - yt)


def default_moment_samples(
    seed: int = DEFAULT_SWEEP_SEED, random_pairs: int = DEFAULT_RANDOM_SAMPLES
) -> np.ndarray:
    """Deterministic (m10, m01) sample set covering the full magnitude range.

    A grid of power-of-two radii (plus the 20-bit maximum) crossed with 128
    evenly spaced angles, then ``random_pairs`` uniform draws from a seeded
    generator.
    """
    radii = [float(1 << e) for e in range(MOMENT_MAGNITUDE_BITS)]
    radii.append(float((1 << MOMENT_MAGNITUDE_BITS) - 1))
    angles = np.linspace(0.0, 2.0 * np.pi, 128, endpoint=False)
    grid = []
    for r in radii:
        m10 = round_half_away(r * np.cos(angles))
        m01 = round_half_away(r * np.sin(angles))
        grid.append(np.stack([m10, m01], axis=1))
    samples = np.concatenate(grid).astype(np.int64)

    if random_pairs:
        rng = np.random.default_rng(seed)
        limit = (1 << MOMENT_MAGNITUDE_BITS) - 1
        rand = rng.integers(-limit, limit + 1, size=(random_pairs, 2), dtype=np.int64)
        samples = np.concatenate([samples, rand])
    return samples


# Every offset of the 31x31 patch, raster order starting at (-15, -15).
_PATCH_DX, _PATCH_DY = np.meshgrid(
    np.arange(-PATCH_RADIUS, PATCH_RADIUS + 1),
    np.arange(-PATCH_RADIUS, PATCH_RADIUS + 1),
)
PATCH_POINTS_X = _PATCH_DX.ravel().astype(np.float64)
PATCH_POINTS_Y = _PATCH_DY.ravel().astype(np.float64)


@dataclass(frozen=True)
class SweepRow:
    wordlen: int
    max_error: float
    mean_error: float
    argmax_dx: int
    argmax_dy: int


def wordlength_sweep(
    wordlens: Sequence[int],
    samples: np.ndarray | None = None,
    seed: int = DEFAULT_SWEEP_SEED,
    random_pairs: int = DEFAULT_RANDOM_SAMPLES,
) -> list[SweepRow]:
    """Max/mean rotation error per word length over samples x patch points.

    For each sample the error at every patch point is the displacement
    between the full-precision rotation and the truncated-moment rotation.
    The row also carries the patch point where the maximum was attained.
    """
    wl = [int(n) for n in wordlens]
    for n in wl:
        if not 1 <= n <= MOMENT_MAGNITUDE_BITS:
            raise ValueError(f"wordlen {n} outside 1..{MOMENT_MAGNITUDE_BITS}")
    if samples is None:
        samples = default_moment_samples(seed=seed, random_pairs=random_pairs)
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size == 0:
        raise ValueError("empty sample set")

    moments = [Moments(int(s[0]), int(s[1])) for s in samples]
    full = [compute_sincos(m) for m in moments]
    fx = [PATCH_POINTS_X * o.cos + PATCH_POINTS_Y * o.sin for o in full]
    fy = [PATCH_POINTS_Y * o.cos - PATCH_POINTS_X * o.sin for o in full]

    rows = []
    n_points = PATCH_POINTS_X.size
    for n in wl:
        best = -1.0
        best_point = 0
        total = 0.0
        for i, m in enumerate(moments):
            o = compute_sincos(truncate_moments(m, n))
            tx = PATCH_POINTS_X * o.cos + PATCH_POINTS_Y * o.sin
            ty = PATCH_POINTS_Y * o.cos - PATCH_POINTS_X * o.sin
            err = np.hypot(fx[i] - tx, fy[i] - ty)
            j = int(np.argmax(err))
            if err[j] > best:
                best = float(err[j])
                best_point = j
            total += float(err.sum())
        rows.append(
            SweepRow(
                wordlen=n,
                max_error=best,
                mean_error=total / (len(moments) * n_points),
                argmax_dx=int(PATCH_POINTS_X[best_point]),
                argmax_dy=int(PATCH_POINTS_Y[best_point]),
            )
        )
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    lines = ["N,max_error,mean_error,argmax_dx,argmax_dy"]
    for r in rows:
        lines.append(
            f"{r.wordlen},{r.max_error:.6f},{r.mean_error:.6f},{r.argmax_dx},{r.argmax_dy}"
        )
    return "\n".join(lines) + "\n"
