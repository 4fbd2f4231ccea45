"""Grayscale image ingestion, bilinear resizing, and the 2-level pyramid.

Images are plain 2-D uint8 arrays in row-major order.  The pyramid has
exactly two levels at a fixed 1.2 downscale with floor-rounded dimensions,
so a 640x480 frame yields a 533x400 second level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .util import round_half_away
from .validation import MIN_DETECTION_SIDE, as_grayscale_image

PYRAMID_SCALE = 1.2


class PgmError(ValueError):
    """Base class for PGM decode failures."""


class MalformedHeaderError(PgmError):
    """Missing or non-numeric header fields, or a bad magic number."""


class MaxvalUnsupportedError(PgmError):
    """maxval above 255 (multi-byte samples are not supported)."""


class TruncatedDataError(PgmError):
    """Fewer pixel payload bytes than width*height."""


def decode_pgm(data: bytes) -> np.ndarray:
    """Decode a binary PGM (P5) byte string into a uint8 image.

    Header comments (``#`` to end of line) and arbitrary whitespace are
    tolerated; exactly one whitespace byte separates maxval from the pixel
    payload.
    """
    tokens, pos = _header_tokens(bytes(data), 4)
    if tokens[0] != b"P5":
        raise MalformedHeaderError(f"expected magic 'P5', got {tokens[0]!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise MalformedHeaderError(f"non-numeric header fields: {tokens[1:]}") from None
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"bad dimensions {width}x{height}")
    if maxval < 1:
        raise MalformedHeaderError(f"bad maxval {maxval}")
    if maxval > 255:
        raise MaxvalUnsupportedError(f"maxval {maxval} > 255 is unsupported")
    payload = data[pos:]
    if len(payload) < width * height:
        raise TruncatedDataError(
            f"expected {width * height} pixel bytes, got {len(payload)}"
        )
    img = np.frombuffer(payload[: width * height], dtype=np.uint8)
    return img.reshape(height, width).copy()


def encode_pgm(img: np.ndarray) -> bytes:
    """Encode a uint8 image as binary PGM (P5)."""
    img = as_grayscale_image(img)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens: list[bytes] = []
    i, n = 0, len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace() and data[i : i + 1] != b"#":
            i += 1
        if i == start:
            raise MalformedHeaderError("truncated header")
        tokens.append(data[start:i])
    # exactly one whitespace byte before the payload
    if i >= n or not data[i : i + 1].isspace():
        raise MalformedHeaderError("missing whitespace after maxval")
    return tokens, i + 1


def resize_bilinear(src: np.ndarray, dst_width: int, dst_height: int) -> np.ndarray:
    """Downscale with bilinear interpolation on an endpoint-aligned grid.

    Each destination pixel maps to ``src_x = dst_x * (src_w-1)/(dst_w-1)``
    (same for y), blends the four neighbouring source pixels, and is rounded
    to the nearest integer with ties away from zero.
    """
    src = as_grayscale_image(src, "src")
    src_h, src_w = src.shape
    if dst_width < 2 or dst_height < 2:
        raise ValueError(f"destination {dst_width}x{dst_height} must be >= 2x2")
    if dst_width > src_w or dst_height > src_h:
        raise ValueError(
            f"upscaling {src_w}x{src_h} -> {dst_width}x{dst_height} is not supported"
        )
    if (dst_width, dst_height) == (src_w, src_h):
        return src.copy()

    sx = np.arange(dst_width) * ((src_w - 1) / (dst_width - 1))
    sy = np.arange(dst_height) * ((src_h - 1) / (dst_height - 1))
    x0 = np.minimum(np.floor(sx).astype(np.intp), src_w - 1)
    y0 = np.minimum(np.floor(sy).astype(np.intp), src_h - 1)
    x1 = np.minimum(x0 + 1, src_w - 1)
    y1 = np.minimum(y0 + 1, src_h - 1)
    fx = sx - x0
    fy = sy - y0

    srcf = src.astype(np.float64)
    p00 = srcf[np.ix_(y0, x0)]
    p01 = srcf[np.ix_(y0, x1)]
    p10 = srcf[np.ix_(y1, x0)]
    p11 = srcf[np.ix_(y1, x1)]
    top = p00 + fx[None, :] * (p01 - p00)
    bot = p10 + fx[None, :] * (p11 - p10)
    blended = top + fy[:, None] * (bot - top)
    return round_half_away(blended).astype(np.uint8)


@dataclass(frozen=True)
class Pyramid:
    """Exactly two pyramid levels; ``scale`` is the level-0/level-1 width ratio."""

    levels: tuple[np.ndarray, np.ndarray]
    scale: float = field(default=PYRAMID_SCALE)

    def __iter__(self):
        return iter(self.levels)


def pyramid_level_dims(width: int, height: int) -> tuple[int, int]:
    """Level-1 dimensions for a given level-0 size (floor of size / 1.2).

    Computed as ``size * 5 // 6`` so exact ratios (e.g. 120 -> 100) never
    fall victim to float rounding.
    """
    return int(width) * 5 // 6, int(height) * 5 // 6


def build_pyramid(src: np.ndarray) -> Pyramid:
    """Build the 2-level pyramid; errors if level 1 would be too small to detect on."""
    src = as_grayscale_image(src, "src")
    h, w = src.shape
    l1w, l1h = pyramid_level_dims(w, h)
    if l1w < MIN_DETECTION_SIDE or l1h < MIN_DETECTION_SIDE:
        raise ValueError(
            f"{w}x{h} source yields a {l1w}x{l1h} level 1, below the "
            f"{MIN_DETECTION_SIDE}-pixel detection minimum"
        )
    return Pyramid(levels=(src, resize_bilinear(src, l1w, l1h)))
