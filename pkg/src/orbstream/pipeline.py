"""End-to-end extraction over the 2-level pyramid, batch or streaming."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .descriptor import (
    DEFAULT_PAIR_COUNT,
    DEFAULT_SEED,
    Descriptor,
    compute_descriptor,
    gaussian_smooth,
    generate_pattern,
)
from .fast import DEFAULT_THRESHOLD, detect_features
from .features import FeaturePoint
from .image_pipeline import build_pyramid
from .orientation import (
    DEFAULT_WORDLEN,
    Moments,
    circular_mask,
    compute_moments,
    compute_sincos,
    truncate_moments,
)
from .streaming import StreamConfig, StreamEvent, StreamStats, run_stream
from .validation import (
    as_grayscale_image,
    check_detection_size,
    check_mode,
    check_pairs,
    check_threshold,
    check_wordlen,
)


def orientation_for(moments: Moments, wordlen: int | None):
    """Orientation from moments, via the truncated path when a wordlen is set."""
    if wordlen is None:
        return compute_sincos(moments)
    return compute_sincos(truncate_moments(moments, wordlen))


def extract_level(
    img: np.ndarray,
    level: int,
    *,
    threshold: int,
    wordlen: int | None,
    pattern: np.ndarray,
) -> list[tuple[FeaturePoint, Descriptor]]:
    """Batch extraction on one pyramid level, raster order."""
    coords = detect_features(img, threshold)
    if not coords:
        return []
    mask = circular_mask()
    smoothed = gaussian_smooth(img)
    out = []
    for x, y in coords:
        m = compute_moments(img, (x, y), mask)
        o = orientation_for(m, wordlen)
        d = compute_descriptor(smoothed, (x, y), o, pattern)
        out.append((FeaturePoint(level, x, y, m.m10, m.m01, o.sin, o.cos), d))
    return out


@dataclass
class ExtractionResult:
    """Per-feature records plus the metadata that reproduces them."""

    records: list[tuple[FeaturePoint, Descriptor]]
    metadata: dict
    stream_stats: StreamStats | None = None
    trace: list[StreamEvent] | None = None

    def to_dict(self) -> dict:
        return {
            "metadata": dict(self.metadata),
            "features": [
                {
                    "level": p.level,
                    "x": p.x,
                    "y": p.y,
                    "sin": p.sin,
                    "cos": p.cos,
                    "descriptor": d.hex(),
                }
                for p, d in self.records
            ],
        }


def extract_image(
    image,
    *,
    threshold: int = DEFAULT_THRESHOLD,
    wordlen: int | str | None = DEFAULT_WORDLEN,
    pairs: int = DEFAULT_PAIR_COUNT,
    seed: int = DEFAULT_SEED,
    mode: str = "batch",
    max_features: int | None = None,
    pattern: np.ndarray | None = None,
    collect_trace: bool = False,
) -> ExtractionResult:
    """Run the full extractor on a grayscale frame.

    ``mode`` selects the batch pipeline or the streaming dataflow; both
    produce identical features and descriptors.  ``pattern`` overrides the
    seeded pair generation (the estimator passes its fitted pattern).
    ``max_features`` truncates the emission-ordered record list.
    """
    img = as_grayscale_image(image)
    check_detection_size(img)
    threshold = check_threshold(threshold)
    wordlen = check_wordlen(wordlen)
    mode = check_mode(mode)
    if pattern is None:
        pattern = generate_pattern(check_pairs(pairs), seed)
    else:
        pattern = np.asarray(pattern)
    if max_features is not None and int(max_features) < 1:
        raise ValueError(f"max_features must be >= 1, got {max_features}")

    pyramid = build_pyramid(img)
    stream_stats = None
    trace = None
    if mode == "batch":
        records = []
        for level, level_img in enumerate(pyramid.levels):
            records.extend(
                extract_level(
                    level_img, level, threshold=threshold, wordlen=wordlen, pattern=pattern
                )
            )
    else:
        result = run_stream(
            pyramid,
            StreamConfig(
                pattern=pattern,
                threshold=threshold,
                wordlen=wordlen,
                collect_trace=collect_trace,
            ),
        )
        records = result.records
        stream_stats = result.stats
        trace = result.trace

    if max_features is not None:
        records = records[: int(max_features)]

    h, w = img.shape
    metadata = {
        "width": w,
        "height": h,
        "levels": [[lvl.shape[1], lvl.shape[0]] for lvl in pyramid.levels],
        "threshold": threshold,
        "wordlen": "full" if wordlen is None else wordlen,
        "pairs": int(len(pattern)),
        "seed": int(seed),
        "mode": mode,
        "max_features": max_features,
    }
    return ExtractionResult(
        records=records, metadata=metadata, stream_stats=stream_stats, trace=trace
    )
