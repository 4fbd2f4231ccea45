"""scikit-learn estimator surface for the extractor.

``OrbExtractor`` is a stateless transformer: ``fit`` validates parameters
and freezes the comparison pattern, ``transform`` maps grayscale frames to
:class:`~orbstream.pipeline.ExtractionResult` objects.  Parameters follow
the scikit-learn convention (stored verbatim, validated in ``fit``), so
``get_params``/``set_params``/``clone`` compose with the wider ecosystem.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .descriptor import generate_pattern
from .pipeline import ExtractionResult, extract_image
from .validation import check_mode, check_pairs, check_threshold, check_wordlen


class OrbExtractor(BaseEstimator, TransformerMixin):
    """Oriented-corner detector and steered binary descriptor extractor.

    Parameters
    ----------
    threshold : int, default=20
        Segment-test intensity delta.
    wordlen : int or "full", default=8
        Moment word length used for the orientation (1..20); "full" disables
        truncation.
    pairs : int, default=256
        Number of descriptor comparison pairs (descriptor bits).
    seed : int, default=42
        Seed for the comparison-pair pattern.
    mode : {"batch", "stream"}, default="batch"
        Execution mode; both produce identical results.
    max_features : int or None, default=None
        Optional cap on emitted features (emission order, no ranking).
    """

    def __init__(
        self,
        threshold: int = 20,
        wordlen: int | str = 8,
        pairs: int = 256,
        seed: int = 42,
        mode: str = "batch",
        max_features: int | None = None,
    ):
        self.threshold = threshold
        self.wordlen = wordlen
        self.pairs = pairs
        self.seed = seed
        self.mode = mode
        self.max_features = max_features

    def fit(self, X=None, y=None):
        """Validate parameters and freeze the comparison pattern."""
        self.threshold_ = check_threshold(self.threshold)
        self.wordlen_ = check_wordlen(self.wordlen)
        self.pairs_ = check_pairs(self.pairs)
        self.mode_ = check_mode(self.mode)
        self.pattern_ = generate_pattern(self.pairs_, self.seed)
        return self

    def transform(self, X) -> list[ExtractionResult]:
        """Extract features from one image or a sequence of images."""
        check_is_fitted(self, "pattern_")
        return [self._extract(img) for img in _as_image_list(X)]

    def detect_and_compute(self, image) -> ExtractionResult:
        """Single-image convenience wrapper around :meth:`transform`."""
        check_is_fitted(self, "pattern_")
        return self._extract(image)

    def _extract(self, image) -> ExtractionResult:
        return extract_image(
            image,
            threshold=self.threshold_,
            wordlen=self.wordlen_,
            seed=self.seed,
            mode=self.mode_,
            max_features=self.max_features,
            pattern=self.pattern_,
        )


def _as_image_list(X) -> list:
    if isinstance(X, np.ndarray):
        if X.ndim == 2:
            return [X]
        if X.ndim == 3:
            return list(X)
        raise ValueError(f"expected 2-D image(s), got array with ndim={X.ndim}")
    if isinstance(X, (list, tuple)):
        if X and np.asarray(X[0]).ndim == 2:
            return list(X)
        arr = np.asarray(X)
        if arr.ndim == 2:
            return [arr]
        raise ValueError("expected an image or a sequence of images")
    raise ValueError(f"unsupported input type {type(X).__name__}")
