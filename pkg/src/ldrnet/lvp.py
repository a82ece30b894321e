"""Local variation pattern (LVP) features.

Every pixel is compared against its eight neighbors, clockwise from the
top-left; each comparison contributes one bit (set iff the center is strictly
larger), and the resulting 8-bit pattern is aggregated with per-direction
weights whose 256 subset sums are pairwise distinct.  The aggregate value
therefore identifies the pattern uniquely.  Histograms of the patterns and
their entropy quantify local pattern diversity, which tends to collapse in
generated images.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DimensionError, DomainError, UnsupportedConfigurationError
from .tensor_core import Padding, check_tensor, iter_images, pad_spatial

# Fixed neighbor order: clockwise ring starting at the top-left corner.
# Offsets are (row, col) relative to the center pixel.
NEIGHBOR_OFFSETS = (
    (-1, -1),  # NW
    (-1, 0),   # N
    (-1, 1),   # NE
    (0, 1),    # E
    (1, 1),    # SE
    (1, 0),    # S
    (1, -1),   # SW
    (0, -1),   # W
)


class LvpWeights:
    """Eight per-direction aggregation weights with unique subset sums.

    Construction verifies that all 8 weights are pairwise distinct and that
    the 256 possible weighted pattern sums stay pairwise distinct after
    float32 rounding, so a map value decodes back to exactly one pattern.
    """

    def __init__(self, values):
        vals = np.asarray(values, dtype=np.float64)
        if vals.shape != (8,):
            raise DimensionError(f"expected 8 weights, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("weights must be finite")
        if len({float(v) for v in vals}) != 8:
            raise DomainError("weights must be pairwise distinct")
        table = np.zeros(256, dtype=np.float64)
        for code in range(256):
            acc = 0.0
            for i in range(8):
                if code >> i & 1:
                    acc += vals[i]
            table[code] = acc
        table32 = table.astype(np.float32)
        if len(set(table32.tolist())) != 256:
            raise DomainError("weights yield colliding pattern sums")
        self._values = vals
        self._table32 = table32
        self._decode = {float(v): code for code, v in enumerate(table32.tolist())}

    @classmethod
    def default(cls) -> "LvpWeights":
        """Powers of two: exact integer codes in [0, 255], trivially bijective."""
        return cls([float(1 << i) for i in range(8)])

    @classmethod
    def random(cls, seed: int) -> "LvpWeights":
        """Seeded draw of eight distinct reals in (-1, 1), retried until valid."""
        rng = np.random.default_rng(seed)
        while True:
            try:
                return cls(rng.uniform(-1.0, 1.0, size=8))
            except DomainError:
                continue

    @property
    def values(self) -> np.ndarray:
        return self._values.copy()

    @property
    def is_default(self) -> bool:
        return bool(np.array_equal(self._values, [float(1 << i) for i in range(8)]))

    @property
    def scale(self) -> float:
        """Largest attainable |map value|; 255 for the default weights."""
        return float(np.abs(self._table32).max())

    def aggregate(self, codes: np.ndarray) -> np.ndarray:
        """Map an array of 8-bit pattern codes to their weighted sums (float32)."""
        return self._table32[codes]

    def decode(self, value) -> int:
        """Return the pattern code whose weighted sum equals ``value`` exactly."""
        code = self._decode.get(float(np.float32(value)))
        if code is None:
            raise DomainError(f"{value!r} is not an attainable pattern sum")
        return code


@dataclass(frozen=True)
class LvpFeature:
    """Weighted pattern map plus the raw per-pixel 8-bit patterns."""

    map: np.ndarray       # (C, H, W) float32 weighted sums
    patterns: np.ndarray  # (C, H, W) uint8 pattern codes
    weights: LvpWeights


def encode_patch(patch) -> int:
    """8-bit sign code of a 3x3 neighborhood.

    Bit i is set iff the center exceeds neighbor i (strictly); ties and
    smaller centers leave the bit clear.
    """
    p = np.asarray(patch, dtype=np.float64)
    if p.shape != (3, 3):
        raise DimensionError(f"expected a 3x3 patch, got shape {p.shape}")
    center = p[1, 1]
    code = 0
    for i, (dy, dx) in enumerate(NEIGHBOR_OFFSETS):
        if center - p[1 + dy, 1 + dx] > 0:
            code |= 1 << i
    return code


def extract_lvp(
    x, weights: LvpWeights | None = None, padding: Padding = Padding.REFLECT
) -> LvpFeature:
    """Per-channel pattern encoding and weighted aggregation of an image.

    Border pixels use padded neighborhoods.  Output maps have the input
    shape; the raw patterns are kept so histogram diagnostics stay exact.
    """
    x = check_tensor(x, "image")
    w = weights if weights is not None else LvpWeights.default()
    c, h, width = x.shape
    if h < 3 or width < 3:
        raise DimensionError(f"image spatial dims must be >= 3, got {h}x{width}")
    padded = pad_spatial(x, 1, 1, padding)
    codes = np.zeros((c, h, width), dtype=np.uint8)
    for i, (dy, dx) in enumerate(NEIGHBOR_OFFSETS):
        neighbor = padded[:, 1 + dy : 1 + dy + h, 1 + dx : 1 + dx + width]
        codes |= (x > neighbor).astype(np.uint8) << np.uint8(i)
    return LvpFeature(map=w.aggregate(codes), patterns=codes, weights=w)


def with_weights(feature: LvpFeature, weights: LvpWeights) -> LvpFeature:
    """Re-aggregate a feature's stored patterns under different weights."""
    return LvpFeature(
        map=weights.aggregate(feature.patterns),
        patterns=feature.patterns,
        weights=weights,
    )


def code_histogram(feature: LvpFeature) -> np.ndarray:
    """256-bin pattern histogram; bin k counts pixels with pattern code k.

    Defined for default weights only (bins are pattern-indexed).
    """
    if not feature.weights.is_default:
        raise UnsupportedConfigurationError(
            "code_histogram requires the default power-of-two weights"
        )
    return np.bincount(feature.patterns.reshape(-1), minlength=256)


def pattern_entropy(hist) -> float:
    """Shannon entropy (bits) of a normalized 256-bin histogram; at most 8."""
    counts = np.asarray(hist, dtype=np.float64)
    if counts.ndim != 1 or counts.shape[0] != 256:
        raise DimensionError(f"expected a 256-bin histogram, got shape {counts.shape}")
    if np.any(counts < 0):
        raise DomainError("histogram counts must be nonnegative")
    total = counts.sum()
    if total <= 0:
        raise DomainError("histogram must contain at least one count")
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


class LvpTransform(TransformerMixin, BaseEstimator):
    """Stateless scikit-learn transformer computing LVP maps.

    ``weights="pow2"`` uses the default bijective powers of two;
    ``weights="random"`` draws a seeded valid set from ``weights_seed``.
    """

    def __init__(self, weights="pow2", weights_seed=0, padding="reflect"):
        self.weights = weights
        self.weights_seed = weights_seed
        self.padding = padding

    def _weights(self) -> LvpWeights:
        if self.weights == "pow2":
            return LvpWeights.default()
        if self.weights == "random":
            return LvpWeights.random(self.weights_seed)
        raise DomainError(f"weights must be 'pow2' or 'random', got {self.weights!r}")

    def fit(self, X, y=None):
        self._weights()
        Padding(self.padding)
        return self

    def transform(self, X):
        w = self._weights()
        padding = Padding(self.padding)
        maps = [extract_lvp(img, w, padding).map for img in iter_images(X)]
        if isinstance(X, np.ndarray) and X.ndim == 4:
            return np.stack(maps)
        return maps
