"""Bring photos and sketches to a shared representation.

The representation is the level-3 Haar diagonal band, min-max rescaled to
[0, 255] and inverted; sketches additionally get an integer offset that
aligns the mean intensity of the sketch set with the photo set.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .image import GrayImage
from .wavelet import decompose, diagonal_band

DEFAULT_LEVELS = 3


class SourceKind(str, enum.Enum):
    PHOTO = "photo"
    SKETCH = "sketch"


@dataclass(frozen=True)
class OffsetI:
    value: int = 0

    def __post_init__(self):
        if self.value < 0 or self.value != int(self.value):
            raise ConfigError(f"offset must be a non-negative integer, got {self.value}")
        object.__setattr__(self, "value", int(self.value))


@dataclass(frozen=True)
class NewDimensionImage:
    img: GrayImage
    source_kind: SourceKind


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def rescale_to_byte_range(band: GrayImage) -> GrayImage:
    """Per-image min-max map to [0, 255]; a constant band maps to zeros."""
    px = band.pixels
    lo, hi = px.min(), px.max()
    if hi == lo:
        return GrayImage(np.zeros_like(px))
    scaled = (px - lo) / (hi - lo) * 255.0
    return GrayImage(np.clip(scaled, 0.0, 255.0))  # guard 1-ulp overshoot


def negative(img: GrayImage) -> GrayImage:
    px = img.pixels
    if px.min() < 0.0 or px.max() > 255.0:
        raise DataError(
            f"negative() needs values in [0, 255], got [{px.min()}, {px.max()}]"
        )
    return GrayImage(255.0 - px)


def _pooled_mean(images: Sequence[GrayImage]) -> float:
    total = 0.0
    count = 0
    for img in images:  # fixed index order keeps the sum bit-reproducible
        total += float(np.sum(img.pixels))
        count += img.pixels.size
    return total / count


def compute_offset(training: Sequence[GrayImage], testing: Sequence[GrayImage]) -> OffsetI:
    """|mean(training pixels) - mean(testing pixels)|, rounded to an integer."""
    if not training or not testing:
        raise DataError("offset needs non-empty training and testing sets")
    diff = abs(_pooled_mean(training) - _pooled_mean(testing))
    return OffsetI(round_half_away(diff))


def apply_offset(img: GrayImage, I: OffsetI) -> GrayImage:
    # no clamping: values above 255 are kept for PCA
    return GrayImage(img.pixels + I.value)


def rescaled_band(img: GrayImage, levels: int = DEFAULT_LEVELS) -> GrayImage:
    """Diagonal band at the deepest level, rescaled to [0, 255]."""
    return rescale_to_byte_range(diagonal_band(decompose(img, levels), levels))


def to_new_dimension(
    img: GrayImage,
    kind: SourceKind | str,
    I: Optional[OffsetI] = None,
    levels: int = DEFAULT_LEVELS,
) -> NewDimensionImage:
    kind = SourceKind(kind)
    out = negative(rescaled_band(img, levels))
    if kind is SourceKind.SKETCH:
        if I is None:
            raise ConfigError("sketch transform requires an offset")
        out = apply_offset(out, I)
    return NewDimensionImage(img=out, source_kind=kind)
