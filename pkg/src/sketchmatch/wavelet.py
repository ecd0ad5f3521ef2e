"""Separable 2D Haar analysis with replicate padding for odd lengths.

Filters use the orthonormal 1/sqrt(2) convention. A 2D step filters rows
first, then columns::

    approx   = H_col H_row c
    detail_v = G_col H_row c
    detail_h = H_col G_row c
    detail_d = G_col G_row c
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .image import GrayImage

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class HaarLevel:
    approx: GrayImage
    detail_v: GrayImage
    detail_h: GrayImage
    detail_d: GrayImage
    level: int = 1

    def __post_init__(self):
        dims = {b.dims for b in self.bands()}
        if len(dims) != 1:
            raise DataError(f"band dimensions differ: {sorted(dims)}")
        if self.level < 1:
            raise DataError(f"level must be >= 1, got {self.level}")

    def bands(self) -> tuple[GrayImage, GrayImage, GrayImage, GrayImage]:
        return self.approx, self.detail_v, self.detail_h, self.detail_d

    @property
    def dims(self) -> tuple[int, int]:
        return self.approx.dims


@dataclass(frozen=True)
class WaveletPyramid:
    levels: tuple[HaarLevel, ...]
    source_dims: tuple[int, int]

    @property
    def J(self) -> int:
        return len(self.levels)


def half_length(n: int) -> int:
    return (n + 1) // 2


def band_dims(width: int, height: int, levels: int) -> tuple[int, int]:
    """Band size after ``levels`` pad-to-even halvings; raises if exhausted."""
    if levels < 1:
        raise ConfigError(f"number of levels must be >= 1, got {levels}")
    w, h = width, height
    for j in range(1, levels + 1):
        if w < 2 and h < 2:
            raise ConfigError(f"{width}x{height} image cannot be decomposed to level {j}")
        w, h = half_length(w), half_length(h)
    return w, h


def _pad_axis(a: np.ndarray, axis: int) -> np.ndarray:
    if a.shape[axis] % 2 == 0:
        return a
    last = np.take(a, [-1], axis=axis)
    return np.concatenate([a, last], axis=axis)


def _analyze(a: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    a = _pad_axis(a, axis)
    even = np.take(a, np.arange(0, a.shape[axis], 2), axis=axis)
    odd = np.take(a, np.arange(1, a.shape[axis], 2), axis=axis)
    return (even + odd) / SQRT2, (even - odd) / SQRT2


def haar_step_1d(signal) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(signal, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise DataError("signal must be a non-empty 1D sequence")
    return _analyze(s, axis=0)


def haar_step_2d(img: GrayImage, level: int = 1) -> HaarLevel:
    """One analysis step: rows (axis 1), then columns (axis 0)."""
    low_rows, high_rows = _analyze(img.pixels, axis=1)
    approx, detail_v = _analyze(low_rows, axis=0)
    detail_h, detail_d = _analyze(high_rows, axis=0)
    return HaarLevel(
        approx=GrayImage(approx),
        detail_v=GrayImage(detail_v),
        detail_h=GrayImage(detail_h),
        detail_d=GrayImage(detail_d),
        level=level,
    )


def decompose(img: GrayImage, J: int) -> WaveletPyramid:
    band_dims(img.width, img.height, J)
    levels = []
    current = img
    for j in range(1, J + 1):
        step = haar_step_2d(current, level=j)
        levels.append(step)
        current = step.approx
    return WaveletPyramid(levels=tuple(levels), source_dims=img.dims)


def diagonal_band(p: WaveletPyramid, j: int) -> GrayImage:
    """HH coefficients at level ``j`` (1-based)."""
    if not 1 <= j <= p.J:
        raise ConfigError(f"level {j} out of range 1..{p.J}")
    return p.levels[j - 1].detail_d


def _synthesize(low: np.ndarray, high: np.ndarray, axis: int, n: int) -> np.ndarray:
    even = (low + high) / SQRT2
    odd = (low - high) / SQRT2
    shape = list(low.shape)
    shape[axis] *= 2
    out = np.empty(shape, dtype=np.float64)
    idx_even = [slice(None)] * out.ndim
    idx_odd = [slice(None)] * out.ndim
    idx_even[axis] = slice(0, None, 2)
    idx_odd[axis] = slice(1, None, 2)
    out[tuple(idx_even)] = even
    out[tuple(idx_odd)] = odd
    return np.take(out, np.arange(n), axis=axis)


def reconstruct_step_2d(level: HaarLevel, orig_dims: tuple[int, int]) -> GrayImage:
    """Invert :func:`haar_step_2d`, dropping any padded row/column."""
    w, h = orig_dims
    if w < 1 or h < 1 or (half_length(w), half_length(h)) != level.dims:
        raise DataError(f"original dims {orig_dims} inconsistent with band dims {level.dims}")
    low_rows = _synthesize(level.approx.pixels, level.detail_v.pixels, axis=0, n=h)
    high_rows = _synthesize(level.detail_h.pixels, level.detail_d.pixels, axis=0, n=h)
    return GrayImage(_synthesize(low_rows, high_rows, axis=1, n=w))
