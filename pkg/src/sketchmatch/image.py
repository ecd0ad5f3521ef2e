"""Pixel-level primitives: grayscale images, binary PGM I/O, RGB to gray, resize."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

# ITU-R BT.601 luma weights
GRAY_WEIGHTS = (0.299, 0.587, 0.114)


class PgmError(DataError):
    """Base class for PGM parse failures."""


class PgmMagicError(PgmError):
    pass


class PgmTruncatedError(PgmError):
    pass


class PgmMaxvalError(PgmError):
    pass


class PgmDimensionError(PgmError):
    pass


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Real-valued grayscale image.

    ``pixels`` is a float64 array of shape ``(height, width)``; row-major
    flattening gives the pixel sequence.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64)
        if arr.ndim != 2:
            raise DataError(f"expected a 2D pixel grid, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError(f"image dimensions must be positive, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("pixel values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_flat(cls, width: int, height: int, values) -> GrayImage:
        values = np.asarray(values, dtype=np.float64)
        if width < 1 or height < 1:
            raise DataError(f"image dimensions must be positive, got {width}x{height}")
        if values.size != width * height:
            raise DataError(f"expected {width * height} pixels, got {values.size}")
        return cls(values.reshape(height, width))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def dims(self) -> tuple[int, int]:
        """``(width, height)``."""
        return self.width, self.height

    def flat(self) -> np.ndarray:
        return self.pixels.reshape(-1)

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit RGB image, ``pixels`` of shape ``(height, width, 3)``."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise DataError(f"expected shape (height, width, 3), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError("image dimensions must be positive")
        if np.any(arr != np.round(arr)) or arr.min() < 0 or arr.max() > 255:
            raise DataError("RGB channels must be integers in [0, 255]")
        arr = arr.astype(np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def rgb_to_gray(img: RgbImage) -> GrayImage:
    """Luma conversion with BT.601 weights; no rounding."""
    r, g, b = (img.pixels[..., k].astype(np.float64) for k in range(3))
    wr, wg, wb = GRAY_WEIGHTS
    gray = wr * r + wg * g + wb * b
    # float summation can overshoot 255 by an ulp
    return GrayImage(np.clip(gray, 0.0, 255.0))


def _source_coords(n_out: int, n_in: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, pos - lo


def resize_bilinear(img: GrayImage, out_w: int, out_h: int) -> GrayImage:
    """Bilinear resize with center-aligned sampling and edge clamping."""
    if out_w < 1 or out_h < 1:
        raise ConfigError(f"target size must be positive, got {out_w}x{out_h}")
    src = img.pixels
    x0, x1, fx = _source_coords(out_w, img.width)
    y0, y1, fy = _source_coords(out_h, img.height)

    top = src[y0][:, x0] * (1.0 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1.0 - fx) + src[y1][:, x1] * fx
    out = top * (1.0 - fy)[:, None] + bottom * fy[:, None]
    return GrayImage(out)


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*([^\s#]+)")


def read_pgm(data: bytes) -> GrayImage:
    """Parse a binary (P5) PGM with maxval <= 255.

    Pixel values are the raw stored bytes; they are not rescaled by maxval.
    """
    data = bytes(data)
    if data[:2] != b"P5":
        raise PgmMagicError(f"unsupported magic {data[:2]!r}, expected b'P5'")

    pos = 2
    fields = []
    for name in ("width", "height", "maxval"):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise PgmTruncatedError(f"header ended before {name}")
        try:
            fields.append(int(m.group(1)))
        except ValueError:
            raise PgmError(f"bad {name} field {m.group(1)!r}") from None
        pos = m.end()
    width, height, maxval = fields

    if width <= 0 or height <= 0:
        raise PgmDimensionError(f"non-positive dimensions {width}x{height}")
    if maxval > 255:
        raise PgmMaxvalError(f"maxval {maxval} > 255 is not supported")
    if maxval <= 0:
        raise PgmMaxvalError(f"maxval must be positive, got {maxval}")

    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PgmTruncatedError("missing whitespace after maxval")
    pos += 1

    n = width * height
    raster = data[pos : pos + n]
    if len(raster) < n:
        raise PgmTruncatedError(f"expected {n} pixel bytes, got {len(raster)}")
    values = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    return GrayImage(values.reshape(height, width))


def quantize(pixels: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round half away from zero to uint8."""
    clamped = np.clip(pixels, 0.0, 255.0)
    return np.floor(clamped + 0.5).astype(np.uint8)


def write_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + quantize(img.pixels).tobytes()


def load_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(path, img: GrayImage) -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(img))
