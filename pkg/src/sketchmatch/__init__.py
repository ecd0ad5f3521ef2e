"""Face sketch to photo matching via Haar diagonal bands, PCA and K-NN/SVM ranking."""

from .errors import ConfigError, DataError, NumericError, SketchMatchError
from .image import GrayImage, RgbImage, read_pgm, resize_bilinear, rgb_to_gray, write_pgm

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "GrayImage",
    "NumericError",
    "RgbImage",
    "SketchMatchError",
    "read_pgm",
    "resize_bilinear",
    "rgb_to_gray",
    "write_pgm",
]
