"""Deterministic face-like test images.

Piecewise-smooth drawings (head, hair, eyes, brows, nose, mouth over a
shaded background) so that fine-scale Haar detail is sparse, as in real
face crops.
"""

import numpy as np

from sketchmatch.image import GrayImage


def _ellipse(xx, yy, cx, cy, rx, ry):
    return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0


def face_photo(seed: int, width: int = 50, height: int = 65, noise: float = 1.5) -> GrayImage:
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(float)
    img = 60.0 + 40.0 * xx / width + rng.uniform(-15, 15)

    cx = width / 2 + rng.uniform(-2, 2)
    cy = height / 2 + rng.uniform(-1, 3)
    rx, ry = width * rng.uniform(0.32, 0.42), height * rng.uniform(0.36, 0.44)
    skin = rng.uniform(150, 210)
    head = _ellipse(xx, yy, cx, cy, rx, ry)
    img[head] = skin - 25.0 * ((xx[head] - cx) / rx) ** 2

    hair = _ellipse(xx, yy, cx, cy - ry * 0.55, rx * 1.05, ry * rng.uniform(0.45, 0.6)) & (yy < cy - ry * 0.35)
    img[hair] = rng.uniform(20, 70)

    eye_dx, eye_y = rx * rng.uniform(0.35, 0.5), cy - ry * rng.uniform(0.1, 0.25)
    eye_r = rng.uniform(2.0, 3.5)
    for sx in (-1, 1):
        img[_ellipse(xx, yy, cx + sx * eye_dx, eye_y, eye_r * 1.4, eye_r)] = rng.uniform(30, 60)
        brow = _ellipse(xx, yy, cx + sx * eye_dx, eye_y - eye_r * 2.2, eye_r * 1.8, 1.0)
        img[brow] = rng.uniform(40, 80)

    nose = (np.abs(xx - cx) < 1.2) & (yy > eye_y) & (yy < cy + ry * 0.25)
    img[nose] -= rng.uniform(20, 40)
    mouth = _ellipse(xx, yy, cx, cy + ry * rng.uniform(0.45, 0.6), rx * rng.uniform(0.3, 0.45), 1.6)
    img[mouth] = rng.uniform(70, 120)

    img += rng.normal(0.0, noise, img.shape)
    return GrayImage(np.clip(img, 0.0, 255.0))


def inverted_sketch(photo: GrayImage, seed: int) -> GrayImage:
    """Inverted copy of ``photo`` with a random contrast stretch."""
    rng = np.random.default_rng(10_000 + seed)
    inv = 255.0 - photo.pixels
    lo, hi = np.percentile(inv, [rng.uniform(1, 10), rng.uniform(90, 99)])
    stretched = (inv - lo) / (hi - lo) * 255.0
    return GrayImage(np.clip(stretched, 0.0, 255.0))


def tone_mapped_sketch(photo: GrayImage, seed: int, gamma: float | None = None) -> GrayImage:
    """Monotone (increasing) tone curve plus light pencil noise."""
    rng = np.random.default_rng(20_000 + seed)
    g = gamma if gamma is not None else rng.uniform(0.5, 0.8)
    out = 255.0 * (photo.pixels / 255.0) ** g + rng.normal(0.0, 1.0, photo.pixels.shape)
    return GrayImage(np.clip(out, 0.0, 255.0))
