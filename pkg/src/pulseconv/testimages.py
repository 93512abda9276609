"""Deterministic synthetic test images (smooth scenes with edges and texture)."""

from __future__ import annotations

import numpy as np
from scipy import ndimage


def scene(size: int = 64, seed: int = 0) -> np.ndarray:
    """A natural-looking 8-bit image: blurred random field, a few shapes, mild noise."""
    rng = np.random.default_rng(seed)
    h = w = size
    field = ndimage.gaussian_filter(rng.standard_normal((h, w)), sigma=size / 10, mode="reflect")
    field = (field - field.min()) / (np.ptp(field) or 1.0)
    yy, xx = np.mgrid[0:h, 0:w] / size
    img = 0.55 * field + 0.25 * (xx * rng.uniform(-1, 1) + yy * rng.uniform(-1, 1))
    for _ in range(3):
        cy, cx, r = rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.08, 0.25)
        img += rng.uniform(-0.3, 0.3) * (((yy - cy) ** 2 + (xx - cx) ** 2) < r * r)
    x0, y0 = rng.uniform(0.1, 0.6, size=2)
    img += rng.uniform(-0.25, 0.25) * ((xx > x0) & (xx < x0 + 0.3) & (yy > y0) & (yy < y0 + 0.3))
    img += 0.02 * rng.standard_normal((h, w))
    img = (img - img.min()) / (np.ptp(img) or 1.0)
    return np.clip(np.round(img * 255), 0, 255).astype(np.uint8)


def test_set(size: int = 64, seed: int = 2024, count: int = 3) -> list[np.ndarray]:
    return [scene(size, seed + k) for k in range(count)]


def random_image(shape, seed: int = 0, high: int = 256) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, high, size=shape).astype(np.uint8)
