"""Image feature extractors for the distribution distances."""
from __future__ import annotations

from typing import Protocol

import numpy as np


class FeatureExtractor(Protocol):
    name: str

    def __call__(self, images: np.ndarray) -> np.ndarray: ...


def block_mean(images: np.ndarray, size: int) -> np.ndarray:
    """Average-pool ``(R, H, W, C)`` images to ``(R, size, size, C)``; H and W must be multiples of ``size``."""
    r, h, w, c = images.shape
    if h % size or w % size:
        raise ValueError(f"image size {h}x{w} is not a multiple of {size}")
    return images.reshape(r, size, h // size, size, w // size, c).mean(axis=(2, 4))


class RandomProjection:
    """Seeded Gaussian projection of block-averaged pixels."""

    def __init__(self, dim: int = 64, pool: int = 16, seed: int = 0):
        self.dim = dim
        self.pool = pool
        self.seed = seed
        self.name = f"randproj-p{pool}-d{dim}-s{seed}"
        self._w: np.ndarray | None = None

    def __call__(self, images: np.ndarray) -> np.ndarray:
        x = block_mean(np.asarray(images, dtype=np.float64) / 255.0, self.pool).reshape(len(images), -1)
        if self._w is None or self._w.shape[0] != x.shape[1]:
            rng = np.random.default_rng(self.seed)
            self._w = rng.standard_normal((x.shape[1], self.dim)) / np.sqrt(x.shape[1])
        return x @ self._w
