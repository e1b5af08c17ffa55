"""Yaw-rotated 3D boxes and their exact intersection-over-union.

Conventions: z is up, +y is an object's front at yaw 0, yaw is measured
counter-clockwise about +z. Boxes carry half-extents.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels


@dataclass(frozen=True)
class RotatedBox3D:
    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]
    yaw: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([*self.center, *self.half_extents, self.yaw], dtype=np.float64)

    @property
    def volume(self) -> float:
        hx, hy, hz = self.half_extents
        return 8.0 * hx * hy * hz

    def corners(self) -> np.ndarray:
        """The 8 corners, bottom face first (counter-clockwise seen from above)."""
        foot = kernels.get("numpy").footprint_corners(self.as_array()[None])[0]
        cz, hz = self.center[2], self.half_extents[2]
        bottom = np.column_stack([foot, np.full(4, cz - hz)])
        top = np.column_stack([foot, np.full(4, cz + hz)])
        return np.vstack([bottom, top])


def _check(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64).reshape(-1, 7)
    if not np.all(np.isfinite(arr)):
        raise ValueError("box parameters must be finite")
    if np.any(arr[:, 3:6] <= 0):
        raise ValueError("boxes must have strictly positive half-extents (zero-volume box)")
    return arr


def rotated_iou_3d(a: RotatedBox3D, b: RotatedBox3D, backend: str | None = None) -> float:
    """Volume IoU of two yaw-rotated boxes."""
    arr_a = _check(a.as_array())
    arr_b = _check(b.as_array())
    return float(kernels.get(backend).iou_pairs(arr_a, arr_b)[0])


def iou_matrix(boxes: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Symmetric ``(n, n)`` IoU matrix for box rows ``[cx, cy, cz, hx, hy, hz, yaw]``."""
    arr = _check(boxes)
    if len(arr) == 0:
        return np.zeros((0, 0))
    return kernels.get(backend).iou_matrix(arr)


def pairwise_iou_sum(boxes: np.ndarray, backend: str | None = None) -> float:
    arr = np.asarray(boxes, dtype=np.float64).reshape(-1, 7)
    if len(arr) < 2:
        return 0.0
    m = iou_matrix(arr, backend)
    return float(np.triu(m, k=1).sum())


def axis_aligned_iou(a: RotatedBox3D, b: RotatedBox3D) -> float:
    """Closed-form IoU ignoring yaw."""
    ca, ha = np.asarray(a.center), np.asarray(a.half_extents)
    cb, hb = np.asarray(b.center), np.asarray(b.half_extents)
    lo = np.maximum(ca - ha, cb - hb)
    hi = np.minimum(ca + ha, cb + hb)
    inter = float(np.prod(np.clip(hi - lo, 0.0, None)))
    return inter / (a.volume + b.volume - inter)


def stack(boxes: Iterable[RotatedBox3D]) -> np.ndarray:
    rows = [b.as_array() for b in boxes]
    return np.vstack(rows) if rows else np.zeros((0, 7))
