"""Top-down semantic maps: yaw-rotated footprints filled with category colours."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus.mesh import BACKGROUND_RGB, category_color
from ..geometry import kernels
from ..geometry._kernels_numpy import footprint_corners
from ..scene import Room

DEFAULT_RESOLUTION = 64
DEFAULT_EXTENT = 4.0  # metres from the origin to the image edge


class ExtentWarning(UserWarning):
    pass


@dataclass
class TopDownMap:
    image: np.ndarray  # (H, W, 3) uint8, row 0 at +y
    extent: float

    @property
    def resolution(self) -> int:
        return self.image.shape[0]

    @property
    def pixel_area(self) -> float:
        return (2.0 * self.extent / self.resolution) ** 2

    def filled(self) -> np.ndarray:
        return np.any(self.image != np.asarray(BACKGROUND_RGB, dtype=np.uint8), axis=-1)


def rasterize_topdown(room: Room, resolution: int = DEFAULT_RESOLUTION, extent: float = DEFAULT_EXTENT,
                      backend: str | None = None) -> TopDownMap:
    """Paint footprints lowest base first; anything past ``extent`` is clipped with a warning."""
    boxes = room.boxes()
    if len(boxes):
        corners = footprint_corners(boxes)
        if np.abs(corners).max() > extent:
            warnings.warn(f"room {room.room_id!r} extends past +-{extent} m and is clipped", ExtentWarning)
        colors = np.array([category_color(c) for c in room.categories()], dtype=np.uint8)
        order = np.argsort([o.base_z for o in room.objects], kind="stable").astype(np.int64)
    else:
        colors = np.zeros((0, 3), dtype=np.uint8)
        order = np.zeros(0, dtype=np.int64)
    kern = kernels.get(backend)
    img = kern.rasterize(boxes, colors, order, int(resolution), float(extent),
                         np.asarray(BACKGROUND_RGB, dtype=np.uint8))
    return TopDownMap(img, float(extent))


def rasterize_corpus(rooms, resolution: int = DEFAULT_RESOLUTION, extent: float = DEFAULT_EXTENT) -> np.ndarray:
    """Stacked images ``(R, H, W, 3)``."""
    if not rooms:
        return np.zeros((0, resolution, resolution, 3), dtype=np.uint8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExtentWarning)
        return np.stack([rasterize_topdown(r, resolution, extent).image for r in rooms])


def save_png(m: TopDownMap | np.ndarray, path: str | Path, scale: int = 4) -> None:
    from PIL import Image

    img = m.image if isinstance(m, TopDownMap) else m
    im = Image.fromarray(np.ascontiguousarray(img), mode="RGB")
    if scale > 1:
        im = im.resize((img.shape[1] * scale, img.shape[0] * scale), Image.NEAREST)
    im.save(path)
