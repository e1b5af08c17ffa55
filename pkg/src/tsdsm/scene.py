"""Rooms, objects and the fixed-length normalized scene tensor.

A scene tensor row is ``[size(3) | class one-hot(k) | location(3) | rotation(2)]``
where the class block includes a trailing "empty" pseudo-class used to pad
rooms to ``n_max`` rows. Sizes are half-extents; rotation is ``[sin, cos]``
of the yaw about +z.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .geometry import RotatedBox3D, pairwise_iou_sum

EMPTY = "<empty>"
N_MAX_DEFAULT = 32
MIN_SIZE = 1e-4
_RANGE_PAD = 1e-3


class CapacityError(ValueError):
    """A room has more objects than the tensor has rows."""


@dataclass(frozen=True)
class ObjectInstance:
    category: str
    size: tuple[float, float, float]
    location: tuple[float, float, float]
    yaw: float = 0.0

    def __post_init__(self):
        if len(self.size) != 3 or len(self.location) != 3:
            raise ValueError("size and location must be 3-vectors")
        if min(self.size) <= 0:
            raise ValueError(f"{self.category}: size components must be positive, got {self.size}")

    @property
    def rotation(self) -> tuple[float, float]:
        return (math.sin(self.yaw), math.cos(self.yaw))

    @property
    def base_z(self) -> float:
        return self.location[2] - self.size[2]

    @property
    def top_z(self) -> float:
        return self.location[2] + self.size[2]

    def box(self) -> RotatedBox3D:
        return RotatedBox3D(tuple(self.location), tuple(self.size), self.yaw)

    def box_row(self) -> np.ndarray:
        return np.array([*self.location, *self.size, self.yaw], dtype=np.float64)

    def to_json(self) -> dict:
        return {
            "class": self.category,
            "size": [float(v) for v in self.size],
            "location": [float(v) for v in self.location],
            "yaw": float(self.yaw),
        }

    @classmethod
    def from_json(cls, d: dict) -> "ObjectInstance":
        return cls(d["class"], tuple(map(float, d["size"])), tuple(map(float, d["location"])), float(d["yaw"]))


@dataclass(frozen=True)
class Room:
    room_type: str
    objects: tuple[ObjectInstance, ...]
    room_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))

    def __len__(self) -> int:
        return len(self.objects)

    def boxes(self) -> np.ndarray:
        if not self.objects:
            return np.zeros((0, 7))
        return np.vstack([o.box_row() for o in self.objects])

    def categories(self) -> list[str]:
        return [o.category for o in self.objects]

    def replace(self, **kw) -> "Room":
        d = {"room_type": self.room_type, "objects": self.objects, "room_id": self.room_id}
        d.update(kw)
        return Room(**d)

    def to_json(self) -> dict:
        return {
            "room_id": self.room_id,
            "room_type": self.room_type,
            "objects": [o.to_json() for o in self.objects],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Room":
        return cls(d["room_type"], tuple(ObjectInstance.from_json(o) for o in d["objects"]), d.get("room_id", ""))


def pairwise_scene_iou(room: Room, backend: str | None = None) -> float:
    """Sum of rotated 3D IoU over unordered object pairs."""
    return pairwise_iou_sum(room.boxes(), backend)


def dump_room(room: Room, path: str | Path) -> None:
    Path(path).write_text(json.dumps(room.to_json(), indent=1, sort_keys=True) + "\n")


def load_room(path: str | Path) -> Room:
    return Room.from_json(json.loads(Path(path).read_text()))


class CategoryVocab:
    """Ordered category list with the empty pseudo-class appended last."""

    def __init__(self, names: Iterable[str]):
        names = list(dict.fromkeys(names))
        if EMPTY in names:
            raise ValueError(f"{EMPTY!r} is reserved")
        if not names:
            raise ValueError("vocabulary needs at least one category")
        self.names: list[str] = names
        self._index = {n: i for i, n in enumerate(names)}
        self._index[EMPTY] = len(names)

    @property
    def k(self) -> int:
        """One-hot width, including the empty class."""
        return len(self.names) + 1

    @property
    def empty_index(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown category {name!r}") from None

    def name(self, idx: int) -> str:
        return EMPTY if idx == self.empty_index else self.names[idx]

    def __contains__(self, name: str) -> bool:
        return name in self._index and name != EMPTY

    def __eq__(self, other) -> bool:
        return isinstance(other, CategoryVocab) and other.names == self.names

    def to_json(self) -> list[str]:
        return list(self.names)

    @classmethod
    def from_json(cls, names: list[str]) -> "CategoryVocab":
        return cls(names)

    @classmethod
    def from_rooms(cls, rooms: Iterable[Room]) -> "CategoryVocab":
        return cls(sorted({o.category for r in rooms for o in r.objects}))


@dataclass
class NormalizationStats:
    """Per-axis ranges mapping sizes and locations to ``[-1, 1]``."""

    size_min: np.ndarray
    size_max: np.ndarray
    loc_min: np.ndarray
    loc_max: np.ndarray

    def __post_init__(self):
        for name in ("size_min", "size_max", "loc_min", "loc_max"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64).reshape(3))
        if np.any(self.size_min >= self.size_max) or np.any(self.loc_min >= self.loc_max):
            raise ValueError("normalization ranges need min < max on every axis")

    @classmethod
    def from_rooms(cls, rooms: Iterable[Room]) -> "NormalizationStats":
        sizes, locs = [], []
        for r in rooms:
            for o in r.objects:
                sizes.append(o.size)
                locs.append(o.location)
        if not sizes:
            raise ValueError("cannot compute normalization stats from rooms without objects")
        sizes = np.asarray(sizes)
        locs = np.asarray(locs)
        return cls(*_widen(sizes.min(0), sizes.max(0)), *_widen(locs.min(0), locs.max(0)))

    @staticmethod
    def _fwd(x, lo, hi):
        return 2.0 * (x - lo) / (hi - lo) - 1.0

    @staticmethod
    def _inv(y, lo, hi):
        return (y + 1.0) * 0.5 * (hi - lo) + lo

    def normalize_size(self, s):
        return self._fwd(np.asarray(s, dtype=np.float64), self.size_min, self.size_max)

    def denormalize_size(self, s):
        return self._inv(np.asarray(s, dtype=np.float64), self.size_min, self.size_max)

    def normalize_location(self, x):
        return self._fwd(np.asarray(x, dtype=np.float64), self.loc_min, self.loc_max)

    def denormalize_location(self, x):
        return self._inv(np.asarray(x, dtype=np.float64), self.loc_min, self.loc_max)

    def to_json(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("size_min", "size_max", "loc_min", "loc_max")}

    @classmethod
    def from_json(cls, d: dict) -> "NormalizationStats":
        return cls(d["size_min"], d["size_max"], d["loc_min"], d["loc_max"])


def _widen(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # a constant attribute still needs a non-degenerate range
    flat = hi - lo < _RANGE_PAD
    return np.where(flat, lo - _RANGE_PAD, lo), np.where(flat, hi + _RANGE_PAD, hi)


@dataclass
class SceneTensor:
    values: np.ndarray  # (n_max, 3 + k + 3 + 2)
    mask: np.ndarray  # (n_max,) bool

    @property
    def n_max(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Layout:
    """Column slices of a scene tensor row for a vocabulary of width ``k``."""

    k: int
    size: slice = field(init=False)
    cls: slice = field(init=False)
    loc: slice = field(init=False)
    rot: slice = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "size", slice(0, 3))
        object.__setattr__(self, "cls", slice(3, 3 + self.k))
        object.__setattr__(self, "loc", slice(3 + self.k, 6 + self.k))
        object.__setattr__(self, "rot", slice(6 + self.k, 8 + self.k))

    @property
    def width(self) -> int:
        return 8 + self.k

    @property
    def size_cls(self) -> slice:
        return slice(0, 3 + self.k)

    @property
    def loc_rot(self) -> slice:
        return slice(3 + self.k, 8 + self.k)


def empty_row(vocab: CategoryVocab) -> np.ndarray:
    lay = Layout(vocab.k)
    row = np.zeros(lay.width)
    row[lay.cls] = -1.0
    row[lay.cls.start + vocab.empty_index] = 1.0
    row[lay.rot] = (0.0, 1.0)
    return row


def encode_scene(room: Room, stats: NormalizationStats, vocab: CategoryVocab, n_max: int = N_MAX_DEFAULT) -> SceneTensor:
    """Encode a room into a padded ``(n_max, 8 + k)`` tensor in ``[-1, 1]``.

    Values outside the normalization range are clipped.
    """
    n = len(room.objects)
    if n > n_max:
        raise CapacityError(f"room {room.room_id!r} has {n} objects, capacity is {n_max}")
    lay = Layout(vocab.k)
    values = np.tile(empty_row(vocab), (n_max, 1))
    for i, obj in enumerate(room.objects):
        if obj.category not in vocab:
            raise KeyError(f"unknown category {obj.category!r} in room {room.room_id!r}")
        row = values[i]
        row[lay.size] = stats.normalize_size(obj.size)
        row[lay.cls] = -1.0
        row[lay.cls.start + vocab.index(obj.category)] = 1.0
        row[lay.loc] = stats.normalize_location(obj.location)
        row[lay.rot] = obj.rotation
    mask = np.zeros(n_max, dtype=bool)
    mask[:n] = True
    return SceneTensor(np.clip(values, -1.0, 1.0), mask)


def decode_rows(values: np.ndarray, stats: NormalizationStats, vocab: CategoryVocab) -> list[ObjectInstance]:
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("scene tensor contains non-finite values")
    lay = Layout(vocab.k)
    if values.ndim != 2 or values.shape[1] != lay.width:
        raise ValueError(f"expected rows of width {lay.width}, got shape {values.shape}")
    labels = np.argmax(values[:, lay.cls], axis=1)
    out = []
    for row, lab in zip(values, labels):
        if lab == vocab.empty_index:
            continue
        size = np.maximum(stats.denormalize_size(row[lay.size]), MIN_SIZE)
        loc = stats.denormalize_location(row[lay.loc])
        out.append(ObjectInstance(vocab.name(int(lab)), tuple(size), tuple(loc), rotation_to_yaw(row[lay.rot])))
    return out


def decode_scene(tensor: SceneTensor | np.ndarray, stats: NormalizationStats, vocab: CategoryVocab,
                 room_type: str = "", room_id: str = "") -> Room:
    values = tensor.values if isinstance(tensor, SceneTensor) else tensor
    return Room(room_type, tuple(decode_rows(values, stats, vocab)), room_id)


def rotation_to_yaw(rot: Sequence[float]) -> float:
    """Yaw from a (possibly unnormalized) ``[sin, cos]`` pair."""
    s, c = float(rot[0]), float(rot[1])
    norm = math.hypot(s, c)
    if norm < 1e-12:
        return 0.0
    return math.atan2(s / norm, c / norm)


def encode_corpus(rooms: Sequence[Room], stats: NormalizationStats, vocab: CategoryVocab,
                  n_max: int = N_MAX_DEFAULT) -> tuple[np.ndarray, np.ndarray]:
    """Stacked scene tensors ``(R, n_max, 8 + k)`` and masks ``(R, n_max)``."""
    encoded = [encode_scene(r, stats, vocab, n_max) for r in rooms]
    if not encoded:
        return np.zeros((0, n_max, Layout(vocab.k).width)), np.zeros((0, n_max), dtype=bool)
    return np.stack([e.values for e in encoded]), np.stack([e.mask for e in encoded])
