"""Template-room augmentation: quarter-turn rotation, deletion and replacement."""
from __future__ import annotations

import math
import warnings
from dataclasses import replace as dc_replace
from typing import Mapping, Sequence

import numpy as np

from ..frs import FurnitureDatabase
from ..geometry import kernels
from ..scene import ObjectInstance, Room
from .config import CategorySpec

ALLOWED_ANGLES = (90, 180, 270)
# exact (cos, sin) so that repeated quarter turns compose without drift
_TURN = {0: (1.0, 0.0), 90: (0.0, 1.0), 180: (-1.0, 0.0), 270: (0.0, -1.0)}
_SUPPORT_TOL = 1e-6


class AugmentationWarning(UserWarning):
    pass


def _wrap(yaw: float) -> float:
    w = math.atan2(math.sin(yaw), math.cos(yaw))
    return math.pi if w == -math.pi else w


def centroid(room: Room) -> np.ndarray:
    if not room.objects:
        return np.zeros(2)
    return np.mean([o.location[:2] for o in room.objects], axis=0)


def augment_rotate(room: Room, angle: int) -> Room:
    """Rotate every object about the vertical axis through the room centroid."""
    if angle not in ALLOWED_ANGLES:
        raise ValueError(f"rotation angle must be one of {ALLOWED_ANGLES} degrees, got {angle!r}")
    c, s = _TURN[angle]
    cx, cy = centroid(room)
    dyaw = math.radians(angle)
    out = []
    for o in room.objects:
        x, y = o.location[0] - cx, o.location[1] - cy
        loc = (cx + c * x - s * y, cy + s * x + c * y, o.location[2])
        out.append(dc_replace(o, location=loc, yaw=_wrap(o.yaw + dyaw)))
    return room.replace(objects=tuple(out))


def find_supports(room: Room, specs: Mapping[str, CategorySpec]) -> dict[int, int]:
    """Map each decor index to the surface it rests on (top face under its base)."""
    objs = room.objects
    surfaces = [i for i, o in enumerate(objs) if specs[o.category].role == "surface-furniture"]
    out: dict[int, int] = {}
    for i, o in enumerate(objs):
        spec = specs[o.category]
        if spec.role != "decor":
            continue
        best, best_d = None, math.inf
        for j in surfaces:
            sup = objs[j]
            if sup.category not in spec.supports or abs(sup.top_z - o.base_z) > _SUPPORT_TOL:
                continue
            u, v = _to_local(sup, o.location)
            if abs(u) <= sup.size[0] + _SUPPORT_TOL and abs(v) <= sup.size[1] + _SUPPORT_TOL:
                d = math.hypot(u, v)
                if d < best_d:
                    best, best_d = j, d
        if best is not None:
            out[i] = best
    return out


def _to_local(frame: ObjectInstance, p) -> tuple[float, float]:
    c, s = math.cos(frame.yaw), math.sin(frame.yaw)
    dx, dy = p[0] - frame.location[0], p[1] - frame.location[1]
    return c * dx + s * dy, -s * dx + c * dy


def _from_local(frame: ObjectInstance, u: float, v: float) -> tuple[float, float]:
    c, s = math.cos(frame.yaw), math.sin(frame.yaw)
    return frame.location[0] + c * u - s * v, frame.location[1] + s * u + c * v


def _slab(o: ObjectInstance, size=None) -> np.ndarray:
    sx, sy = (size or o.size)[:2]
    return np.array([o.location[0], o.location[1], 0.0, sx, sy, 0.5, o.yaw])


def _pick_entry(o: ObjectInstance, pool, order, peers: list[np.ndarray], kern) -> tuple[float, float, float]:
    """First entry (in ``order``) that does not worsen footprint overlap with ``peers``."""
    if len(pool) == 1 or not peers:
        return tuple(pool[order[0]].size)
    peers = np.vstack(peers)

    def worst(size):
        return kern.iou_pairs(np.repeat(_slab(o, size)[None], len(peers), 0), peers).max()

    before = worst(o.size)
    for k in order:
        if worst(pool[k].size) <= before:
            return tuple(pool[k].size)
    return tuple(o.size)


def augment_delete_replace(room: Room, db: FurnitureDatabase, p_delete: float, seed: int,
                           specs: Mapping[str, CategorySpec]) -> Room:
    """Probabilistic deletion / replacement keyed on per-category flags.

    Deletable objects are deleted with probability ``p_delete`` and replaced
    otherwise; replaceable-only objects are always replaced. Replacement draws
    a same-category database entry, preferring ones that do not create new
    footprint overlaps, and keeps the base height. Decor resting on a deleted
    surface is deleted with it; decor on a replaced surface is re-seated.
    """
    if not 0.0 <= p_delete <= 1.0:
        raise ValueError(f"p_delete must lie in [0, 1], got {p_delete}")
    rng = np.random.default_rng(seed)
    objs = list(room.objects)
    n = len(objs)
    supports = find_supports(room, specs)
    kern = kernels.get()

    # one coin and one permutation draw per object keep the stream aligned with object order
    coin = rng.random(n)
    delete = np.zeros(n, dtype=bool)
    order: dict[int, np.ndarray] = {}
    for i, o in enumerate(objs):
        spec = specs[o.category]
        if spec.deletable and coin[i] < p_delete:
            delete[i] = True
        elif spec.deletable or spec.replaceable:
            pool = db.pool(o.category)
            if not pool:
                warnings.warn(f"no replacement entries for {o.category!r}; object kept", AugmentationWarning)
                continue
            order[i] = rng.permutation(len(pool))
    for i, j in supports.items():
        if delete[j]:
            delete[i] = True

    cur = list(objs)
    floor = [i for i in range(n) if specs[objs[i].category].on_floor and not delete[i]]
    for i in floor:
        if i not in order:
            continue
        o = cur[i]
        peers = [_slab(cur[j]) for j in floor if j != i]
        size = _pick_entry(o, db.pool(o.category), order[i], peers, kern)
        cur[i] = dc_replace(o, size=size, location=(o.location[0], o.location[1], o.base_z + size[2]))

    for i in range(n):
        o = objs[i]
        if delete[i] or specs[o.category].on_floor:
            continue
        j = supports.get(i)
        if j is not None:
            old_sup, new_sup = objs[j], cur[j]
            u, v = _to_local(old_sup, o.location)
            u = min(max(u, -new_sup.size[0]), new_sup.size[0])
            v = min(max(v, -new_sup.size[1]), new_sup.size[1])
            x, y = _from_local(new_sup, u, v)
            o = dc_replace(o, location=(x, y, new_sup.top_z + o.size[2]))
        if i in order:
            peers = [_slab(cur[k]) for k in range(n)
                     if k != i and not delete[k] and not specs[objs[k].category].on_floor and supports.get(k) == j]
            size = _pick_entry(o, db.pool(o.category), order[i], peers, kern)
            o = dc_replace(o, size=size, location=(o.location[0], o.location[1], o.base_z + size[2]))
        cur[i] = o
    return room.replace(objects=tuple(o for i, o in enumerate(cur) if not delete[i]))


def expand_corpus(rooms: Sequence[Room], db: FurnitureDatabase, factor: int, seed: int,
                  specs: Mapping[str, CategorySpec], p_delete: float = 0.3,
                  rotate: bool = True, delete_replace: bool = True) -> list[Room]:
    """``factor`` augmented variants of every template room.

    Variant 0 keeps the template id; later variants get a ``~NNN`` suffix.
    Each variant draws a quarter turn (possibly none) and a delete/replace pass.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    out = []
    for ti, room in enumerate(rooms):
        for v in range(factor):
            rng = np.random.default_rng([seed, ti, v])
            r = room
            if delete_replace:
                r = augment_delete_replace(r, db, p_delete, int(rng.integers(2**32)), specs)
            if rotate:
                angle = int(rng.choice((0, 90, 180, 270)))
                if angle:
                    r = augment_rotate(r, angle)
            rid = room.room_id if v == 0 else f"{room.room_id}~{v:03d}"
            out.append(r.replace(room_id=rid))
    return out
