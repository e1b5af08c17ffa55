"""Procedural room generation.

Floor furniture is scattered inside the room footprint with non-overlapping
footprints and wall-aligned yaw; decor is seated on the top face of a
supporting surface, inside its footprint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..frs import FurnitureDatabase, FurnitureEntry
from ..geometry import kernels
from ..scene import ObjectInstance, Room
from .config import CategorySpec, CorpusConfig, CountDistribution, RoomTypeSpec

_QUARTER_TURNS = (0.0, 0.5 * math.pi, math.pi, -0.5 * math.pi)


class PlacementError(RuntimeError):
    pass


def build_database(config: CorpusConfig, seed: int | None = None) -> FurnitureDatabase:
    """Deterministic catalogue of ``entries_per_category`` sizes per category."""
    seed = config.seed if seed is None else seed
    entries = []
    for ci, name in enumerate(config.category_names()):
        spec = config.categories[name]
        rng = np.random.default_rng([seed, 7919, ci])
        lo, hi = np.asarray(spec.size_min), np.asarray(spec.size_max)
        for i in range(config.entries_per_category):
            size = np.round(rng.uniform(lo, hi), 4)
            entries.append(FurnitureEntry(f"{name}-{i:03d}", name, tuple(float(v) for v in size), spec.mesh))
    return FurnitureDatabase(entries)


def sample_count(dist: CountDistribution, rng: np.random.Generator) -> int:
    if dist.min == dist.max:
        return dist.min
    while True:
        n = int(rng.poisson(dist.mean))
        if dist.min <= n <= dist.max:
            return n


@dataclass
class _Placed:
    obj: ObjectInstance
    spec: CategorySpec
    support: int | None = None


def _footprint_box(loc, size, yaw):
    # unit-height slab: 3D IoU of slabs equals footprint IoU
    return np.array([loc[0], loc[1], 0.0, size[0], size[1], 0.5, yaw])


class _RoomBuilder:
    def __init__(self, config: CorpusConfig, rt: RoomTypeSpec, db: FurnitureDatabase, rng: np.random.Generator):
        self.config = config
        self.rt = rt
        self.db = db
        self.rng = rng
        lo, hi = rt.half_extent_range
        self.half = rng.uniform(lo, hi, size=2)
        self.placed: list[_Placed] = []
        self.kern = kernels.get()

    def _entry(self, category: str) -> FurnitureEntry:
        pool = self.db.pool(category)
        if not pool:
            raise PlacementError(f"no database entries for {category!r}")
        return pool[int(self.rng.integers(len(pool)))]

    def _overlaps(self, cand: np.ndarray, others: list[np.ndarray]) -> bool:
        if not others:
            return False
        others = np.vstack(others)
        iou = self.kern.iou_pairs(np.repeat(cand[None], len(others), 0), others)
        return bool(np.any(iou > self.config.max_footprint_iou))

    def place_floor(self, spec: CategorySpec) -> bool:
        entry = self._entry(spec.name)
        sx, sy, sz = entry.size
        floor = [_footprint_box(p.obj.location, p.obj.size, p.obj.yaw) for p in self.placed if p.spec.on_floor]
        for _ in range(self.config.placement_tries):
            q = int(self.rng.integers(4))
            yaw = _QUARTER_TURNS[q]
            ex, ey = (sx, sy) if q % 2 == 0 else (sy, sx)
            if ex >= self.half[0] or ey >= self.half[1]:
                return False
            x = self.rng.uniform(-self.half[0] + ex, self.half[0] - ex)
            y = self.rng.uniform(-self.half[1] + ey, self.half[1] - ey)
            cand = _footprint_box((x, y), (sx, sy), yaw)
            if self._overlaps(cand, floor):
                continue
            self.placed.append(_Placed(ObjectInstance(spec.name, entry.size, (x, y, sz), yaw), spec))
            return True
        return False

    def place_decor(self, spec: CategorySpec) -> bool:
        supports = [i for i, p in enumerate(self.placed) if p.spec.name in spec.supports]
        if not supports:
            return False
        entry = self._entry(spec.name)
        dx, dy, dz = entry.size
        for _ in range(self.config.placement_tries):
            si = supports[int(self.rng.integers(len(supports)))]
            sup = self.placed[si].obj
            q = int(self.rng.integers(4))
            ex, ey = (dx, dy) if q % 2 == 0 else (dy, dx)
            if ex > sup.size[0] or ey > sup.size[1]:
                continue
            u = self.rng.uniform(-(sup.size[0] - ex), sup.size[0] - ex)
            v = self.rng.uniform(-(sup.size[1] - ey), sup.size[1] - ey)
            c, s = math.cos(sup.yaw), math.sin(sup.yaw)
            x = sup.location[0] + c * u - s * v
            y = sup.location[1] + s * u + c * v
            yaw = _wrap(sup.yaw + _QUARTER_TURNS[q])
            cand = _footprint_box((x, y), (dx, dy), yaw)
            siblings = [_footprint_box(p.obj.location, p.obj.size, p.obj.yaw) for p in self.placed if p.support == si]
            if self._overlaps(cand, siblings):
                continue
            obj = ObjectInstance(spec.name, entry.size, (x, y, sup.top_z + dz), yaw)
            self.placed.append(_Placed(obj, spec, support=si))
            return True
        return False

    def place(self, spec: CategorySpec) -> bool:
        return self.place_floor(spec) if spec.on_floor else self.place_decor(spec)


def _wrap(yaw: float) -> float:
    w = math.atan2(math.sin(yaw), math.cos(yaw))
    return math.pi if w == -math.pi else w


def _attempt(config: CorpusConfig, rt: RoomTypeSpec, db: FurnitureDatabase, rng: np.random.Generator) -> list[ObjectInstance]:
    n = max(sample_count(rt.counts, rng), len(rt.required))
    b = _RoomBuilder(config, rt, db, rng)
    counts: dict[str, int] = {}
    for name in rt.required:
        if not b.place(config.categories[name]):
            raise PlacementError(f"could not place required {name!r}")
        counts[name] = counts.get(name, 0) + 1
    blocked: set[str] = set()
    names = list(rt.menu)
    weights = np.array([rt.menu[c] for c in names], dtype=np.float64)
    while len(b.placed) < n:
        ok = np.array([
            c not in blocked and counts.get(c, 0) < rt.max_per_room.get(c, 10**9)
            and (config.categories[c].on_floor
                 or any(p.spec.name in config.categories[c].supports for p in b.placed))
            for c in names
        ])
        if not ok.any():
            raise PlacementError("ran out of placeable categories")
        w = np.where(ok, weights, 0.0)
        name = names[int(rng.choice(len(names), p=w / w.sum()))]
        if b.place(config.categories[name]):
            counts[name] = counts.get(name, 0) + 1
        else:
            blocked.add(name)
    return [p.obj for p in b.placed]


def generate_room(config: CorpusConfig, room_type: str, seed: int, db: FurnitureDatabase | None = None,
                  room_id: str | None = None) -> Room:
    """One room of ``room_type``, fully determined by ``seed``.

    Failed placements regenerate the whole room from a fresh sub-seed.
    """
    if room_type not in config.room_types:
        raise KeyError(f"unknown room type {room_type!r}")
    rt = config.room_types[room_type]
    db = build_database(config) if db is None else db
    root = np.random.SeedSequence([int(seed)])
    for sub in root.spawn(config.max_room_attempts):
        try:
            objects = _attempt(config, rt, db, np.random.default_rng(sub))
        except PlacementError:
            continue
        return Room(room_type, tuple(objects), room_id if room_id is not None else f"{room_type}-{seed}")
    raise PlacementError(f"room type {room_type!r} unsatisfiable after {config.max_room_attempts} attempts")


def generate_corpus(config: CorpusConfig, room_type: str, n_rooms: int | None = None,
                    db: FurnitureDatabase | None = None, seed: int | None = None) -> list[Room]:
    n_rooms = config.rooms_per_type if n_rooms is None else n_rooms
    seed = config.seed if seed is None else seed
    db = build_database(config) if db is None else db
    type_idx = sorted(config.room_types).index(room_type)
    seeds = np.random.SeedSequence([seed, type_idx]).generate_state(n_rooms, dtype=np.uint32)
    return [generate_room(config, room_type, int(s), db, room_id=f"{room_type}-{i:05d}") for i, s in enumerate(seeds)]
