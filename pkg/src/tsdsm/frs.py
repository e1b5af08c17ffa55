"""Furniture retrieval: nearest canonical size within a category."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

SizeDistance = Callable[[np.ndarray, np.ndarray], np.ndarray]


def euclidean(query: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    return np.linalg.norm(sizes - query[None, :], axis=1)


@dataclass(frozen=True)
class FurnitureEntry:
    id: str
    category: str
    size: tuple[float, float, float]
    mesh: str = "box"

    def to_json(self) -> dict:
        return {"id": self.id, "category": self.category, "size": list(self.size), "mesh": self.mesh}

    @classmethod
    def from_json(cls, d: dict) -> "FurnitureEntry":
        return cls(d["id"], d["category"], tuple(float(v) for v in d["size"]), d.get("mesh", "box"))


class FurnitureDatabase:
    """Immutable per-category index of furniture entries.

    Buckets are sorted by id so ties in retrieval resolve to the smallest id.
    """

    def __init__(self, entries: Iterable[FurnitureEntry]):
        entries = list(entries)
        if not entries:
            raise ValueError("furniture database needs at least one entry")
        seen: set[str] = set()
        for e in entries:
            if e.id in seen:
                raise ValueError(f"duplicate furniture id {e.id!r}")
            if min(e.size) <= 0:
                raise ValueError(f"entry {e.id!r} has non-positive size {e.size}")
            seen.add(e.id)
        buckets: dict[str, list[FurnitureEntry]] = {}
        for e in sorted(entries, key=lambda e: e.id):
            buckets.setdefault(e.category, []).append(e)
        self._buckets = {c: tuple(v) for c, v in sorted(buckets.items())}
        self._sizes = {c: np.array([e.size for e in v], dtype=np.float64) for c, v in self._buckets.items()}
        self._by_id = {e.id: e for e in entries}

    @property
    def categories(self) -> list[str]:
        return list(self._buckets)

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, category: str) -> bool:
        return category in self._buckets

    def __eq__(self, other) -> bool:
        return isinstance(other, FurnitureDatabase) and self._buckets == other._buckets

    def pool(self, category: str) -> tuple[FurnitureEntry, ...]:
        return self._buckets.get(category, ())

    def entry(self, entry_id: str) -> FurnitureEntry:
        return self._by_id[entry_id]

    def bucket_sizes(self) -> dict[str, int]:
        return {c: len(v) for c, v in self._buckets.items()}

    def mesh_kind(self, category: str) -> str:
        pool = self.pool(category)
        if not pool:
            raise KeyError(f"no furniture entries for category {category!r}")
        return pool[0].mesh

    def retrieve(self, size: Sequence[float], category: str, distance: SizeDistance = euclidean
                 ) -> tuple[str, tuple[float, float, float], str]:
        """Entry of ``category`` whose canonical size is closest to ``size``.

        Returns ``(entry_id, canonical_size, category)``.
        """
        if category not in self._buckets:
            raise KeyError(f"unknown or empty category {category!r}")
        d = distance(np.asarray(size, dtype=np.float64), self._sizes[category])
        best = self._buckets[category][int(np.argmin(d))]  # argmin keeps the first (smallest id) on ties
        return best.id, best.size, best.category

    def to_json(self) -> dict:
        return {"entries": [e.to_json() for v in self._buckets.values() for e in v]}

    @classmethod
    def from_json(cls, d: dict) -> "FurnitureDatabase":
        return cls(FurnitureEntry.from_json(e) for e in d["entries"])


def build_index(entries: Iterable[FurnitureEntry]) -> FurnitureDatabase:
    return FurnitureDatabase(entries)


def retrieve(size, category: str, db: FurnitureDatabase, distance: SizeDistance = euclidean):
    return db.retrieve(size, category, distance)


def retrieve_list(furniture: Iterable[tuple[str, Sequence[float]]], db: FurnitureDatabase
                  ) -> list[tuple[str, tuple[float, float, float], str]]:
    """Map generated ``(category, size)`` pairs to database entries."""
    return [db.retrieve(size, cat) for cat, size in furniture]


def save_database(db: FurnitureDatabase, directory: str | Path) -> Path:
    """Write ``database.json`` plus one OBJ mesh proxy per referenced mesh kind."""
    from .corpus.mesh import mesh_proxy, write_obj

    directory = Path(directory)
    (directory / "meshes").mkdir(parents=True, exist_ok=True)
    manifest = db.to_json()
    for e in manifest["entries"]:
        kind = e["mesh"]
        write_obj(mesh_proxy(kind, e["category"]), directory / "meshes" / f"{kind}.obj")
        e["mesh_file"] = f"meshes/{kind}.obj"
    path = directory / "database.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path


def load_database(path: str | Path) -> FurnitureDatabase:
    path = Path(path)
    if path.is_dir():
        path = path / "database.json"
    return FurnitureDatabase.from_json(json.loads(path.read_text()))
