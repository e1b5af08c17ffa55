"""Corpus directory layout: ``<root>/<split>/<room_id>.json``."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from ..scene import NormalizationStats, Room, dump_room, load_room


def write_split(root: str | Path, split: str, rooms: Iterable[Room]) -> Path:
    d = Path(root) / split
    d.mkdir(parents=True, exist_ok=True)
    for r in rooms:
        if not r.room_id or "/" in r.room_id:
            raise ValueError(f"room id {r.room_id!r} is not usable as a file name")
        dump_room(r, d / f"{r.room_id}.json")
    return d


def read_split(root: str | Path, split: str) -> list[Room]:
    d = Path(root) / split
    if not d.is_dir():
        raise FileNotFoundError(f"no split {split!r} under {root}")
    return [load_room(p) for p in sorted(d.glob("*.json"))]


def write_stats(stats: NormalizationStats, path: str | Path) -> None:
    Path(path).write_text(json.dumps(stats.to_json(), indent=1) + "\n")


def read_stats(path: str | Path) -> NormalizationStats:
    return NormalizationStats.from_json(json.loads(Path(path).read_text()))
