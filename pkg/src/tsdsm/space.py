"""The encoding space a trained model lives in: vocabulary, ranges and capacity."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .scene import CategoryVocab, Layout, NormalizationStats, Room, encode_corpus


@dataclass
class SceneSpace:
    vocab: CategoryVocab
    stats: NormalizationStats
    n_max: int
    room_type: str = ""

    @classmethod
    def from_rooms(cls, rooms: Sequence[Room], n_max: int, room_type: str | None = None) -> "SceneSpace":
        if not rooms:
            raise ValueError("cannot derive an encoding space from an empty corpus")
        if room_type is None:
            types = sorted({r.room_type for r in rooms})
            room_type = types[0] if len(types) == 1 else ""
        return cls(CategoryVocab.from_rooms(rooms), NormalizationStats.from_rooms(rooms), n_max, room_type)

    @property
    def layout(self) -> Layout:
        return Layout(self.vocab.k)

    def encode(self, rooms: Sequence[Room]) -> tuple[np.ndarray, np.ndarray]:
        return encode_corpus(rooms, self.stats, self.vocab, self.n_max)

    def to_json(self) -> dict:
        return {"vocab": self.vocab.to_json(), "stats": self.stats.to_json(), "n_max": self.n_max,
                "room_type": self.room_type}

    @classmethod
    def from_json(cls, d: dict) -> "SceneSpace":
        return cls(CategoryVocab.from_json(d["vocab"]), NormalizationStats.from_json(d["stats"]),
                   int(d["n_max"]), d.get("room_type", ""))
