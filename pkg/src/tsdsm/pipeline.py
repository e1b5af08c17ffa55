"""End-to-end generation: furniture list, retrieval, then layout."""
from __future__ import annotations

from typing import Sequence

import torch

from .flgm import FLGM, sample_furniture_lists
from .frs import FurnitureDatabase, retrieve_list
from .lgm import LGM, assemble_room, sample_layouts
from .scene import Room


def generate_scenes(flgm: FLGM, lgm: LGM, db: FurnitureDatabase, prompts: Sequence[str],
                    generator: torch.Generator | None = None, room_type: str = "",
                    id_prefix: str | None = None) -> list[Room]:
    """One scene per prompt. Generated sizes are swapped for the nearest database entry."""
    lists = sample_furniture_lists(flgm, prompts, generator)
    retrieved = [[(cat, size) for _, size, cat in retrieve_list(items, db)] for items in lists]
    placements = sample_layouts(lgm, retrieved, generator)
    prefix = id_prefix or f"{room_type or 'scene'}-gen"
    return [assemble_room(f, p, room_type, f"{prefix}-{i:05d}") for i, (f, p) in enumerate(zip(retrieved, placements))]
