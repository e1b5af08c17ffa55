"""Corpus summary statistics."""
from __future__ import annotations

from collections import Counter
from typing import Sequence

from ..scene import Room


def corpus_stats(rooms: Sequence[Room]) -> dict:
    """Per-room-type object-count mean/max and per-category frequencies."""
    if not rooms:
        raise ValueError("corpus is empty")
    by_type: dict[str, list[int]] = {}
    freq: Counter[str] = Counter()
    for r in rooms:
        by_type.setdefault(r.room_type, []).append(len(r.objects))
        freq.update(o.category for o in r.objects)
    per_type = {}
    for rt, counts in sorted(by_type.items()):
        cats = {o.category for r in rooms if r.room_type == rt for o in r.objects}
        per_type[rt] = {
            "rooms": len(counts),
            "mean_objects": sum(counts) / len(counts),
            "max_objects": max(counts),
            "categories": len(cats),
        }
    counts = [len(r.objects) for r in rooms]
    return {
        "rooms": len(rooms),
        "total_objects": sum(counts),
        "mean_objects": sum(counts) / len(counts),
        "max_objects": max(counts),
        "num_categories": len(freq),
        "per_room_type": per_type,
        "category_frequency": dict(sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))),
    }


def format_stats_table(report: dict) -> str:
    lines = [f"{'room type':<16}{'rooms':>8}{'mean':>8}{'max':>6}{'cats':>6}"]
    for rt, s in report["per_room_type"].items():
        lines.append(f"{rt:<16}{s['rooms']:>8}{s['mean_objects']:>8.2f}{s['max_objects']:>6}{s['categories']:>6}")
    lines.append(f"{'all':<16}{report['rooms']:>8}{report['mean_objects']:>8.2f}{report['max_objects']:>6}"
                 f"{report['num_categories']:>6}")
    lines.append("")
    lines.append(f"{'category':<16}{'count':>8}")
    for cat, n in report["category_frequency"].items():
        lines.append(f"{cat:<16}{n:>8}")
    return "\n".join(lines) + "\n"
