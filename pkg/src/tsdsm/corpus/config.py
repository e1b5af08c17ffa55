"""Category catalogue and per-room-type generation settings."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

ROLES = ("large-furniture", "surface-furniture", "decor")


@dataclass(frozen=True)
class CategorySpec:
    name: str
    role: str
    size_min: tuple[float, float, float]  # half-extents, metres
    size_max: tuple[float, float, float]
    deletable: bool = False
    replaceable: bool = True
    supports: tuple[str, ...] = ()  # surfaces a decor item may rest on
    mesh: str = "box"

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"{self.name}: role must be one of {ROLES}, got {self.role!r}")
        if any(lo >= hi for lo, hi in zip(self.size_min, self.size_max)) or min(self.size_min) <= 0:
            raise ValueError(f"{self.name}: need 0 < size_min < size_max per axis")
        if self.role == "decor" and not self.supports:
            raise ValueError(f"{self.name}: decor needs at least one supporting surface category")

    @property
    def on_floor(self) -> bool:
        return self.role != "decor"


@dataclass(frozen=True)
class CountDistribution:
    """Poisson object counts truncated to ``[min, max]`` (fixed when min == max)."""

    mean: float
    min: int = 1
    max: int = 32

    def __post_init__(self):
        if not 1 <= self.min <= self.max:
            raise ValueError("count distribution needs 1 <= min <= max")


@dataclass(frozen=True)
class RoomTypeSpec:
    name: str
    menu: dict[str, float]  # category -> draw weight
    counts: CountDistribution
    required: tuple[str, ...] = ()
    max_per_room: dict[str, int] = field(default_factory=dict)
    half_extent_range: tuple[float, float] = (2.0, 3.0)


@dataclass
class CorpusConfig:
    categories: dict[str, CategorySpec]
    room_types: dict[str, RoomTypeSpec]
    seed: int = 0
    rooms_per_type: int = 500
    expansion_factor: int = 1
    entries_per_category: int = 4
    n_max: int = 32
    max_footprint_iou: float = 0.0
    placement_tries: int = 40
    max_room_attempts: int = 50

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for spec in self.categories.values():
            for s in spec.supports:
                if s not in self.categories or self.categories[s].role != "surface-furniture":
                    raise ValueError(f"{spec.name}: support {s!r} is not a surface-furniture category")
        for rt in self.room_types.values():
            for c in list(rt.menu) + list(rt.required):
                if c not in self.categories:
                    raise ValueError(f"room type {rt.name}: unknown category {c!r}")
            if any(self.categories[c].role == "decor" for c in rt.required):
                raise ValueError(f"room type {rt.name}: decor cannot be required")
            if len(rt.required) > rt.counts.max or rt.counts.max > self.n_max:
                raise ValueError(f"room type {rt.name}: count range incompatible with required items / n_max")
            if rt.counts.min > len(rt.required) and not rt.menu:
                raise ValueError(f"room type {rt.name}: empty menu cannot reach {rt.counts.min} objects")
        if self.expansion_factor < 1:
            raise ValueError("expansion_factor must be >= 1")

    def category_names(self) -> list[str]:
        return sorted(self.categories)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "CorpusConfig":
        d = dict(d)
        cats = {k: CategorySpec(**{**v, "size_min": tuple(v["size_min"]), "size_max": tuple(v["size_max"]),
                                   "supports": tuple(v.get("supports", ()))})
                for k, v in d.pop("categories").items()}
        rts = {k: RoomTypeSpec(**{**v, "counts": CountDistribution(**v["counts"]),
                                  "required": tuple(v.get("required", ())),
                                  "half_extent_range": tuple(v.get("half_extent_range", (2.0, 3.0)))})
               for k, v in d.pop("room_types").items()}
        return cls(categories=cats, room_types=rts, **d)


def _cat(name, role, lo, hi, deletable=False, replaceable=True, supports=(), mesh="box"):
    return CategorySpec(name, role, lo, hi, deletable, replaceable, tuple(supports), mesh)


_SURFACES = ("nightstand", "desk", "cabinet", "tv_stand", "coffee_table", "dining_table", "sideboard")


def default_categories() -> dict[str, CategorySpec]:
    L, S, D = ROLES
    cats = [
        _cat("bed", L, (0.75, 0.95, 0.25), (0.95, 1.10, 0.32)),
        _cat("wardrobe", L, (0.45, 0.28, 0.95), (0.90, 0.32, 1.10), deletable=True),
        _cat("chair", L, (0.20, 0.20, 0.40), (0.27, 0.27, 0.50), deletable=True),
        _cat("armchair", L, (0.35, 0.35, 0.38), (0.45, 0.45, 0.45), deletable=True),
        _cat("sofa", L, (0.80, 0.40, 0.38), (1.20, 0.50, 0.45)),
        _cat("bookshelf", L, (0.35, 0.15, 0.80), (0.60, 0.20, 1.00), deletable=True),
        _cat("nightstand", S, (0.20, 0.18, 0.25), (0.28, 0.24, 0.30), deletable=True),
        _cat("desk", S, (0.50, 0.30, 0.37), (0.70, 0.40, 0.39), deletable=True, mesh="table"),
        _cat("cabinet", S, (0.35, 0.20, 0.40), (0.60, 0.25, 0.45), deletable=True),
        _cat("tv_stand", S, (0.60, 0.20, 0.25), (0.90, 0.25, 0.30), deletable=True),
        _cat("coffee_table", S, (0.40, 0.28, 0.20), (0.60, 0.38, 0.24), mesh="table"),
        _cat("dining_table", S, (0.60, 0.40, 0.37), (0.90, 0.50, 0.39), mesh="table"),
        _cat("sideboard", S, (0.60, 0.22, 0.40), (0.90, 0.26, 0.45), deletable=True),
        _cat("lamp", D, (0.10, 0.10, 0.18), (0.14, 0.14, 0.28), True, True, ("nightstand", "desk", "cabinet", "sideboard")),
        _cat("tv", D, (0.40, 0.04, 0.25), (0.55, 0.06, 0.33), True, True, ("tv_stand",)),
        _cat("book", D, (0.07, 0.10, 0.015), (0.10, 0.14, 0.03), True, True, _SURFACES),
        _cat("vase", D, (0.05, 0.05, 0.10), (0.09, 0.09, 0.18), True, True, _SURFACES),
        _cat("cup", D, (0.03, 0.03, 0.04), (0.045, 0.045, 0.06), True, True, ("desk", "coffee_table", "dining_table", "nightstand")),
        _cat("plant", D, (0.08, 0.08, 0.12), (0.13, 0.13, 0.22), True, True, _SURFACES),
        _cat("clock", D, (0.06, 0.03, 0.06), (0.10, 0.05, 0.10), True, True, ("nightstand", "cabinet", "sideboard", "desk")),
        _cat("bottle", D, (0.03, 0.03, 0.10), (0.04, 0.04, 0.15), True, True, ("dining_table", "sideboard", "cabinet")),
        _cat("plate", D, (0.10, 0.10, 0.01), (0.14, 0.14, 0.02), True, True, ("dining_table",)),
        _cat("candle", D, (0.03, 0.03, 0.05), (0.05, 0.05, 0.10), True, True, ("dining_table", "coffee_table", "sideboard")),
        _cat("laptop", D, (0.15, 0.11, 0.01), (0.18, 0.13, 0.015), True, True, ("desk",)),
        _cat("remote", D, (0.02, 0.08, 0.01), (0.03, 0.10, 0.015), True, True, ("coffee_table", "tv_stand")),
    ]
    return {c.name: c for c in cats}


def default_room_types() -> dict[str, RoomTypeSpec]:
    return {
        "bedroom": RoomTypeSpec(
            "bedroom",
            menu={"wardrobe": 1.0, "nightstand": 2.0, "desk": 0.8, "chair": 0.6, "bookshelf": 0.3, "cabinet": 0.6,
                  "lamp": 1.6, "book": 2.4, "vase": 0.8, "cup": 0.6, "plant": 0.6, "clock": 0.5, "laptop": 0.3},
            counts=CountDistribution(mean=10.0, min=3, max=24),
            required=("bed",),
            max_per_room={"bed": 1, "wardrobe": 2, "nightstand": 2, "desk": 1, "chair": 2, "bookshelf": 1,
                          "cabinet": 1, "lamp": 3, "laptop": 1, "clock": 2},
        ),
        "living_room": RoomTypeSpec(
            "living_room",
            menu={"coffee_table": 1.5, "tv_stand": 1.5, "armchair": 1.0, "bookshelf": 0.5, "cabinet": 0.7,
                  "sideboard": 0.5, "tv": 1.0, "vase": 1.2, "plant": 1.4, "book": 1.8, "cup": 0.8, "candle": 0.5,
                  "remote": 0.6, "clock": 0.3, "lamp": 0.6},
            counts=CountDistribution(mean=10.0, min=3, max=24),
            required=("sofa",),
            max_per_room={"sofa": 2, "coffee_table": 1, "tv_stand": 1, "armchair": 2, "bookshelf": 1,
                          "cabinet": 1, "sideboard": 1, "tv": 1, "remote": 2, "lamp": 2},
        ),
        "dining_room": RoomTypeSpec(
            "dining_room",
            menu={"chair": 3.0, "sideboard": 0.8, "cabinet": 0.6, "plate": 2.5, "cup": 1.5, "bottle": 1.0,
                  "vase": 0.8, "candle": 0.8, "plant": 0.6, "book": 0.3},
            counts=CountDistribution(mean=12.0, min=3, max=26),
            required=("dining_table",),
            max_per_room={"dining_table": 1, "chair": 6, "sideboard": 1, "cabinet": 1, "plate": 6},
        ),
    }


def default_config(**overrides) -> CorpusConfig:
    return CorpusConfig(categories=default_categories(), room_types=default_room_types(), **overrides)


def trim_menus(config: CorpusConfig, max_categories: int) -> CorpusConfig:
    """Keep each room type's required items plus its heaviest menu entries, up to ``max_categories``.

    Decor whose every support was trimmed is dropped as well.
    """
    rts = {}
    for name, rt in config.room_types.items():
        budget = max_categories - len(rt.required)
        if budget < 0:
            raise ValueError(f"room type {name}: {len(rt.required)} required categories exceed {max_categories}")
        ranked = sorted(rt.menu.items(), key=lambda kv: (-kv[1], kv[0]))
        kept = dict(ranked[:budget])
        present = set(kept) | set(rt.required)
        kept = {c: w for c, w in kept.items()
                if config.categories[c].on_floor or present & set(config.categories[c].supports)}
        caps = {c: v for c, v in rt.max_per_room.items() if c in kept or c in rt.required}
        rts[name] = RoomTypeSpec(name, kept, rt.counts, rt.required, caps, rt.half_extent_range)
    d = {k: v for k, v in config.__dict__.items() if k not in ("categories", "room_types")}
    return CorpusConfig(categories=config.categories, room_types=rts, **d)
