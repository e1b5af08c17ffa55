"""Run configuration: presets, ablation deltas, file loading and overrides."""
from __future__ import annotations

import copy
import hashlib
import json
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .ddpm import ScheduleConfig
from .flgm import FdnConfig
from .lgm import LdnConfig
from .training import TrainConfig


class ConfigError(ValueError):
    pass


@dataclass
class CorpusSection:
    room_types: list[str] = field(default_factory=lambda: ["bedroom"])
    rooms_per_type: int = 500
    test_rooms: int = 100
    max_categories: int | None = 12
    expansion_factor: int = 1
    p_delete: float = 0.3
    entries_per_category: int = 4
    n_max: int = 32
    train_split: str = "train"
    points_per_object: int = 30_000
    pointcloud_rooms: int = 2


@dataclass
class SampleSection:
    n_scenes: int = 100
    conditional: bool = True  # prompts from the test split; False samples unconditionally


@dataclass
class EvalSection:
    resolution: int = 64
    extent: float = 4.0


_SECTIONS = {
    "corpus": CorpusSection,
    "schedule": ScheduleConfig,
    "flgm": FdnConfig,
    "lgm": LdnConfig,
    "train_flgm": TrainConfig,
    "train_lgm": TrainConfig,
    "sample": SampleSection,
    "evaluate": EvalSection,
}
_SCALARS = {"seed": int, "preset": str, "ablation": str}
PRESETS = ("desk", "paper")


def _desk() -> dict:
    return {
        "schedule": {"T": 100, "beta_start": 1e-3, "beta_end": 0.2},
        "flgm": {"dim": 64, "depth": 3, "heads": 4},
        "lgm": {"dim": 32, "dim_mults": [1, 2], "heads": 4},
        "train_flgm": {"epochs": 50, "batch_size": 64, "lr": 1e-3, "lr_decay_every": 100},
        "train_lgm": {"epochs": 50, "batch_size": 64, "lr": 1e-3, "lr_decay_every": 100},
    }


def _paper() -> dict:
    train = {"epochs": 1000, "batch_size": 64, "lr": 2e-5, "lr_decay_every": 100, "lr_decay": 0.5}
    return {
        "corpus": {"rooms_per_type": 500, "expansion_factor": 100, "max_categories": None},
        "schedule": {"T": 2000, "beta_start": 1e-4, "beta_end": 0.02},
        "flgm": {"dim": 256, "depth": 6, "heads": 8},
        "lgm": {"dim": 128, "dim_mults": [1, 2, 4], "heads": 8},
        "train_flgm": dict(train),
        "train_lgm": dict(train),
    }


ABLATIONS = {
    "final": {},
    "first w/ pos": {"flgm": {"positional_encoding": True}},
    "second single-head": {"lgm": {"heads": 1}},
    "second w/o separate": {"lgm": {"separate_heads": False}},
}


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "", name.lower())


def ablation_presets(name: str) -> dict:
    """Config delta for a named ablation; ``"final"`` is the default model."""
    for key, delta in ABLATIONS.items():
        if _slug(key) == _slug(name):
            return copy.deepcopy(delta)
    raise ConfigError(f"unknown ablation {name!r}; valid names: {', '.join(repr(k) for k in ABLATIONS)}")


def deep_merge(base: dict, delta: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in delta.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class RunConfig:
    seed: int = 0
    preset: str = "desk"
    ablation: str = "final"
    corpus: CorpusSection = field(default_factory=CorpusSection)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    flgm: FdnConfig = field(default_factory=FdnConfig)
    lgm: LdnConfig = field(default_factory=LdnConfig)
    train_flgm: TrainConfig = field(default_factory=TrainConfig)
    train_lgm: TrainConfig = field(default_factory=TrainConfig)
    sample: SampleSection = field(default_factory=SampleSection)
    evaluate: EvalSection = field(default_factory=EvalSection)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lgm"]["dim_mults"] = list(d["lgm"]["dim_mults"])
        return d

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - set(_SECTIONS) - set(_SCALARS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kw: dict[str, Any] = {}
        for k, typ in _SCALARS.items():
            if k in d:
                kw[k] = typ(d[k])
        for name, section in _SECTIONS.items():
            sub = d.get(name, {})
            if not isinstance(sub, dict):
                raise ConfigError(f"config section {name!r} must be a mapping")
            allowed = {f.name for f in fields(section)}
            bad = set(sub) - allowed
            if bad:
                raise ConfigError(f"unknown keys in {name!r}: {', '.join(sorted(bad))}")
            try:
                kw[name] = section(**sub)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid {name!r} section: {exc}") from None
        cfg = cls(**kw)
        if cfg.preset not in PRESETS:
            raise ConfigError(f"unknown preset {cfg.preset!r}; valid: {', '.join(PRESETS)}")
        ablation_presets(cfg.ablation)
        return cfg


def build_config(preset: str = "desk", file_values: dict | None = None, ablation: str | None = None,
                 overrides: dict | None = None) -> RunConfig:
    """Preset, then config file, then ablation delta, then explicit overrides."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; valid: {', '.join(PRESETS)}")
    d = _desk() if preset == "desk" else _paper()
    d["preset"] = preset
    d = deep_merge(d, file_values or {})
    name = ablation or d.get("ablation", "final")
    d = deep_merge(d, ablation_presets(name))
    d["ablation"] = name
    d = deep_merge(d, overrides or {})
    return RunConfig.from_dict(d)


def load_config_file(path: str | Path) -> dict:
    p = Path(path)
    try:
        d = json.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
    if not isinstance(d, dict):
        raise ConfigError(f"{p}: top level must be an object")
    return d


def parse_override(text: str) -> dict:
    """``section.key=value`` with a JSON value (bare words are strings)."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} must look like section.key=value")
    path, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    out: dict = {}
    cur = out
    keys = path.split(".")
    for k in keys[:-1]:
        cur = cur.setdefault(k, {})
    cur[keys[-1]] = value
    return out
