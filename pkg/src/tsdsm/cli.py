"""Command-line entry point: ``tsdsm <command> [options]``."""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
import zlib
from pathlib import Path

import torch

from . import __version__
from .checkpoint import CheckpointError
from .config import ConfigError, RunConfig, build_config, deep_merge, load_config_file, parse_override
from .ddpm import NoiseSchedule

OUT_ENV = "TSDSM_OUT"
COMMANDS = ("gen-corpus", "augment", "pointcloud", "train-flgm", "train-lgm", "sample", "evaluate", "stats")


class CommandError(RuntimeError):
    pass


def _subseed(seed: int, *parts: str) -> int:
    key = "/".join(parts).encode()
    return (seed * 1_000_003 + zlib.crc32(key)) % (2**31 - 1)


def write_manifest(directory: Path, command: str, cfg: RunConfig, extra: dict | None = None) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    m = {"command": command, "version": __version__, "seed": cfg.seed, "config_hash": cfg.hash(),
         "config": cfg.to_dict()}
    if extra:
        m.update(extra)
    (directory / "manifest.json").write_text(json.dumps(m, indent=1, sort_keys=True) + "\n")
    (directory / "config.json").write_text(json.dumps(cfg.to_dict(), indent=1, sort_keys=True) + "\n")


def _corpus_config(cfg: RunConfig):
    from .corpus.config import default_config, trim_menus

    c = cfg.corpus
    base = default_config(seed=cfg.seed, rooms_per_type=c.rooms_per_type, expansion_factor=c.expansion_factor,
                          entries_per_category=c.entries_per_category, n_max=c.n_max)
    unknown = set(c.room_types) - set(base.room_types)
    if unknown:
        raise CommandError(f"unknown room types: {', '.join(sorted(unknown))}; known: {', '.join(base.room_types)}")
    if c.max_categories is not None:
        base = trim_menus(base, c.max_categories)
    return base


def _room_types(cfg: RunConfig, args) -> list[str]:
    return [args.room_type] if args.room_type else list(cfg.corpus.room_types)


def _split_rooms(out: Path, split: str, room_type: str):
    from .corpus.io import read_split

    try:
        rooms = read_split(out / "corpus", split)
    except FileNotFoundError:
        raise CommandError(f"no corpus split {split!r} under {out / 'corpus'}; run gen-corpus first") from None
    rooms = [r for r in rooms if r.room_type == room_type]
    if not rooms:
        raise CommandError(f"split {split!r} has no {room_type} rooms")
    return rooms


def _database(out: Path):
    from .frs import load_database

    p = out / "database" / "database.json"
    if not p.is_file():
        raise CommandError(f"furniture database missing at {p}; run gen-corpus first")
    return load_database(p)


def cmd_gen_corpus(cfg: RunConfig, args, out: Path) -> None:
    from .corpus import build_database, corpus_stats, format_stats_table, generate_corpus
    from .corpus.io import write_split
    from .frs import save_database

    cc = _corpus_config(cfg)
    db = build_database(cc, cfg.seed)
    save_database(db, out / "database")
    train, test = [], []
    for rt in _room_types(cfg, args):
        train += generate_corpus(cc, rt, cfg.corpus.rooms_per_type, db, _subseed(cfg.seed, "train", rt))
        test += [r.replace(room_id=r.room_id.replace(rt, f"{rt}-test", 1))
                 for r in generate_corpus(cc, rt, cfg.corpus.test_rooms, db, _subseed(cfg.seed, "test", rt))]
    root = out / "corpus"
    write_split(root, "train", train)
    write_split(root, "test", test)
    report = corpus_stats(train)
    (root / "stats.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    (root / "stats.txt").write_text(format_stats_table(report) + "\n")
    (root / "corpus_config.json").write_text(json.dumps(cc.to_json(), indent=1, sort_keys=True) + "\n")
    write_manifest(root, "gen-corpus", cfg)
    print(f"wrote {len(train)} train and {len(test)} test rooms to {root}")


def cmd_augment(cfg: RunConfig, args, out: Path) -> None:
    from .corpus import expand_corpus
    from .corpus.io import write_split

    cc = _corpus_config(cfg)
    db = _database(out)
    rooms = []
    for rt in _room_types(cfg, args):
        rooms += expand_corpus(_split_rooms(out, "train", rt), db, cfg.corpus.expansion_factor,
                               _subseed(cfg.seed, "augment", rt), cc.categories, cfg.corpus.p_delete)
    d = write_split(out / "corpus", "augmented", rooms)
    write_manifest(d, "augment", cfg)
    print(f"wrote {len(rooms)} augmented rooms to {d}")


def cmd_pointcloud(cfg: RunConfig, args, out: Path) -> None:
    from .corpus.mesh import sample_pointcloud, write_ply

    db = _database(out)
    d = out / "pointclouds"
    d.mkdir(parents=True, exist_ok=True)
    n = 0
    for rt in _room_types(cfg, args):
        for room in _split_rooms(out, cfg.corpus.train_split, rt)[: cfg.corpus.pointcloud_rooms]:
            cloud = sample_pointcloud(room, db, cfg.corpus.points_per_object, _subseed(cfg.seed, "pc", room.room_id))
            write_ply(cloud, d / f"{room.room_id}.ply")
            n += 1
    write_manifest(d, "pointcloud", cfg)
    print(f"wrote {n} point clouds to {d}")


def _ckpt_dir(out: Path, rt: str) -> Path:
    return out / "checkpoints" / rt


def cmd_train_flgm(cfg: RunConfig, args, out: Path) -> None:
    from .flgm import train_flgm
    from .training import write_log

    sched = NoiseSchedule.from_config(cfg.schedule)
    for rt in _room_types(cfg, args):
        rooms = _split_rooms(out, cfg.corpus.train_split, rt)
        model, hist = train_flgm(rooms, cfg.flgm, cfg.train_flgm, sched, cfg.corpus.n_max)
        d = _ckpt_dir(out, rt)
        d.mkdir(parents=True, exist_ok=True)
        model.save(d / "flgm.pt")
        write_log(hist, d / "flgm_log.csv")
        write_manifest(d, "train-flgm", cfg, {"room_type": rt})
        print(f"{rt}: flgm trained {len(hist)} steps, final loss {hist[-1]['loss']:.4f}")


def cmd_train_lgm(cfg: RunConfig, args, out: Path) -> None:
    from .lgm import train_lgm
    from .training import write_log

    sched = NoiseSchedule.from_config(cfg.schedule)
    for rt in _room_types(cfg, args):
        rooms = _split_rooms(out, cfg.corpus.train_split, rt)
        model, hist = train_lgm(rooms, cfg.lgm, cfg.train_lgm, sched, cfg.corpus.n_max)
        d = _ckpt_dir(out, rt)
        d.mkdir(parents=True, exist_ok=True)
        model.save(d / "lgm.pt")
        write_log(hist, d / "lgm_log.csv")
        write_manifest(d, "train-lgm", cfg, {"room_type": rt})
        print(f"{rt}: lgm trained {len(hist)} steps, final loss {hist[-1]['loss']:.4f}")


def cmd_sample(cfg: RunConfig, args, out: Path) -> None:
    from .pipeline import generate_scenes
    from .flgm import FLGM, room_prompts
    from .lgm import LGM
    from .metrics import rasterize_topdown, save_png
    from .scene import dump_room

    db = _database(out)
    for rt in _room_types(cfg, args):
        d = _ckpt_dir(out, rt)
        flgm, lgm = FLGM.load(d / "flgm.pt"), LGM.load(d / "lgm.pt")
        n = cfg.sample.n_scenes
        if cfg.sample.conditional:
            test = _split_rooms(out, "test", rt)
            prompts = [room_prompts([test[i % len(test)]])[0] for i in range(n)]
        else:
            prompts = [""] * n
        gen = torch.Generator().manual_seed(_subseed(cfg.seed, "sample", rt))
        rooms = generate_scenes(flgm, lgm, db, prompts, gen, room_type=rt)
        sd = out / "samples" / rt
        sd.mkdir(parents=True, exist_ok=True)
        for old in sd.glob("*.json"):
            if old.name not in ("manifest.json", "config.json"):
                old.unlink()
        for r in rooms:
            dump_room(r, sd / f"{r.room_id}.json")
        if args.render:
            pd = sd / "png"
            pd.mkdir(exist_ok=True)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                for r in rooms:
                    save_png(rasterize_topdown(r, cfg.evaluate.resolution, cfg.evaluate.extent), pd / f"{r.room_id}.png")
        write_manifest(sd, "sample", cfg, {"room_type": rt, "prompts": prompts})
        print(f"{rt}: wrote {len(rooms)} scenes to {sd}")


def _load_dir(path: Path):
    from .scene import load_room

    if not path.is_dir():
        raise CommandError(f"no scene directory {path}")
    return [load_room(p) for p in sorted(path.glob("*.json")) if p.name not in ("manifest.json", "config.json")]


def cmd_evaluate(cfg: RunConfig, args, out: Path) -> None:
    from .metrics import evaluate

    rd = out / "reports"
    rd.mkdir(parents=True, exist_ok=True)
    for rt in _room_types(cfg, args):
        gen = _load_dir(Path(args.generated)) if args.generated else _load_dir(out / "samples" / rt)
        ref = _load_dir(Path(args.reference)) if args.reference else _split_rooms(out, "test", rt)
        try:
            report = evaluate(gen, ref, seed=cfg.seed, resolution=cfg.evaluate.resolution, extent=cfg.evaluate.extent)
        except ValueError as exc:
            raise CommandError(str(exc)) from None
        report.dump(rd / f"{rt}.json")
        print(f"{rt}: " + "  ".join(f"{k} {v}" for k, v in report.display.items()))
    write_manifest(rd, "evaluate", cfg)


def cmd_stats(cfg: RunConfig, args, out: Path) -> None:
    from .corpus import corpus_stats, format_stats_table

    path = Path(args.corpus) if args.corpus else out / "corpus" / cfg.corpus.train_split
    rooms = _load_dir(path)
    if not rooms:
        raise CommandError(f"no rooms under {path}")
    report = corpus_stats(rooms)
    print(format_stats_table(report))
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")


HANDLERS = {
    "gen-corpus": cmd_gen_corpus, "augment": cmd_augment, "pointcloud": cmd_pointcloud,
    "train-flgm": cmd_train_flgm, "train-lgm": cmd_train_lgm, "sample": cmd_sample,
    "evaluate": cmd_evaluate, "stats": cmd_stats,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help=f"output root (default ${OUT_ENV} or ./runs)")
    common.add_argument("--room-type")
    common.add_argument("--preset", choices=("desk", "paper"))
    common.add_argument("--ablation", help='one of "final", "first w/ pos", "second single-head", "second w/o separate"')
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="config override")
    p = argparse.ArgumentParser(prog="tsdsm", description="Two-stage furniture-list and layout diffusion.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "sample":
            sp.add_argument("--render", action="store_true", help="write PNG previews")
        if name == "evaluate":
            sp.add_argument("--generated", help="directory of generated scene JSONs")
            sp.add_argument("--reference", help="directory of reference scene JSONs")
        if name == "stats":
            sp.add_argument("corpus", nargs="?", help="directory of room JSONs")
            sp.add_argument("--json", help="also write the report here")
    return p


def resolve_config(args) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    preset = args.preset or file_values.pop("preset", "desk")
    overrides: dict = {}
    for item in args.set:
        overrides = deep_merge(overrides, parse_override(item))
    if args.seed is not None:
        overrides["seed"] = args.seed
    return build_config(preset, file_values, args.ablation, overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(args.out or os.environ.get(OUT_ENV) or "runs")
        HANDLERS[args.command](cfg, args, out)
    except (ConfigError, CommandError, CheckpointError) as exc:
        print(f"tsdsm {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
