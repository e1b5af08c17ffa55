"""Self-describing model checkpoints: metadata as plain types plus a state dict."""
from __future__ import annotations

from pathlib import Path

import torch

FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path: str | Path, kind: str, meta: dict, state: dict[str, torch.Tensor]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = {"format": FORMAT_VERSION, "kind": kind, "meta": meta,
            "state": {k: v.detach().cpu().clone() for k, v in state.items()}}
    torch.save(blob, path)


def load_checkpoint(path: str | Path, kind: str) -> tuple[dict, dict[str, torch.Tensor]]:
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    blob = torch.load(path, map_location="cpu", weights_only=True)
    if blob.get("format") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint format {blob.get('format')!r}")
    if blob.get("kind") != kind:
        raise CheckpointError(f"{path}: expected a {kind!r} checkpoint, found {blob.get('kind')!r}")
    return blob["meta"], blob["state"]
