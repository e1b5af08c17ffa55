"""Minibatch training loop shared by both stages."""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable

import torch


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 64
    lr: float = 1e-3
    lr_decay_every: int = 100  # epochs
    lr_decay: float = 0.5
    seed: int = 0
    max_steps: int | None = None
    grad_clip: float | None = 1.0
    ema_decay: float | None = 0.995  # weights are replaced by their running average at the end

    def to_json(self) -> dict:
        return asdict(self)


StepLoss = Callable[[torch.Tensor, torch.Generator], torch.Tensor]


def fit(params: Iterable[torch.nn.Parameter], n_items: int, step_loss: StepLoss, cfg: TrainConfig,
        on_step: Callable[[dict], None] | None = None) -> list[dict]:
    """Adam with a step-decayed learning rate; returns the per-step history."""
    params = [p for p in params if p.requires_grad]
    gen = torch.Generator().manual_seed(int(cfg.seed))
    opt = torch.optim.Adam(params, lr=cfg.lr)
    ema = [p.detach().clone() for p in params] if cfg.ema_decay else None
    lr_sched = torch.optim.lr_scheduler.StepLR(opt, step_size=max(cfg.lr_decay_every, 1), gamma=cfg.lr_decay)
    history: list[dict] = []
    step = 0
    for epoch in range(cfg.epochs):
        perm = torch.randperm(n_items, generator=gen)
        for start in range(0, n_items, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            loss = step_loss(idx, gen)
            opt.zero_grad(set_to_none=True)
            loss.backward()
            if cfg.grad_clip:
                torch.nn.utils.clip_grad_norm_(params, cfg.grad_clip)
            opt.step()
            step += 1
            if ema is not None:
                # short warm-up so early weights do not dominate the average
                d = min(cfg.ema_decay, (1 + step) / (10 + step))
                with torch.no_grad():
                    for e, p in zip(ema, params):
                        e.mul_(d).add_(p.detach(), alpha=1 - d)
            rec = {"step": step, "epoch": epoch, "loss": float(loss.detach()), "lr": opt.param_groups[0]["lr"]}
            history.append(rec)
            if on_step is not None:
                on_step(rec)
            if cfg.max_steps is not None and step >= cfg.max_steps:
                break
        if cfg.max_steps is not None and step >= cfg.max_steps:
            break
        lr_sched.step()
    if ema is not None:
        with torch.no_grad():
            for e, p in zip(ema, params):
                p.copy_(e)
    return history


def write_log(history: list[dict], path: str | Path) -> None:
    """CSV with ``step, loss, lr`` plus any extra per-step terms."""
    if not history:
        return
    keys = ["step", "loss", "lr"] + sorted(set(history[0]) - {"step", "loss", "lr", "epoch"})
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, extrasaction="ignore")
        w.writeheader()
        for rec in history:
            w.writerow({k: (f"{rec[k]:.8g}" if isinstance(rec[k], float) else rec[k]) for k in keys})


def smoothed(values: list[float], window: int = 20) -> list[float]:
    out, acc = [], []
    for v in values:
        acc.append(v)
        if len(acc) > window:
            acc.pop(0)
        out.append(sum(acc) / len(acc))
    return out
