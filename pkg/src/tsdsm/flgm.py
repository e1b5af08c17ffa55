"""Stage one: text-conditioned diffusion over furniture lists (size, category).

The denoiser is a transformer over object tokens with no positional
encoding, so it is permutation-equivariant over the object axis. Text
features enter through cross-attention.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from torch import nn

from .checkpoint import load_checkpoint, save_checkpoint
from .ddpm import NoiseSchedule, q_sample, sample_loop
from .layers import TimeEmbedding, mlp, sinusoidal
from .scene import MIN_SIZE, Room
from .space import SceneSpace
from .text import NULL, PAD, TextEncoder, TextVocab, prompt_for
from .training import TrainConfig, fit

KIND = "flgm"
TIME_SPAN = 1000.0


@dataclass
class FdnConfig:
    dim: int = 128
    depth: int = 4
    heads: int = 4
    ff_mult: int = 2
    size_hidden: int = 64
    class_hidden: int = 64
    positional_encoding: bool = False
    cross_attention: bool = True
    p_uncond: float = 0.1

    def __post_init__(self):
        if self.dim % self.heads:
            raise ValueError(f"dim {self.dim} is not divisible by heads {self.heads}")

    def to_json(self) -> dict:
        return asdict(self)


class _Block(nn.Module):
    """Pre-norm self-attention, optional text cross-attention, feed-forward."""

    def __init__(self, dim: int, heads: int, ff_mult: int, cross: bool):
        super().__init__()
        self.n1 = nn.LayerNorm(dim)
        self.self_attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.cross = cross
        if cross:
            self.n2 = nn.LayerNorm(dim)
            self.cross_attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.n3 = nn.LayerNorm(dim)
        self.ff = nn.Sequential(nn.Linear(dim, ff_mult * dim), nn.SiLU(), nn.Linear(ff_mult * dim, dim))

    def forward(self, h, text, text_pad):
        x = self.n1(h)
        h = h + self.self_attn(x, x, x, need_weights=False)[0]
        if self.cross:
            x = self.n2(h)
            h = h + self.cross_attn(x, text, text, key_padding_mask=text_pad, need_weights=False)[0]
        return h + self.ff(self.n3(h))


class FurnitureDenoiser(nn.Module):
    def __init__(self, cfg: FdnConfig, k: int, n_max: int, vocab_size: int, T: int = 1000):
        super().__init__()
        self.cfg = cfg
        self.k = k
        self.n_max = n_max
        d = cfg.dim
        self.text = TextEncoder(vocab_size, d)
        self.size_in = mlp(3, d, cfg.size_hidden)
        self.class_in = mlp(k, d, cfg.class_hidden)
        self.time = TimeEmbedding(d, scale=TIME_SPAN / T)
        self.blocks = nn.ModuleList(_Block(d, cfg.heads, cfg.ff_mult, cfg.cross_attention) for _ in range(cfg.depth))
        self.norm = nn.LayerNorm(d)
        self.size_out = mlp(d, 3, cfg.size_hidden)
        self.class_out = mlp(d, k, cfg.class_hidden)
        if cfg.positional_encoding:
            self.register_buffer("slot_pos", sinusoidal(torch.arange(n_max, dtype=torch.float32), d), persistent=False)

    def forward(self, s_t: torch.Tensor, c_t: torch.Tensor, t: torch.Tensor, text: torch.Tensor,
                text_pad: torch.Tensor | None = None) -> torch.Tensor:
        if s_t.ndim != 3 or s_t.shape[-1] != 3 or c_t.shape[:-1] != s_t.shape[:-1] or c_t.shape[-1] != self.k:
            raise ValueError(f"expected s_t (B, N, 3) and c_t (B, N, {self.k}), got {tuple(s_t.shape)} "
                             f"and {tuple(c_t.shape)}")
        if text.shape[0] != s_t.shape[0] or text.shape[-1] != self.cfg.dim:
            raise ValueError(f"text features {tuple(text.shape)} do not match batch {s_t.shape[0]}")
        h = self.size_in(s_t) + self.class_in(c_t) + self.time(t)[:, None, :]
        if self.cfg.positional_encoding:
            n = h.shape[1]
            if n > self.n_max:
                raise ValueError(f"{n} slots exceed the positional table size {self.n_max}")
            h = h + self.slot_pos[:n].to(h.dtype)
        for blk in self.blocks:
            h = blk(h, text, text_pad)
        h = self.norm(h)
        return torch.cat([self.size_out(h), self.class_out(h)], dim=-1)


class FLGM(nn.Module):
    """Furniture-list model: denoiser plus everything needed to encode and decode."""

    def __init__(self, cfg: FdnConfig, space: SceneSpace, text_vocab: TextVocab, sched: NoiseSchedule):
        super().__init__()
        self.cfg = cfg
        self.space = space
        self.text_vocab = text_vocab
        self.sched = sched
        self.fdn = FurnitureDenoiser(cfg, space.vocab.k, space.n_max, len(text_vocab), sched.T)
        self.steps_trained = 0

    def text_batch(self, prompts: Sequence[str]) -> tuple[torch.Tensor, torch.Tensor]:
        return self.text_vocab.batch(prompts)

    def forward(self, x_sc: torch.Tensor, t: torch.Tensor, ids: torch.Tensor, pad: torch.Tensor) -> torch.Tensor:
        text = self.fdn.text(ids)
        return fdn_forward(x_sc[..., :3], x_sc[..., 3:], t, text, self, pad)

    def meta(self) -> dict:
        return {"config": self.cfg.to_json(), "space": self.space.to_json(), "text_vocab": self.text_vocab.to_json(),
                "schedule": self.sched.config(), "steps_trained": self.steps_trained}

    def save(self, path: str | Path) -> None:
        save_checkpoint(path, KIND, self.meta(), self.state_dict())

    @classmethod
    def load(cls, path: str | Path) -> "FLGM":
        meta, state = load_checkpoint(path, KIND)
        model = cls(FdnConfig(**meta["config"]), SceneSpace.from_json(meta["space"]),
                    TextVocab.from_json(meta["text_vocab"]), NoiseSchedule(**meta["schedule"]))
        model.load_state_dict(state)
        model.steps_trained = int(meta["steps_trained"])
        return model.eval()


def encode_text(prompt: str, model: FLGM) -> torch.Tensor:
    """One feature row per token; an empty prompt yields the single null feature."""
    ids = torch.tensor(model.text_vocab.ids(prompt), dtype=torch.long)
    return model.fdn.text(ids)


def fdn_forward(s_t: torch.Tensor, c_t: torch.Tensor, t: torch.Tensor, text_features: torch.Tensor,
                model: FLGM, text_pad: torch.Tensor | None = None) -> torch.Tensor:
    """Noise prediction over the concatenated (size, class) columns."""
    if text_features.ndim == 2:
        text_features = text_features.expand(s_t.shape[0], -1, -1)
    return model.fdn(s_t, c_t, t, text_features, text_pad)


def drop_text(ids: torch.Tensor, drop: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Replace the prompts flagged in ``drop`` with the null prompt."""
    ids = ids.clone()
    ids[drop] = PAD
    ids[drop, 0] = NULL
    return ids, ids == PAD


def flgm_loss(model: FLGM, x0_sc: torch.Tensor, ids: torch.Tensor, pad: torch.Tensor,
              generator: torch.Generator | None = None, t: torch.Tensor | None = None,
              noise: torch.Tensor | None = None, uncond: torch.Tensor | None = None) -> torch.Tensor:
    """Mean squared noise error over size and class columns of every row."""
    b = x0_sc.shape[0]
    if t is None:
        t = model.sched.sample_t(b, generator)
    if noise is None:
        noise = torch.randn(x0_sc.shape, generator=generator, dtype=x0_sc.dtype)
    if uncond is None:
        uncond = torch.rand(b, generator=generator) < model.cfg.p_uncond
    if uncond.any():
        ids, pad = drop_text(ids, uncond)
    x_t = q_sample(x0_sc, t, noise, model.sched)
    eps_hat = model(x_t, t, ids, pad)
    return torch.mean((eps_hat - noise) ** 2)


FurnitureList = list[tuple[str, tuple[float, float, float]]]


def decode_furniture(values: np.ndarray, space: SceneSpace) -> FurnitureList:
    lay = space.layout
    labels = np.argmax(values[:, lay.cls], axis=1)
    out = []
    for row, lab in zip(values, labels):
        if lab == space.vocab.empty_index:
            continue
        size = np.maximum(space.stats.denormalize_size(row[lay.size]), MIN_SIZE)
        out.append((space.vocab.name(int(lab)), tuple(float(v) for v in size)))
    return out


@torch.no_grad()
def sample_furniture_lists(model: FLGM, prompts: Sequence[str], generator: torch.Generator | None = None,
                           batch_size: int = 64) -> list[FurnitureList]:
    """One furniture list per prompt; ``""`` samples unconditionally."""
    model.eval()
    width = 3 + model.space.vocab.k
    out: list[FurnitureList] = []
    for start in range(0, len(prompts), batch_size):
        chunk = list(prompts[start:start + batch_size])
        ids, pad = model.text_batch(chunk)

        def denoiser(x, t):
            return model(x, t, ids, pad)

        x = sample_loop(denoiser, (len(chunk), model.space.n_max, width), model.sched, generator)
        out.extend(decode_furniture(v, model.space) for v in x.double().numpy())
    return out


def sample_furniture_list(model: FLGM, prompt: str = "", generator: torch.Generator | None = None) -> FurnitureList:
    return sample_furniture_lists(model, [prompt], generator)[0]


def room_prompts(rooms: Sequence[Room]) -> list[str]:
    return [prompt_for(r.room_type, len(r)) for r in rooms]


def train_flgm(rooms: Sequence[Room], cfg: FdnConfig, train_cfg: TrainConfig, sched: NoiseSchedule,
               n_max: int, space: SceneSpace | None = None, text_vocab: TextVocab | None = None,
               on_step=None) -> tuple[FLGM, list[dict]]:
    """Fit a fresh FLGM on ``rooms``; returns the model and its per-step history."""
    space = space or SceneSpace.from_rooms(rooms, n_max)
    text_vocab = text_vocab or TextVocab.from_corpus(sorted({r.room_type for r in rooms}), space.vocab.names, n_max)
    torch.manual_seed(train_cfg.seed)
    model = FLGM(cfg, space, text_vocab, sched)
    values, _ = space.encode(rooms)
    data = torch.as_tensor(values[..., space.layout.size_cls], dtype=torch.float32)
    all_ids, all_pad = text_vocab.batch(room_prompts(rooms))
    model.train()

    def step_loss(idx, gen):
        return flgm_loss(model, data[idx], all_ids[idx], all_pad[idx], gen)

    history = fit(model.parameters(), len(rooms), step_loss, train_cfg, on_step)
    model.steps_trained += len(history)
    return model.eval(), history


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())

