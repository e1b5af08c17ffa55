"""Stage two: layout diffusion over (location, rotation) with size and class locked.

The denoiser is a 1D encoder-decoder over the padded object axis. It uses
1x1 convolutions by default, per-object layer norm, time scale-shift,
skip concatenation and masked self-attention at every level. Stages change
channel width rather than sequence length, because the object axis has no
ordering to pool over.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from torch import nn

from .checkpoint import load_checkpoint, save_checkpoint
from .ddpm import NoiseSchedule, q_sample, reconstruct_x0, sample_loop
from .diff_iou import pairwise_soft_iou_sum
from .layers import TimeEmbedding, mlp
from .scene import MIN_SIZE, ObjectInstance, Room, empty_row, rotation_to_yaw
from .space import SceneSpace
from .training import TrainConfig, fit

KIND = "lgm"
TIME_SPAN = 1000.0
W_SCHEDULES = ("alpha_bar", "uniform")


@dataclass
class LdnConfig:
    dim: int = 64
    dim_mults: tuple[int, ...] = (1, 2, 4)
    kernel_size: int = 1
    heads: int = 4
    separate_heads: bool = True
    iou_weight: float = 0.1
    w_schedule: str = "alpha_bar"

    def __post_init__(self):
        self.dim_mults = tuple(self.dim_mults)
        if self.kernel_size % 2 != 1:
            raise ValueError("kernel_size must be odd")
        if self.w_schedule not in W_SCHEDULES:
            raise ValueError(f"w_schedule must be one of {W_SCHEDULES}")
        if any((self.dim * m) % self.heads for m in self.dim_mults):
            raise ValueError("every stage width must be divisible by heads")

    def to_json(self) -> dict:
        d = asdict(self)
        d["dim_mults"] = list(self.dim_mults)
        return d


class _ResBlock(nn.Module):
    def __init__(self, c_in: int, c_out: int, t_dim: int, ks: int):
        super().__init__()
        self.n1 = nn.LayerNorm(c_in)
        self.conv1 = nn.Conv1d(c_in, c_out, ks, padding=ks // 2)
        self.time = nn.Sequential(nn.SiLU(), nn.Linear(t_dim, 2 * c_out))
        self.n2 = nn.LayerNorm(c_out)
        self.conv2 = nn.Conv1d(c_out, c_out, ks, padding=ks // 2)
        self.skip = nn.Conv1d(c_in, c_out, 1) if c_in != c_out else nn.Identity()
        self.act = nn.SiLU()

    @staticmethod
    def _conv(conv, h):
        return conv(h.transpose(1, 2)).transpose(1, 2)

    def forward(self, h, temb, keep):
        x = self._conv(self.conv1, self.act(self.n1(h))) * keep
        scale, shift = self.time(temb)[:, None, :].chunk(2, dim=-1)
        x = self.n2(x) * (1 + scale) + shift
        x = self._conv(self.conv2, self.act(x))
        return (x + self._conv(self.skip, h)) * keep


class _Attn(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.norm = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)

    def forward(self, h, pad, keep):
        x = self.norm(h)
        return (h + self.attn(x, x, x, key_padding_mask=pad, need_weights=False)[0]) * keep


class LayoutDenoiser(nn.Module):
    def __init__(self, cfg: LdnConfig, k: int, T: int = 1000):
        super().__init__()
        self.cfg = cfg
        self.k = k
        d, ks = cfg.dim, cfg.kernel_size
        self.cond_in = mlp(3 + k, d)
        self.lr_in = mlp(5, d)
        t_dim = 4 * d
        self.time = TimeEmbedding(d, t_dim, scale=TIME_SPAN / T)
        widths = [d * m for m in cfg.dim_mults]
        self.down = nn.ModuleList()
        c = d
        for w in widths:
            self.down.append(nn.ModuleList([_ResBlock(c, w, t_dim, ks), _ResBlock(w, w, t_dim, ks),
                                            _Attn(w, cfg.heads)]))
            c = w
        self.mid1 = _ResBlock(c, c, t_dim, ks)
        self.mid_attn = _Attn(c, cfg.heads)
        self.mid2 = _ResBlock(c, c, t_dim, ks)
        self.up = nn.ModuleList()
        for w in reversed(widths):
            self.up.append(nn.ModuleList([_ResBlock(c + w, w, t_dim, ks), _ResBlock(w, w, t_dim, ks),
                                          _Attn(w, cfg.heads)]))
            c = w
        self.out_norm = nn.LayerNorm(c)
        if cfg.separate_heads:
            self.loc_out = mlp(c, 3)
            self.rot_out = mlp(c, 2)
        else:
            self.lr_out = mlp(c, 5)

    def forward(self, x: torch.Tensor, t: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        width = 8 + self.k
        if x.ndim != 3 or x.shape[-1] != width or mask.shape != x.shape[:2]:
            raise ValueError(f"expected x (B, N, {width}) and mask (B, N), got {tuple(x.shape)} and "
                             f"{tuple(mask.shape)}")
        keep = mask[..., None].to(x.dtype)
        pad = ~mask
        h = (self.cond_in(x[..., :3 + self.k]) + self.lr_in(x[..., 3 + self.k:])) * keep
        temb = self.time(t)
        skips = []
        for r1, r2, attn in self.down:
            h = attn(r2(r1(h, temb, keep), temb, keep), pad, keep)
            skips.append(h)
        h = self.mid2(self.mid_attn(self.mid1(h, temb, keep), pad, keep), temb, keep)
        for r1, r2, attn in self.up:
            h = torch.cat([h, skips.pop()], dim=-1)
            h = attn(r2(r1(h, temb, keep), temb, keep), pad, keep)
        h = self.out_norm(h)
        if self.cfg.separate_heads:
            out = torch.cat([self.loc_out(h), self.rot_out(h)], dim=-1)
        else:
            out = self.lr_out(h)
        return out * keep


class LGM(nn.Module):
    def __init__(self, cfg: LdnConfig, space: SceneSpace, sched: NoiseSchedule):
        super().__init__()
        self.cfg = cfg
        self.space = space
        self.sched = sched
        self.ldn = LayoutDenoiser(cfg, space.vocab.k, sched.T)
        self.steps_trained = 0
        st = space.stats
        for name in ("size_min", "size_max", "loc_min", "loc_max"):
            self.register_buffer(name, torch.as_tensor(getattr(st, name), dtype=torch.float32), persistent=False)

    def forward(self, x, t, mask):
        return self.ldn(x, t, mask)

    def denorm(self, x, lo, hi):
        return (x + 1.0) * 0.5 * (hi - lo).to(x.dtype) + lo.to(x.dtype)

    def meta(self) -> dict:
        return {"config": self.cfg.to_json(), "space": self.space.to_json(), "schedule": self.sched.config(),
                "steps_trained": self.steps_trained}

    def save(self, path: str | Path) -> None:
        save_checkpoint(path, KIND, self.meta(), self.state_dict())

    @classmethod
    def load(cls, path: str | Path) -> "LGM":
        meta, state = load_checkpoint(path, KIND)
        model = cls(LdnConfig(**meta["config"]), SceneSpace.from_json(meta["space"]), NoiseSchedule(**meta["schedule"]))
        model.load_state_dict(state)
        model.steps_trained = int(meta["steps_trained"])
        return model.eval()


def ldn_forward(x_locked: torch.Tensor, l_t: torch.Tensor, r_t: torch.Tensor, t: torch.Tensor,
                model: LGM, mask: torch.Tensor) -> torch.Tensor:
    """Noise prediction ``(B, N, 5)`` for location and rotation from locked size/class columns."""
    return model(torch.cat([x_locked, l_t, r_t], dim=-1), t, mask)


def iou_weight_t(model: LGM, t: torch.Tensor, like: torch.Tensor) -> torch.Tensor:
    if model.cfg.w_schedule == "uniform":
        return torch.ones(t.shape, dtype=like.dtype)
    return model.sched.gather(model.sched.alpha_bar, t, like[:, 0, 0])


def reconstructed_boxes(model: LGM, x0: torch.Tensor, x0_lr_hat: torch.Tensor):
    """World-space centres, half-extents and rotations of the reconstructed room."""
    lay = model.space.layout
    half = model.denorm(x0[..., lay.size], model.size_min, model.size_max).clamp_min(MIN_SIZE)
    center = model.denorm(x0_lr_hat[..., :3], model.loc_min, model.loc_max)
    return center, half, x0_lr_hat[..., 3:5]


def lgm_loss(model: LGM, x0: torch.Tensor, mask: torch.Tensor, generator: torch.Generator | None = None,
             t: torch.Tensor | None = None, noise: torch.Tensor | None = None,
             iou_weight: float | None = None) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """``(total, L_lr, L_box)``; size and class columns are never noised or scored."""
    lay = model.space.layout
    lam = model.cfg.iou_weight if iou_weight is None else iou_weight
    b = x0.shape[0]
    if t is None:
        t = model.sched.sample_t(b, generator)
    x0_lr = x0[..., lay.loc_rot]
    if noise is None:
        noise = torch.randn(x0_lr.shape, generator=generator, dtype=x0.dtype)
    x_t_lr = q_sample(x0_lr, t, noise, model.sched)
    eps_hat = model(torch.cat([x0[..., lay.size_cls], x_t_lr], dim=-1), t, mask)
    keep = mask[..., None].to(x0.dtype)
    l_lr = ((eps_hat - noise) ** 2 * keep).sum() / (keep.sum() * 5).clamp_min(1.0)
    if lam == 0:
        return l_lr, l_lr, torch.zeros((), dtype=x0.dtype)
    x0_hat = reconstruct_x0(x_t_lr, eps_hat, t, model.sched)
    center, half, rot = reconstructed_boxes(model, x0, x0_hat)
    per_scene = pairwise_soft_iou_sum(center, half, rot, mask)
    l_box = (iou_weight_t(model, t, x0) * per_scene).mean()
    return l_lr + lam * l_box, l_lr, l_box


FurnitureList = Sequence[tuple[str, Sequence[float]]]


def locked_inputs(model: LGM, furniture: Sequence[FurnitureList]) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Initial values, full-width lock mask and row mask for a batch of furniture lists."""
    space = model.space
    lay = space.layout
    n = space.n_max
    base = empty_row(space.vocab)
    values = np.tile(base, (len(furniture), n, 1))
    rows = np.zeros((len(furniture), n), dtype=bool)
    for b, items in enumerate(furniture):
        if len(items) > n:
            raise ValueError(f"furniture list of {len(items)} items exceeds capacity {n}")
        for i, (cat, size) in enumerate(items):
            values[b, i, lay.size] = np.clip(space.stats.normalize_size(size), -1.0, 1.0)
            values[b, i, lay.cls] = -1.0
            values[b, i, lay.cls.start + space.vocab.index(cat)] = 1.0
            rows[b, i] = True
    lock = np.zeros(values.shape, dtype=bool)
    lock[..., lay.size_cls] = True
    lock[~rows] = True
    return torch.as_tensor(values, dtype=torch.float32), torch.as_tensor(lock), torch.as_tensor(rows)


Placement = tuple[tuple[float, float, float], float]


@torch.no_grad()
def sample_layouts(model: LGM, furniture: Sequence[FurnitureList], generator: torch.Generator | None = None,
                   batch_size: int = 64) -> list[list[Placement]]:
    """``(location, yaw)`` per item for each furniture list."""
    model.eval()
    lay = model.space.layout
    out: list[list[Placement]] = []
    for start in range(0, len(furniture), batch_size):
        chunk = list(furniture[start:start + batch_size])
        if all(len(f) == 0 for f in chunk):
            out.extend([] for _ in chunk)
            continue
        values, lock, rows = locked_inputs(model, chunk)

        def denoiser(x, t):
            return torch.cat([torch.zeros_like(x[..., lay.size_cls]), model(x, t, rows)], dim=-1)

        x = sample_loop(denoiser, values.shape, model.sched, generator, locked=(lock, values)).double().numpy()
        for b, items in enumerate(chunk):
            locs = model.space.stats.denormalize_location(x[b, :len(items), lay.loc])
            out.append([(tuple(float(v) for v in locs[i]), rotation_to_yaw(x[b, i, lay.rot]))
                        for i in range(len(items))])
    return out


def sample_layout(model: LGM, furniture: FurnitureList, generator: torch.Generator | None = None) -> list[Placement]:
    return sample_layouts(model, [furniture], generator)[0]


def assemble_room(furniture: FurnitureList, placements: Sequence[Placement], room_type: str = "",
                  room_id: str = "") -> Room:
    objs = tuple(ObjectInstance(cat, tuple(float(v) for v in size), loc, yaw)
                 for (cat, size), (loc, yaw) in zip(furniture, placements))
    return Room(room_type, objs, room_id)


def train_lgm(rooms: Sequence[Room], cfg: LdnConfig, train_cfg: TrainConfig, sched: NoiseSchedule,
              n_max: int, space: SceneSpace | None = None, on_step=None) -> tuple[LGM, list[dict]]:
    space = space or SceneSpace.from_rooms(rooms, n_max)
    torch.manual_seed(train_cfg.seed)
    model = LGM(cfg, space, sched)
    values, masks = space.encode(rooms)
    data = torch.as_tensor(values, dtype=torch.float32)
    mask = torch.as_tensor(masks)
    model.train()
    terms: dict = {}

    def step_loss(idx, gen):
        total, l_lr, l_box = lgm_loss(model, data[idx], mask[idx], gen)
        terms["l_lr"] = float(l_lr.detach())
        terms["l_box"] = float(l_box.detach())
        return total

    def record(rec):
        rec.update(terms)
        if on_step is not None:
            on_step(rec)

    history = fit(model.parameters(), len(rooms), step_loss, train_cfg, record)
    model.steps_trained += len(history)
    return model.eval(), history
