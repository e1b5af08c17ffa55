"""Small building blocks shared by both denoisers."""
from __future__ import annotations

import math

import torch
from torch import nn


def sinusoidal(x: torch.Tensor, dim: int, max_period: float = 10000.0) -> torch.Tensor:
    """Sinusoidal features of a float tensor ``x`` (any shape) -> ``x.shape + (dim,)``."""
    half = dim // 2
    freqs = torch.exp(-math.log(max_period) * torch.arange(half, dtype=x.dtype) / max(half - 1, 1))
    ang = x[..., None] * freqs
    emb = torch.cat([ang.sin(), ang.cos()], dim=-1)
    if dim % 2:
        emb = torch.cat([emb, torch.zeros_like(emb[..., :1])], dim=-1)
    return emb


class TimeEmbedding(nn.Module):
    """Sinusoidal step features followed by an MLP.

    ``scale`` maps the step range onto a fixed span (``t * scale``), so short
    schedules still spread over the informative frequencies.
    """

    def __init__(self, dim: int, out_dim: int | None = None, scale: float = 1.0):
        super().__init__()
        self.dim = dim
        self.scale = scale
        out_dim = out_dim or dim
        self.mlp = nn.Sequential(nn.Linear(dim, out_dim), nn.SiLU(), nn.Linear(out_dim, out_dim))

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        dtype = self.mlp[0].weight.dtype
        return self.mlp(sinusoidal(t.to(dtype) * self.scale, self.dim))


def mlp(d_in: int, d_out: int, hidden: int | None = None) -> nn.Sequential:
    hidden = hidden or max(d_in, d_out)
    return nn.Sequential(nn.Linear(d_in, hidden), nn.SiLU(), nn.Linear(hidden, d_out))
