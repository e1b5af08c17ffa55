"""DDPM noise schedule, forward corruption and ancestral sampling.

Steps are 1-indexed: ``t`` runs over ``1..T`` and ``alpha_bar[t - 1]`` is the
cumulative signal level after ``t`` corruption steps.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import torch

ALPHA_BAR_FLOOR = 1e-12


@dataclass(frozen=True)
class ScheduleConfig:
    T: int = 2000
    beta_start: float = 1e-4
    beta_end: float = 0.02


class NoiseSchedule:
    """Linear-beta schedule tables held in float64."""

    def __init__(self, T: int = 2000, beta_start: float = 1e-4, beta_end: float = 0.02):
        if T < 1:
            raise ValueError("T must be >= 1")
        if not 0.0 < beta_start <= beta_end < 1.0:
            raise ValueError("need 0 < beta_start <= beta_end < 1")
        self.T = int(T)
        self.beta_start = float(beta_start)
        self.beta_end = float(beta_end)
        self.beta = torch.linspace(beta_start, beta_end, T, dtype=torch.float64)
        self.alpha = 1.0 - self.beta
        self.alpha_bar = torch.cumprod(self.alpha, dim=0)
        prev = torch.cat([torch.ones(1, dtype=torch.float64), self.alpha_bar[:-1]])
        self.alpha_bar_prev = prev
        self.posterior_var = self.beta * (1.0 - prev) / (1.0 - self.alpha_bar)

    @classmethod
    def from_config(cls, cfg: ScheduleConfig | dict) -> "NoiseSchedule":
        if isinstance(cfg, dict):
            cfg = ScheduleConfig(**cfg)
        return cls(cfg.T, cfg.beta_start, cfg.beta_end)

    def config(self) -> dict:
        return {"T": self.T, "beta_start": self.beta_start, "beta_end": self.beta_end}

    def snr(self) -> torch.Tensor:
        return torch.sqrt(self.alpha_bar / (1.0 - self.alpha_bar))

    def _check(self, t: torch.Tensor) -> None:
        if torch.any(t < 1) or torch.any(t > self.T):
            raise ValueError(f"diffusion step out of range 1..{self.T}")

    def gather(self, table: torch.Tensor, t, like: torch.Tensor) -> torch.Tensor:
        """``table[t - 1]`` broadcast against ``like`` (batch on dim 0)."""
        t = torch.as_tensor(t, dtype=torch.long)
        self._check(t)
        v = table[t - 1].to(like.dtype)
        if v.ndim == 0:
            return v
        return v.reshape(v.shape + (1,) * (like.ndim - v.ndim))

    def sample_t(self, n: int, generator: torch.Generator | None = None) -> torch.Tensor:
        return torch.randint(1, self.T + 1, (n,), generator=generator)


def q_sample(x0: torch.Tensor, t, noise: torch.Tensor, sched: NoiseSchedule) -> torch.Tensor:
    """``sqrt(abar_t) * x0 + sqrt(1 - abar_t) * noise``."""
    if noise.shape != x0.shape:
        raise ValueError(f"noise shape {tuple(noise.shape)} != x0 shape {tuple(x0.shape)}")
    ab = sched.gather(sched.alpha_bar, t, x0)
    return ab.sqrt() * x0 + (1.0 - ab).sqrt() * noise


def reconstruct_x0(x_t: torch.Tensor, eps_hat: torch.Tensor, t, sched: NoiseSchedule) -> torch.Tensor:
    """Clean-sample estimate implied by a noise prediction."""
    ab = sched.gather(sched.alpha_bar, t, x_t).clamp_min(ALPHA_BAR_FLOOR)
    return (x_t - (1.0 - ab).sqrt() * eps_hat) / ab.sqrt()


def posterior_mean(x_t: torch.Tensor, eps_hat: torch.Tensor, t, sched: NoiseSchedule) -> torch.Tensor:
    beta = sched.gather(sched.beta, t, x_t)
    alpha = sched.gather(sched.alpha, t, x_t)
    ab = sched.gather(sched.alpha_bar, t, x_t)
    return (x_t - beta / (1.0 - ab).sqrt() * eps_hat) / alpha.sqrt()


def p_sample_step(x_t: torch.Tensor, eps_hat: torch.Tensor, t: int, sched: NoiseSchedule,
                  generator: torch.Generator | None = None) -> torch.Tensor:
    """One ancestral step ``x_t -> x_{t-1}`` with variance ``beta_tilde_t``; noiseless at ``t = 1``."""
    mean = posterior_mean(x_t, eps_hat, t, sched)
    if int(t) == 1:
        return mean
    var = sched.gather(sched.posterior_var, t, x_t)
    z = torch.randn(x_t.shape, generator=generator, dtype=x_t.dtype)
    return mean + var.sqrt() * z


Denoiser = Callable[[torch.Tensor, torch.Tensor], torch.Tensor]


class NonFiniteSample(FloatingPointError):
    pass


def sample_loop(denoiser: Denoiser, shape, sched: NoiseSchedule, generator: torch.Generator | None = None,
                locked: tuple[torch.Tensor, torch.Tensor] | None = None, dtype=torch.float32) -> torch.Tensor:
    """Iterate ``p_sample_step`` from ``T`` to 1 starting at pure noise.

    ``denoiser(x_t, t_batch)`` returns a noise prediction shaped like ``x_t``.
    ``locked = (mask, values)`` pins the masked entries to ``values`` before
    the first step and after every step.
    """
    x = torch.randn(tuple(shape), generator=generator, dtype=dtype)
    if locked is not None:
        mask, values = locked
        mask = mask.to(torch.bool).expand(x.shape)
        values = values.to(dtype).expand(x.shape)
        x = torch.where(mask, values, x)
    for t in range(sched.T, 0, -1):
        tb = torch.full((x.shape[0],), t, dtype=torch.long)
        with torch.no_grad():
            eps = denoiser(x, tb)
        x = p_sample_step(x, eps, t, sched, generator)
        if locked is not None:
            x = torch.where(mask, values, x)
        if not torch.isfinite(x).all():
            raise NonFiniteSample(f"non-finite sample values at diffusion step {t}")
    return x
