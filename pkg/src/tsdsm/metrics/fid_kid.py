"""Frechet distance and unbiased polynomial-kernel MMD on feature sets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

JITTER = 1e-6


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def trace_sqrt_product(c1: np.ndarray, c2: np.ndarray) -> float:
    """``tr sqrt(C1 C2)`` for PSD inputs, via the symmetric form ``sqrt(C1) C2 sqrt(C1)``."""
    s1 = _psd_sqrt(c1)
    m = s1 @ c2 @ s1
    w = np.linalg.eigvalsh((m + m.T) / 2)
    return float(np.sqrt(np.clip(w, 0.0, None)).sum())


def _is_singular(c: np.ndarray) -> bool:
    w = np.linalg.eigvalsh(c)
    return w.min() <= 1e-10 * max(w.max(), 1e-300)


@dataclass
class FrechetResult:
    value: float
    jittered: bool


def frechet_distance(f1: np.ndarray, f2: np.ndarray) -> FrechetResult:
    f1 = np.asarray(f1, dtype=np.float64)
    f2 = np.asarray(f2, dtype=np.float64)
    mu1, mu2 = f1.mean(0), f2.mean(0)
    c1 = np.atleast_2d(np.cov(f1, rowvar=False))
    c2 = np.atleast_2d(np.cov(f2, rowvar=False))
    jittered = bool(_is_singular(c1) or _is_singular(c2))
    if jittered:
        eye = JITTER * np.eye(len(c1))
        c1, c2 = c1 + eye, c2 + eye
    # symmetrize the cross term so that swapping the arguments gives the same value
    cross = 0.5 * (trace_sqrt_product(c1, c2) + trace_sqrt_product(c2, c1))
    d = float(np.sum((mu1 - mu2) ** 2) + np.trace(c1) + np.trace(c2) - 2.0 * cross)
    return FrechetResult(max(d, 0.0), jittered)


def polynomial_kernel(x: np.ndarray, y: np.ndarray, degree: int = 3, coef: float = 1.0) -> np.ndarray:
    return (x @ y.T / x.shape[1] + coef) ** degree


def kernel_mmd2(f1: np.ndarray, f2: np.ndarray) -> float:
    """Unbiased MMD^2 with the cubic polynomial kernel over the full sets."""
    x = np.asarray(f1, dtype=np.float64)
    y = np.asarray(f2, dtype=np.float64)
    m, n = len(x), len(y)
    if m < 2 or n < 2:
        raise ValueError("kernel MMD needs at least two samples per side")
    kxx = polynomial_kernel(x, x)
    kyy = polynomial_kernel(y, y)
    kxy = polynomial_kernel(x, y)
    sxx = (kxx.sum() - np.trace(kxx)) / (m * (m - 1))
    syy = (kyy.sum() - np.trace(kyy)) / (n * (n - 1))
    return float(sxx + syy - 2.0 * kxy.mean())
