"""Category KL divergence between object-frequency distributions."""
from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from ..scene import Room


def category_counts(rooms: Iterable[Room]) -> Counter:
    return Counter(o.category for r in rooms for o in r.objects)


def smoothed_distribution(counts: Counter, vocab: Sequence[str], alpha: float = 1.0) -> np.ndarray:
    c = np.array([counts.get(v, 0) for v in vocab], dtype=np.float64) + alpha
    return c / c.sum()


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / q[nz])))


def ckl(generated: Sequence[Room], reference: Sequence[Room], vocab: Sequence[str] | None = None,
        alpha: float = 1.0) -> float:
    """``KL(P_ref || P_gen)`` with add-``alpha`` smoothing over the shared vocabulary."""
    if not generated or not reference:
        raise ValueError("ckl needs non-empty generated and reference corpora")
    g, r = category_counts(generated), category_counts(reference)
    vocab = sorted(set(g) | set(r)) if vocab is None else list(vocab)
    if not vocab:
        return 0.0
    return kl_divergence(smoothed_distribution(r, vocab, alpha), smoothed_distribution(g, vocab, alpha))
