"""Real-vs-synthetic scene classification accuracy on top-down maps."""
from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .features import block_mean

MIN_SCENES = 100
FOLDS = 5


class SceneClassifier(nn.Module):
    def __init__(self, size: int = 32, width: int = 16):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv2d(3, width, 3, padding=1), nn.ReLU(), nn.MaxPool2d(2),
            nn.Conv2d(width, 2 * width, 3, padding=1), nn.ReLU(), nn.MaxPool2d(2),
            nn.Conv2d(2 * width, 2 * width, 3, padding=1), nn.ReLU(), nn.AdaptiveAvgPool2d(1),
            nn.Flatten(), nn.Linear(2 * width, 1),
        )

    def forward(self, x):
        return self.net(x).squeeze(-1)


def _prep(images: np.ndarray, size: int) -> torch.Tensor:
    x = block_mean(np.asarray(images, dtype=np.float32) / 255.0, size) if images.shape[1] != size else \
        np.asarray(images, dtype=np.float32) / 255.0
    return torch.as_tensor(np.ascontiguousarray(x.transpose(0, 3, 1, 2)), dtype=torch.float32)


def _fit_predict(xtr, ytr, xte, seed, epochs, batch, lr):
    gen = torch.Generator().manual_seed(seed)
    torch.manual_seed(seed)
    model = SceneClassifier(xtr.shape[-1])
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = nn.BCEWithLogitsLoss()
    for _ in range(epochs):
        perm = torch.randperm(len(xtr), generator=gen)
        for s in range(0, len(xtr), batch):
            idx = perm[s:s + batch]
            opt.zero_grad(set_to_none=True)
            loss_fn(model(xtr[idx]), ytr[idx]).backward()
            opt.step()
    with torch.no_grad():
        return (model(xte) > 0).float()


def sca(generated: np.ndarray, reference: np.ndarray, seed: int = 0, size: int = 32, epochs: int = 10,
        batch: int = 32, lr: float = 1e-3, folds: int = FOLDS) -> float:
    """Held-out accuracy x100 of a fresh classifier, averaged over ``folds`` 80/20 splits.

    Inputs are image stacks ``(R, H, W, 3)``. Both sides are truncated to the
    smaller count so the task is balanced.
    """
    n = min(len(generated), len(reference))
    if n < MIN_SCENES:
        raise ValueError(f"sca needs at least {MIN_SCENES} scenes per side, got {len(generated)} and {len(reference)}")
    rng = np.random.default_rng(seed)
    g = _prep(np.asarray(generated)[rng.permutation(len(generated))[:n]], size)
    r = _prep(np.asarray(reference)[rng.permutation(len(reference))[:n]], size)
    # fold assignment per side keeps every split balanced
    fold_g = rng.permutation(n) % folds
    fold_r = rng.permutation(n) % folds
    correct = 0.0
    total = 0
    for f in range(folds):
        xtr = torch.cat([g[fold_g != f], r[fold_r != f]])
        ytr = torch.cat([torch.zeros(int((fold_g != f).sum())), torch.ones(int((fold_r != f).sum()))])
        xte = torch.cat([g[fold_g == f], r[fold_r == f]])
        yte = torch.cat([torch.zeros(int((fold_g == f).sum())), torch.ones(int((fold_r == f).sum()))])
        pred = _fit_predict(xtr, ytr, xte, seed * 1000 + f, epochs, batch, lr)
        correct += float((pred == yte).sum())
        total += len(yte)
    return 100.0 * correct / total
