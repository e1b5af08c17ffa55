"""Differentiable rotated-box IoU for the overlap penalty.

Footprints are intersected with the candidate-vertex construction (corners
inside the other rectangle plus edge crossings, angle-sorted, shoelace).
The selection and ordering are taken from detached values, so the area is
the exact polygon area with gradients through the active vertex set.
Vertical overlap uses a softplus-smoothed min/max.
"""
from __future__ import annotations

import torch
import torch.nn.functional as F

SHARPNESS = 50.0
_EPS = 1e-9
_ROT_EPS = 1e-8


def smooth_min(a: torch.Tensor, b: torch.Tensor, k: float = SHARPNESS) -> torch.Tensor:
    return a - F.softplus(k * (a - b)) / k


def smooth_max(a: torch.Tensor, b: torch.Tensor, k: float = SHARPNESS) -> torch.Tensor:
    return a + F.softplus(k * (b - a)) / k


def unit_rotation(rot: torch.Tensor) -> torch.Tensor:
    return rot / torch.sqrt((rot ** 2).sum(-1, keepdim=True) + _ROT_EPS)


def footprint_corners(center: torch.Tensor, half: torch.Tensor, rot: torch.Tensor) -> torch.Tensor:
    """CCW corners ``(..., 4, 2)`` from xy centres, xy half-extents and unit ``[sin, cos]``."""
    s, c = rot[..., 0:1], rot[..., 1:2]
    lx = half[..., 0:1] * center.new_tensor([1.0, 1.0, -1.0, -1.0])
    ly = half[..., 1:2] * center.new_tensor([-1.0, 1.0, 1.0, -1.0])
    x = center[..., 0:1] + c * lx - s * ly
    y = center[..., 1:2] + s * lx + c * ly
    return torch.stack([x, y], dim=-1)


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _inside(points, poly):
    edges = torch.roll(poly, -1, dims=-2) - poly
    rel = points[..., :, None, :] - poly[..., None, :, :]
    return (_cross(edges[..., None, :, :], rel) >= -_EPS).all(dim=-1)


def quad_intersection_area(pa: torch.Tensor, pb: torch.Tensor) -> torch.Tensor:
    """Intersection area of convex CCW quads ``(P, 4, 2)``."""
    p = pa.shape[0]
    da = torch.roll(pa, -1, dims=1) - pa
    db = torch.roll(pb, -1, dims=1) - pb
    d_a = da[:, :, None, :]
    d_b = db[:, None, :, :]
    denom = _cross(d_a, d_b)
    w = pb[:, None, :, :] - pa[:, :, None, :]
    ok = denom.detach().abs() > _EPS
    safe = torch.where(ok, denom, torch.ones_like(denom))
    t = _cross(w, d_b) / safe
    u = _cross(w, d_a) / safe
    td, ud = t.detach(), u.detach()
    hit = ok & (td >= -_EPS) & (td <= 1 + _EPS) & (ud >= -_EPS) & (ud <= 1 + _EPS)
    crossings = (pa[:, :, None, :] + t[..., None] * d_a).reshape(p, 16, 2)

    pts = torch.cat([pa, pb, crossings], dim=1)
    with torch.no_grad():
        mask = torch.cat([_inside(pa, pb), _inside(pb, pa), hit.reshape(p, 16)], dim=1)
        count = mask.sum(dim=1)
        cen = (pts * mask[..., None]).sum(1) / count.clamp_min(1)[:, None]
        rel = pts - cen[:, None, :]
        ang = torch.where(mask, torch.atan2(rel[..., 1], rel[..., 0]), torch.full_like(rel[..., 0], float("inf")))
        order = torch.argsort(ang, dim=1, stable=True)
        smask = torch.gather(mask, 1, order)
    srt = torch.gather(pts, 1, order[..., None].expand(-1, -1, 2))
    srt = torch.where(smask[..., None], srt, srt[:, :1, :])
    area = 0.5 * _cross(srt, torch.roll(srt, -1, dims=1)).sum(1).abs()
    return torch.where(count >= 3, area, torch.zeros_like(area))


def soft_iou_3d(ca, ha, ra, cb, hb, rb) -> torch.Tensor:
    """IoU of box pairs given centres ``(P, 3)``, half-extents ``(P, 3)`` and unit rotations ``(P, 2)``."""
    inter_xy = quad_intersection_area(footprint_corners(ca[:, :2], ha[:, :2], ra),
                                      footprint_corners(cb[:, :2], hb[:, :2], rb))
    top = smooth_min(ca[:, 2] + ha[:, 2], cb[:, 2] + hb[:, 2])
    bot = smooth_max(ca[:, 2] - ha[:, 2], cb[:, 2] - hb[:, 2])
    inter = inter_xy * F.relu(top - bot)
    union = 8 * ha.prod(-1) + 8 * hb.prod(-1) - inter
    return inter / union.clamp_min(1e-12)


def pairwise_soft_iou_sum(center: torch.Tensor, half: torch.Tensor, rot: torch.Tensor,
                          mask: torch.Tensor) -> torch.Tensor:
    """Per-scene ``sum_{i<j} IoU`` over valid rows; inputs ``(B, N, .)``, output ``(B,)``."""
    b, n = mask.shape
    rot = unit_rotation(rot)
    i, j = torch.triu_indices(n, n, offset=1)
    with torch.no_grad():
        valid = mask[:, i] & mask[:, j]
        # pairs whose circumscribed discs are apart have zero overlap and zero gradient
        rad = half[..., :2].norm(dim=-1)
        dist = (center[:, i, :2] - center[:, j, :2]).norm(dim=-1)
        valid &= dist <= rad[:, i] + rad[:, j]
        bi, pi = valid.nonzero(as_tuple=True)
    out = center.new_zeros(b)
    if len(bi) == 0:
        return out + 0.0 * center.sum()
    ii, jj = i[pi], j[pi]
    iou = soft_iou_3d(center[bi, ii], half[bi, ii], rot[bi, ii], center[bi, jj], half[bi, jj], rot[bi, jj])
    return out.index_add(0, bi, iou)
