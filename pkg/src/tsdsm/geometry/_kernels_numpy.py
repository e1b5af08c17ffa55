"""Vectorized numpy kernels, used when numba is disabled or missing.

Footprint intersection here collects candidate vertices (corners of each
rectangle inside the other plus edge/edge crossings), orders them by angle
around their centroid and takes the shoelace area. It is an independent
route to the clipping used by the numba kernels.
"""
from __future__ import annotations

import numpy as np

CLIP_EPS = 1e-9
CONTACT_EPS = 1e-12  # touching faces count as disjoint


def footprint_corners(boxes: np.ndarray) -> np.ndarray:
    """Counter-clockwise footprint corners, shape ``(n, 4, 2)``."""
    boxes = np.asarray(boxes, dtype=np.float64)
    c = np.cos(boxes[:, 6])[:, None]
    s = np.sin(boxes[:, 6])[:, None]
    hx = boxes[:, 3:4]
    hy = boxes[:, 4:5]
    lx = np.array([1.0, 1.0, -1.0, -1.0]) * hx
    ly = np.array([-1.0, 1.0, 1.0, -1.0]) * hy
    x = boxes[:, 0:1] + c * lx - s * ly
    y = boxes[:, 1:2] + s * lx + c * ly
    return np.stack([x, y], axis=-1)


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _inside(points, poly, eps):
    # points (P, m, 2) against convex CCW poly (P, 4, 2) -> (P, m)
    edges = np.roll(poly, -1, axis=1) - poly
    rel = points[:, :, None, :] - poly[:, None, :, :]
    side = _cross(edges[:, None, :, :], rel)
    return np.all(side >= -eps, axis=-1)


def polygon_intersection_area(pa: np.ndarray, pb: np.ndarray, eps: float = CLIP_EPS) -> np.ndarray:
    """Area of intersection of convex quads ``pa``/``pb`` of shape ``(P, 4, 2)``."""
    a0 = pa
    da = np.roll(pa, -1, axis=1) - pa
    b0 = pb
    db = np.roll(pb, -1, axis=1) - pb
    d_a = da[:, :, None, :]
    d_b = db[:, None, :, :]
    denom = _cross(d_a, d_b)
    w = b0[:, None, :, :] - a0[:, :, None, :]
    safe = np.where(np.abs(denom) > eps, denom, 1.0)
    t = _cross(w, d_b) / safe
    u = _cross(w, d_a) / safe
    hit = (np.abs(denom) > eps) & (t >= -eps) & (t <= 1 + eps) & (u >= -eps) & (u <= 1 + eps)
    cross_pts = (a0[:, :, None, :] + t[..., None] * d_a).reshape(len(pa), 16, 2)
    hit = hit.reshape(len(pa), 16)

    pts = np.concatenate([pa, pb, cross_pts], axis=1)
    mask = np.concatenate([_inside(pa, pb, eps), _inside(pb, pa, eps), hit], axis=1)
    count = mask.sum(axis=1)
    centroid = (pts * mask[..., None]).sum(axis=1) / np.maximum(count, 1)[:, None]
    rel = pts - centroid[:, None, :]
    ang = np.where(mask, np.arctan2(rel[..., 1], rel[..., 0]), np.inf)
    order = np.argsort(ang, axis=1, kind="stable")
    srt = np.take_along_axis(pts, order[..., None], axis=1)
    smask = np.take_along_axis(mask, order, axis=1)
    srt = np.where(smask[..., None], srt, srt[:, :1, :])
    area = 0.5 * np.abs(_cross(srt, np.roll(srt, -1, axis=1)).sum(axis=1))
    return np.where(count >= 3, area, 0.0)


def iou_pairs(boxes_a: np.ndarray, boxes_b: np.ndarray) -> np.ndarray:
    a = np.asarray(boxes_a, dtype=np.float64)
    b = np.asarray(boxes_b, dtype=np.float64)
    out = np.zeros(len(a))
    if len(a) == 0:
        return out
    rad_a = np.hypot(a[:, 3], a[:, 4])
    rad_b = np.hypot(b[:, 3], b[:, 4])
    near = np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1]) <= rad_a + rad_b
    dz = np.minimum(a[:, 2] + a[:, 5], b[:, 2] + b[:, 5]) - np.maximum(a[:, 2] - a[:, 5], b[:, 2] - b[:, 5])
    live = near & (dz > CONTACT_EPS)
    if not live.any():
        return out
    a, b, dz = a[live], b[live], dz[live]
    inter = polygon_intersection_area(footprint_corners(a), footprint_corners(b)) * dz
    union = 8 * a[:, 3] * a[:, 4] * a[:, 5] + 8 * b[:, 3] * b[:, 4] * b[:, 5] - inter
    out[live] = np.clip(inter / np.where(union > 0, union, 1.0), 0.0, 1.0)
    return out


def iou_matrix(boxes: np.ndarray) -> np.ndarray:
    boxes = np.asarray(boxes, dtype=np.float64)
    n = len(boxes)
    out = np.eye(n)
    i, j = np.triu_indices(n, k=1)
    if len(i):
        v = iou_pairs(boxes[i], boxes[j])
        out[i, j] = v
        out[j, i] = v
    return out


def rasterize(boxes, colors, order, resolution, extent, background):
    img = np.empty((resolution, resolution, 3), dtype=np.uint8)
    img[:] = np.asarray(background, dtype=np.uint8)
    px = 2.0 * extent / resolution
    centers = -extent + (np.arange(resolution) + 0.5) * px
    gx = centers[None, :]
    gy = centers[::-1][:, None]
    for k in order:
        cx, cy, _, hx, hy, _, yaw = boxes[k]
        cs, sn = np.cos(yaw), np.sin(yaw)
        dx = gx - cx
        dy = gy - cy
        u = cs * dx + sn * dy
        v = -sn * dx + cs * dy
        img[(np.abs(u) <= hx) & (np.abs(v) <= hy)] = colors[k]
    return img
