"""numba kernels: Sutherland-Hodgman clipping of yaw-rotated footprints.

Boxes are rows of ``[cx, cy, cz, hx, hy, hz, yaw]``.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

CLIP_EPS = 1e-9
CONTACT_EPS = 1e-12  # touching faces count as disjoint
_MAX_VERTS = 16


@njit(cache=True)
def _footprint(box, out):
    c = math.cos(box[6])
    s = math.sin(box[6])
    hx = box[3]
    hy = box[4]
    # counter-clockwise in the object frame
    lx = (hx, hx, -hx, -hx)
    ly = (-hy, hy, hy, -hy)
    for k in range(4):
        out[k, 0] = box[0] + c * lx[k] - s * ly[k]
        out[k, 1] = box[1] + s * lx[k] + c * ly[k]


@njit(cache=True)
def _clip(subject, n_sub, ax, ay, bx, by, out, eps):
    n_out = 0
    if n_sub == 0:
        return 0
    ex = bx - ax
    ey = by - ay
    px = subject[n_sub - 1, 0]
    py = subject[n_sub - 1, 1]
    p_side = ex * (py - ay) - ey * (px - ax)
    for i in range(n_sub):
        qx = subject[i, 0]
        qy = subject[i, 1]
        q_side = ex * (qy - ay) - ey * (qx - ax)
        q_in = q_side >= -eps
        p_in = p_side >= -eps
        if q_in != p_in:
            denom = p_side - q_side
            if abs(denom) > 0.0:
                t = p_side / denom
                out[n_out, 0] = px + t * (qx - px)
                out[n_out, 1] = py + t * (qy - py)
                n_out += 1
        if q_in:
            out[n_out, 0] = qx
            out[n_out, 1] = qy
            n_out += 1
        px = qx
        py = qy
        p_side = q_side
    return n_out


@njit(cache=True)
def _shoelace(poly, n):
    acc = 0.0
    for i in range(n):
        j = (i + 1) % n
        acc += poly[i, 0] * poly[j, 1] - poly[j, 0] * poly[i, 1]
    return 0.5 * abs(acc)


@njit(cache=True)
def footprint_intersection_area(a, b, eps=CLIP_EPS):
    fa = np.empty((4, 2))
    fb = np.empty((4, 2))
    _footprint(a, fa)
    _footprint(b, fb)
    buf0 = np.empty((_MAX_VERTS, 2))
    buf1 = np.empty((_MAX_VERTS, 2))
    for k in range(4):
        buf0[k, 0] = fa[k, 0]
        buf0[k, 1] = fa[k, 1]
    n = 4
    for k in range(4):
        j = (k + 1) % 4
        n = _clip(buf0, n, fb[k, 0], fb[k, 1], fb[j, 0], fb[j, 1], buf1, eps)
        for i in range(n):
            buf0[i, 0] = buf1[i, 0]
            buf0[i, 1] = buf1[i, 1]
        if n < 3:
            return 0.0
    return _shoelace(buf0, n)


@njit(cache=True)
def _iou_one(a, b, eps):
    rad_a = math.sqrt(a[3] * a[3] + a[4] * a[4])
    rad_b = math.sqrt(b[3] * b[3] + b[4] * b[4])
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    if dx * dx + dy * dy > (rad_a + rad_b) ** 2:
        return 0.0
    top = min(a[2] + a[5], b[2] + b[5])
    bot = max(a[2] - a[5], b[2] - b[5])
    dz = top - bot
    if dz <= CONTACT_EPS:
        return 0.0
    inter = footprint_intersection_area(a, b, eps) * dz
    vol_a = 8.0 * a[3] * a[4] * a[5]
    vol_b = 8.0 * b[3] * b[4] * b[5]
    union = vol_a + vol_b - inter
    if union <= 0.0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


@njit(cache=True)
def iou_pairs(boxes_a, boxes_b):
    n = boxes_a.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = _iou_one(boxes_a[i], boxes_b[i], CLIP_EPS)
    return out


@njit(cache=True)
def iou_matrix(boxes):
    n = boxes.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        out[i, i] = 1.0
        for j in range(i + 1, n):
            v = _iou_one(boxes[i], boxes[j], CLIP_EPS)
            out[i, j] = v
            out[j, i] = v
    return out


@njit(cache=True)
def rasterize(boxes, colors, order, resolution, extent, background):
    """Paint yaw-rotated footprints onto a ``resolution``-square canvas.

    The canvas covers ``[-extent, extent]`` on both axes; image row 0 is the
    +y edge. Pixels are filled when their centre lies inside a footprint.
    """
    img = np.empty((resolution, resolution, 3), dtype=np.uint8)
    for r in range(resolution):
        for c in range(resolution):
            for ch in range(3):
                img[r, c, ch] = background[ch]
    px = 2.0 * extent / resolution
    for oi in range(order.shape[0]):
        k = order[oi]
        box = boxes[k]
        cs = math.cos(box[6])
        sn = math.sin(box[6])
        rad = math.sqrt(box[3] * box[3] + box[4] * box[4])
        c0 = max(int(math.floor((box[0] - rad + extent) / px)), 0)
        c1 = min(int(math.ceil((box[0] + rad + extent) / px)), resolution - 1)
        r0 = max(int(math.floor((extent - (box[1] + rad)) / px)), 0)
        r1 = min(int(math.ceil((extent - (box[1] - rad)) / px)), resolution - 1)
        for r in range(r0, r1 + 1):
            y = extent - (r + 0.5) * px
            for c in range(c0, c1 + 1):
                x = -extent + (c + 0.5) * px
                dx = x - box[0]
                dy = y - box[1]
                u = cs * dx + sn * dy
                v = -sn * dx + cs * dy
                if abs(u) <= box[3] and abs(v) <= box[4]:
                    for ch in range(3):
                        img[r, c, ch] = colors[k, ch]
    return img
