"""Triangle-mesh proxies for furniture and labelled surface point clouds."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..frs import FurnitureDatabase
from ..scene import Room

POINTS_PER_OBJECT = 30_000
BACKGROUND_RGB = (0, 0, 0)

# unit cube [-1, 1]^3, two triangles per face
_CUBE_V = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=np.float64)
_CUBE_F = np.array([
    [0, 2, 3], [0, 3, 1],  # -x
    [4, 5, 7], [4, 7, 6],  # +x
    [0, 1, 5], [0, 5, 4],  # -y
    [2, 6, 7], [2, 7, 3],  # +y
    [0, 4, 6], [0, 6, 2],  # -z
    [1, 3, 7], [1, 7, 5],  # +z
])


@dataclass(frozen=True)
class MeshProxy:
    """Triangles in the object frame where ``[-1, 1]^3`` spans the bounding box."""

    category: str
    vertices: np.ndarray  # (V, 3)
    faces: np.ndarray  # (F, 3) int

    def transformed(self, size: Sequence[float], location: Sequence[float], yaw: float) -> np.ndarray:
        """World-space triangle corners, shape ``(F, 3, 3)``."""
        v = self.vertices * np.asarray(size, dtype=np.float64)
        c, s = math.cos(yaw), math.sin(yaw)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        v = v @ rot.T + np.asarray(location, dtype=np.float64)
        return v[self.faces]

    def surface_area(self, size=(1.0, 1.0, 1.0)) -> float:
        return float(triangle_areas(self.transformed(size, (0, 0, 0), 0.0)).sum())


def _outward(faces: np.ndarray) -> np.ndarray:
    t = _CUBE_V[faces]
    normal = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
    flip = np.einsum("ij,ij->i", normal, t.mean(axis=1)) < 0
    faces = faces.copy()
    faces[flip] = faces[flip][:, ::-1]
    return faces


_CUBE_F = _outward(_CUBE_F)


def _box(center, half) -> tuple[np.ndarray, np.ndarray]:
    return _CUBE_V * np.asarray(half) + np.asarray(center), _CUBE_F.copy()


def _composite(parts) -> tuple[np.ndarray, np.ndarray]:
    verts, faces, off = [], [], 0
    for v, f in parts:
        verts.append(v)
        faces.append(f + off)
        off += len(v)
    return np.vstack(verts), np.vstack(faces)


def mesh_proxy(kind: str, category: str = "") -> MeshProxy:
    if kind == "box":
        v, f = _box((0, 0, 0), (1, 1, 1))
    elif kind == "table":
        # top slab over four legs, all inside the unit bounding box
        parts = [_box((0, 0, 0.9), (1, 1, 0.1))]
        for sx in (-1, 1):
            for sy in (-1, 1):
                parts.append(_box((sx * 0.9, sy * 0.9, -0.1), (0.1, 0.1, 0.9)))
        v, f = _composite(parts)
    else:
        raise KeyError(f"unknown mesh proxy kind {kind!r}")
    return MeshProxy(category, v, f)


def triangle_areas(tris: np.ndarray) -> np.ndarray:
    return 0.5 * np.linalg.norm(np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]), axis=1)


def sample_surface(tris: np.ndarray, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Area-uniform points on triangles ``(F, 3, 3)``; returns points and face ids."""
    areas = triangle_areas(tris)
    if areas.sum() <= 0:
        raise ValueError("mesh has zero surface area")
    face = rng.choice(len(tris), size=n, p=areas / areas.sum())
    u = rng.random(n)
    v = rng.random(n)
    flip = u + v > 1
    u[flip] = 1 - u[flip]
    v[flip] = 1 - v[flip]
    t = tris[face]
    pts = t[:, 0] + u[:, None] * (t[:, 1] - t[:, 0]) + v[:, None] * (t[:, 2] - t[:, 0])
    return pts, face


def category_color(name: str) -> tuple[int, int, int]:
    """Stable RGB for a category name, never equal to the background."""
    h = hashlib.md5(name.encode("utf-8")).digest()
    return tuple(40 + b % 216 for b in h[:3])


@dataclass
class PointCloud:
    points: np.ndarray  # (P, 3) float64
    colors: np.ndarray  # (P, 3) uint8
    labels: np.ndarray  # (P,) int, index into label_names
    label_names: list[str]
    object_index: np.ndarray  # (P,) source object
    face_index: np.ndarray  # (P,) source triangle within the object's mesh

    def __len__(self) -> int:
        return len(self.points)


def sample_pointcloud(room: Room, db: FurnitureDatabase, points_per_object: int = POINTS_PER_OBJECT,
                      seed: int = 0) -> PointCloud:
    """Sample ``points_per_object`` surface points from each object's mesh proxy."""
    names = sorted({o.category for o in room.objects})
    label_of = {n: i for i, n in enumerate(names)}
    rng = np.random.default_rng(seed)
    pts, cols, labs, objs, faces = [], [], [], [], []
    for k, o in enumerate(room.objects):
        try:
            proxy = mesh_proxy(db.mesh_kind(o.category), o.category)
        except KeyError as exc:
            raise KeyError(f"object {k} ({o.category!r}) in room {room.room_id!r} has no mesh proxy") from exc
        tris = proxy.transformed(o.size, o.location, o.yaw)
        p, f = sample_surface(tris, points_per_object, rng)
        pts.append(p)
        faces.append(f)
        cols.append(np.tile(np.array(category_color(o.category), dtype=np.uint8), (points_per_object, 1)))
        labs.append(np.full(points_per_object, label_of[o.category]))
        objs.append(np.full(points_per_object, k))
    if not pts:
        z = np.zeros((0, 3))
        e = np.zeros(0, dtype=int)
        return PointCloud(z, z.astype(np.uint8), e, names, e, e)
    return PointCloud(np.vstack(pts), np.vstack(cols), np.concatenate(labs), names,
                      np.concatenate(objs), np.concatenate(faces))


def write_ply(cloud: PointCloud, path: str | Path) -> None:
    """ASCII PLY with ``x y z red green blue label`` per vertex."""
    path = Path(path)
    header = "\n".join([
        "ply",
        "format ascii 1.0",
        "comment label names: " + " ".join(cloud.label_names),
        f"element vertex {len(cloud)}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        "property int label",
        "end_header",
    ])
    with path.open("w") as fh:
        fh.write(header + "\n")
        for p, c, l in zip(cloud.points, cloud.colors, cloud.labels):
            fh.write(f"{p[0]:.6f} {p[1]:.6f} {p[2]:.6f} {c[0]} {c[1]} {c[2]} {l}\n")


def read_ply(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    end = lines.index("end_header")
    data = np.loadtxt(lines[end + 1:], ndmin=2) if len(lines) > end + 1 else np.zeros((0, 7))
    return data[:, :3], data[:, 3:6].astype(np.uint8), data[:, 6].astype(int)


def write_obj(mesh: MeshProxy, path: str | Path) -> None:
    with Path(path).open("w") as fh:
        fh.write(f"# mesh proxy ({mesh.category or 'generic'})\n")
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.6f} {v[1]:.6f} {v[2]:.6f}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def read_obj(path: str | Path, category: str = "") -> MeshProxy:
    verts, faces = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return MeshProxy(category, np.array(verts), np.array(faces, dtype=int))
