import json
import math
import warnings

import numpy as np
import pytest

from tsdsm.corpus import (augment_delete_replace, augment_rotate, corpus_stats, expand_corpus, format_stats_table,
                          generate_corpus, generate_room, mesh_proxy, sample_pointcloud, write_ply)
from tsdsm.corpus.config import CorpusConfig, default_config, trim_menus
from tsdsm.corpus.io import read_split, write_split
from tsdsm.corpus.mesh import read_obj, read_ply, write_obj
from tsdsm.geometry import iou_matrix
from tsdsm.scene import pairwise_scene_iou


def _footprint_overlap_free(room, specs):
    floor = np.array([o.box_row() for o in room.objects if specs[o.category].on_floor])
    if len(floor) < 2:
        return True
    # flatten onto one slab so only footprints matter
    floor[:, 2] = 0.5
    floor[:, 5] = 0.5
    m = iou_matrix(floor)
    return np.all(m[np.triu_indices(len(floor), 1)] <= 1e-9)


def test_generation_is_deterministic(corpus_config, database):
    a = generate_corpus(corpus_config, "bedroom", 5, database, 3)
    b = generate_corpus(corpus_config, "bedroom", 5, database, 3)
    assert a == b
    assert generate_corpus(corpus_config, "bedroom", 5, database, 4) != a


def test_generated_rooms_respect_contracts(corpus_config, bedrooms):
    rt = corpus_config.room_types["bedroom"]
    for r in bedrooms:
        assert rt.counts.min <= len(r) <= corpus_config.n_max
        assert set(rt.required) <= set(r.categories())
        assert _footprint_overlap_free(r, corpus_config.categories)
        for o in r.objects:
            spec = corpus_config.categories[o.category]
            if spec.on_floor:
                assert o.base_z == pytest.approx(0.0, abs=1e-9)
        for cat, cap in rt.max_per_room.items():
            assert r.categories().count(cat) <= cap


def test_unknown_room_type(corpus_config):
    with pytest.raises(KeyError):
        generate_room(corpus_config, "garage", 0)


def test_config_validation_and_json(corpus_config):
    cfg = CorpusConfig.from_json(json.loads(json.dumps(corpus_config.to_json())))
    assert cfg.to_json() == corpus_config.to_json()
    with pytest.raises(ValueError):
        default_config(expansion_factor=0)


def test_trim_menus_limits_categories():
    cfg = trim_menus(default_config(), 6)
    for rt in cfg.room_types.values():
        assert len(set(rt.menu) | set(rt.required)) <= 6
        assert set(rt.max_per_room) <= set(rt.menu) | set(rt.required)


def test_rotation_is_rigid(bedrooms):
    room = bedrooms[0]
    for angle in (90, 180, 270):
        r = augment_rotate(room, angle)
        a, b = room.boxes(), r.boxes()
        d0 = np.linalg.norm(a[:, None, :3] - a[None, :, :3], axis=-1)
        d1 = np.linalg.norm(b[:, None, :3] - b[None, :, :3], axis=-1)
        np.testing.assert_allclose(d0, d1, atol=1e-9)
        np.testing.assert_allclose(a[:, 3:6], b[:, 3:6])
        dyaw = np.angle(np.exp(1j * (b[:, 6] - a[:, 6])))
        np.testing.assert_allclose(np.abs(dyaw), abs(math.radians(angle if angle <= 180 else angle - 360)), atol=1e-9)
        assert pairwise_scene_iou(r) == pytest.approx(pairwise_scene_iou(room), abs=1e-9)
    four = room
    for _ in range(4):
        four = augment_rotate(four, 90)
    np.testing.assert_allclose(four.boxes()[:, :6], room.boxes()[:, :6], atol=1e-9)


def test_rotation_rejects_other_angles(bedrooms):
    with pytest.raises(ValueError):
        augment_rotate(bedrooms[0], 45)


def test_delete_replace_keeps_required_and_draws_from_database(corpus_config, database, bedrooms):
    specs = corpus_config.categories
    for i, room in enumerate(bedrooms[:20]):
        out = augment_delete_replace(room, database, 0.3, i, specs)
        kept = out.categories()
        for o, cat in zip(room.objects, room.categories()):
            if not specs[cat].deletable and specs[cat].on_floor:
                assert cat in kept
        sizes = {e.size for e in (database.pool(c)[j] for c in database.categories
                                  for j in range(len(database.pool(c))))}
        for o in out.objects:
            if specs[o.category].replaceable or specs[o.category].deletable:
                assert tuple(o.size) in sizes
            if specs[o.category].on_floor:
                assert o.base_z == pytest.approx(0.0, abs=1e-9)
        assert _footprint_overlap_free(out, specs) or not _footprint_overlap_free(room, specs)


def test_delete_probability_extremes(corpus_config, database, bedrooms):
    specs = corpus_config.categories
    room = bedrooms[1]
    assert len(augment_delete_replace(room, database, 0.0, 0, specs)) == len(room)
    gone = augment_delete_replace(room, database, 1.0, 0, specs)
    assert all(not specs[c].deletable for c in gone.categories())
    with pytest.raises(ValueError):
        augment_delete_replace(room, database, 1.5, 0, specs)


def test_expand_corpus_factor_and_ids(corpus_config, database, bedrooms):
    out = expand_corpus(bedrooms[:3], database, 5, 0, corpus_config.categories)
    assert len(out) == 15
    assert out[0].room_id == bedrooms[0].room_id
    assert out[1].room_id == bedrooms[0].room_id + "~001"
    assert len({r.room_id for r in out}) == 15
    assert out == expand_corpus(bedrooms[:3], database, 5, 0, corpus_config.categories)


def test_split_io_round_trip(tmp_path, bedrooms):
    write_split(tmp_path, "train", bedrooms[:4])
    assert read_split(tmp_path, "train") == bedrooms[:4]


def test_stats(bedrooms):
    s = corpus_stats(bedrooms)
    counts = [len(r) for r in bedrooms]
    assert s["rooms"] == len(bedrooms)
    assert s["mean_objects"] == pytest.approx(np.mean(counts))
    assert s["max_objects"] == max(counts)
    assert sum(s["category_frequency"].values()) == sum(counts)
    assert "bedroom" in format_stats_table(s)
    with pytest.raises(ValueError):
        corpus_stats([])


def _on_surface(points, faces, tris, tol=1e-9):
    t = tris[faces]
    e1, e2 = t[:, 1] - t[:, 0], t[:, 2] - t[:, 0]
    n = np.cross(e1, e2)
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    rel = points - t[:, 0]
    plane = np.abs(np.einsum("ij,ij->i", rel, n))
    # barycentric coordinates from the normal equations
    m = np.stack([e1, e2], axis=-1)
    gram = np.einsum("nki,nkj->nij", m, m)
    rhs = np.einsum("nki,nk->ni", m, rel)
    uv = np.linalg.solve(gram, rhs[..., None])[..., 0]
    inside = (uv >= -tol).all(1) & (uv.sum(1) <= 1 + tol)
    return plane.max(), inside.all()


def test_pointcloud_counts_and_membership(database, bedrooms):
    room = bedrooms[2]
    cloud = sample_pointcloud(room, database, 2000, seed=0)
    assert len(cloud) == 2000 * len(room)
    for k, o in enumerate(room.objects):
        sel = cloud.object_index == k
        assert sel.sum() == 2000
        tris = mesh_proxy(database.mesh_kind(o.category)).transformed(o.size, o.location, o.yaw)
        dist, inside = _on_surface(cloud.points[sel], cloud.face_index[sel], tris)
        assert dist < 1e-9 and inside
        assert cloud.label_names[cloud.labels[sel][0]] == o.category


def test_pointcloud_area_uniform(rng):
    proxy = mesh_proxy("box")
    tris = proxy.transformed((2.0, 1.0, 1.0), (0, 0, 0), 0.0)
    from tsdsm.corpus.mesh import sample_surface
    pts, _ = sample_surface(tris, 200_000, rng)
    on_x = np.isclose(np.abs(pts[:, 0]), 2.0).mean()
    # half-extents (2, 1, 1): the two x faces hold 8 of the 40 square units
    assert on_x == pytest.approx(0.2, abs=5e-3)


def test_ply_and_obj_round_trip(tmp_path, database, bedrooms):
    cloud = sample_pointcloud(bedrooms[0], database, 20, seed=1)
    write_ply(cloud, tmp_path / "c.ply")
    pts, cols, labs = read_ply(tmp_path / "c.ply")
    np.testing.assert_allclose(pts, cloud.points, atol=1e-6)
    assert np.array_equal(cols, cloud.colors) and np.array_equal(labs, cloud.labels)
    proxy = mesh_proxy("table", "desk")
    write_obj(proxy, tmp_path / "t.obj")
    back = read_obj(tmp_path / "t.obj", "desk")
    np.testing.assert_allclose(back.vertices, proxy.vertices, atol=1e-6)
    assert np.array_equal(back.faces, proxy.faces)
    assert back.surface_area() == pytest.approx(proxy.surface_area(), rel=1e-5)
