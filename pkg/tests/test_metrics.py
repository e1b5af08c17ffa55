import math
import warnings
from collections import Counter

import numpy as np
import pytest
import scipy.linalg

from tsdsm.corpus.mesh import category_color
from tsdsm.metrics import (ExtentWarning, MetricReport, RandomProjection, block_mean, ckl, evaluate,
                           frechet_distance, kernel_mmd2, polynomial_kernel, rasterize_corpus, rasterize_topdown,
                           save_png, sca)
from tsdsm.scene import ObjectInstance, Room


def _room(*objs):
    return Room("bedroom", tuple(objs), "r")


def test_ckl_hand_computed():
    gen = [_room(ObjectInstance("a", (1, 1, 1), (0, 0, 1)), ObjectInstance("a", (1, 1, 1), (0, 0, 1)))]
    ref = [_room(ObjectInstance("a", (1, 1, 1), (0, 0, 1)), ObjectInstance("b", (1, 1, 1), (0, 0, 1)))]
    # add-one: gen (3, 1)/4, ref (2, 2)/4
    expected = 0.5 * math.log(0.5 / 0.75) + 0.5 * math.log(0.5 / 0.25)
    assert ckl(gen, ref) == pytest.approx(expected, abs=1e-12)
    assert ckl(ref, ref) == 0.0
    with pytest.raises(ValueError):
        ckl([], ref)


def test_ckl_direction_and_vocab():
    gen = [_room(ObjectInstance("a", (1, 1, 1), (0, 0, 1)))]
    ref = [_room(ObjectInstance("b", (1, 1, 1), (0, 0, 1)))] * 3
    v = ckl(gen, ref, vocab=["a", "b", "c"])
    p = np.array([1, 4, 1]) / 6
    q = np.array([2, 1, 1]) / 4
    assert v == pytest.approx(float(np.sum(p * np.log(p / q))), abs=1e-12)


def _classic_fid(f1, f2):
    mu1, mu2 = f1.mean(0), f2.mean(0)
    c1, c2 = np.cov(f1, rowvar=False), np.cov(f2, rowvar=False)
    cross = scipy.linalg.sqrtm(c1 @ c2).real
    return float(np.sum((mu1 - mu2) ** 2) + np.trace(c1 + c2 - 2 * cross))


def test_fid_matches_sqrtm_oracle(rng):
    a = rng.normal(size=(400, 6))
    b = rng.normal(loc=0.3, scale=1.4, size=(300, 6)) @ rng.normal(size=(6, 6))
    r = frechet_distance(a, b)
    assert not r.jittered
    assert r.value == pytest.approx(_classic_fid(a, b), rel=1e-8)
    assert frechet_distance(b, a).value == pytest.approx(r.value, rel=1e-12)


def test_fid_gaussian_closed_form(rng):
    # N(0, I) vs N(m, s^2 I): |m|^2 + d (1 - s)^2
    d = 4
    a = rng.normal(size=(200_000, d))
    b = rng.normal(loc=0.5, scale=2.0, size=(200_000, d))
    assert frechet_distance(a, b).value == pytest.approx(d * 0.25 + d * 1.0, rel=2e-2)


def test_fid_singular_uses_jitter(rng):
    a = rng.normal(size=(50, 3))
    a[:, 2] = a[:, 0]
    r = frechet_distance(a, a)
    assert r.jittered and r.value == pytest.approx(0.0, abs=1e-9)


def test_kid_matches_loop_oracle(rng):
    x = rng.normal(size=(7, 3))
    y = rng.normal(size=(5, 3)) + 0.4

    def k(u, v):
        return (np.dot(u, v) / 3 + 1) ** 3

    sxx = sum(k(x[i], x[j]) for i in range(7) for j in range(7) if i != j) / 42
    syy = sum(k(y[i], y[j]) for i in range(5) for j in range(5) if i != j) / 20
    sxy = sum(k(a, b) for a in x for b in y) / 35
    assert kernel_mmd2(x, y) == pytest.approx(sxx + syy - 2 * sxy, rel=1e-10)
    assert polynomial_kernel(x, y).shape == (7, 5)
    with pytest.raises(ValueError):
        kernel_mmd2(x[:1], y)


def test_kid_unbiased_near_zero_for_same_distribution(rng):
    vals = [kernel_mmd2(rng.normal(size=(100, 4)), rng.normal(size=(100, 4))) for _ in range(50)]
    assert abs(np.mean(vals)) < 3 * np.std(vals) / math.sqrt(50)


def test_block_mean_and_projection(rng):
    img = rng.integers(0, 256, size=(2, 8, 8, 3)).astype(np.float64)
    pooled = block_mean(img, 2)
    assert pooled[0, 0, 0, 0] == pytest.approx(img[0, :4, :4, 0].mean())
    with pytest.raises(ValueError):
        block_mean(img, 3)
    p = RandomProjection(dim=5, pool=4, seed=2)
    assert p.name == "randproj-p4-d5-s2"
    f = p(img)
    assert f.shape == (2, 5)
    np.testing.assert_array_equal(f, RandomProjection(dim=5, pool=4, seed=2)(img))


def test_raster_area_matches_footprint():
    # a 2 m x 1 m axis-aligned box at 64 px over +-4 m covers 16 x 8 pixels
    room = _room(ObjectInstance("bed", (1.0, 0.5, 0.3), (0.0, 0.0, 0.3)))
    m = rasterize_topdown(room, 64, 4.0)
    assert m.filled().sum() == 128
    assert m.filled().sum() * m.pixel_area == pytest.approx(2.0)
    rot = rasterize_topdown(_room(ObjectInstance("bed", (1.0, 0.5, 0.3), (0.3, -0.7, 0.3), 0.6)), 256, 4.0)
    assert rot.filled().sum() * rot.pixel_area == pytest.approx(2.0, rel=2e-2)


def test_raster_orientation_and_colour():
    room = _room(ObjectInstance("lamp", (0.25, 0.25, 0.2), (2.0, 3.0, 0.2)))
    m = rasterize_topdown(room, 64, 4.0)
    ys, xs = np.nonzero(m.filled())
    # row 0 is +y, column 0 is -x; 8 px per metre
    assert sorted(set(ys)) == [6, 7, 8, 9] and sorted(set(xs)) == [46, 47, 48, 49]
    assert tuple(m.image[ys[0], xs[0]]) == category_color("lamp")


def test_raster_paints_higher_objects_last():
    table = ObjectInstance("desk", (0.5, 0.5, 0.4), (0.0, 0.0, 0.4))
    vase = ObjectInstance("vase", (0.1, 0.1, 0.1), (0.0, 0.0, 0.9))
    for order in ((table, vase), (vase, table)):
        m = rasterize_topdown(_room(*order), 64, 4.0)
        assert tuple(m.image[32, 32]) == category_color("vase")


def test_raster_extent_warning_and_corpus(tmp_path):
    far = _room(ObjectInstance("bed", (1.0, 1.0, 0.3), (3.8, 0.0, 0.3)))
    with pytest.warns(ExtentWarning):
        rasterize_topdown(far)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        imgs = rasterize_corpus([far, _room()])
    assert imgs.shape == (2, 64, 64, 3) and imgs[1].max() == 0
    save_png(imgs[0], tmp_path / "x.png", scale=2)
    from PIL import Image
    assert Image.open(tmp_path / "x.png").size == (128, 128)


def test_sca_separates_blank_from_real(bedrooms):
    real = rasterize_corpus(bedrooms * 2)
    blank = np.zeros_like(real)
    assert sca(blank, real, seed=0) == 100.0


def test_sca_requires_enough_scenes():
    with pytest.raises(ValueError):
        sca(np.zeros((50, 32, 32, 3)), np.zeros((200, 32, 32, 3)))


def test_evaluate_and_report_round_trip(bedrooms, tmp_path):
    rep = evaluate(bedrooms * 2, bedrooms[::-1] * 2, seed=0)
    assert rep.fid == pytest.approx(0.0, abs=1e-6)
    assert rep.ckl == pytest.approx(0.0, abs=1e-12)
    assert 0 <= rep.sca <= 100
    assert rep.extractor == "randproj-p16-d64-s0"
    assert rep.display["KID x0.001"] == round(rep.kid * 1000, 4)
    rep.dump(tmp_path / "r.json")
    assert MetricReport.load(tmp_path / "r.json") == rep
