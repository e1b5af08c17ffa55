import math

import numpy as np
import pytest

from tsdsm.scene import (EMPTY, CapacityError, CategoryVocab, Layout, NormalizationStats, ObjectInstance, Room,
                         decode_scene, dump_room, encode_corpus, encode_scene, load_room, pairwise_scene_iou,
                         rotation_to_yaw)


def _room():
    objs = (
        ObjectInstance("bed", (1.0, 0.8, 0.3), (0.0, 0.0, 0.3), 0.5),
        ObjectInstance("lamp", (0.1, 0.1, 0.2), (1.2, -0.4, 0.9), -2.0),
    )
    return Room("bedroom", objs, "r1")


def test_layout_slices():
    lay = Layout(4)
    assert lay.width == 12
    assert (lay.size, lay.cls, lay.loc, lay.rot) == (slice(0, 3), slice(3, 7), slice(7, 10), slice(10, 12))


def test_encode_decode_round_trip():
    room = _room()
    stats = NormalizationStats((0, 0, 0), (2, 2, 2), (-2, -2, 0), (2, 2, 2))
    vocab = CategoryVocab(["bed", "lamp", "wardrobe"])
    st = encode_scene(room, stats, vocab, 6)
    assert st.values.shape == (6, 3 + 4 + 5)
    assert st.mask.tolist() == [True, True, False, False, False, False]
    assert np.all(np.abs(st.values) <= 1)
    back = decode_scene(st, stats, vocab, "bedroom", "r1")
    assert back.categories() == room.categories()
    for a, b in zip(back.objects, room.objects):
        np.testing.assert_allclose(a.size, b.size, atol=1e-12)
        np.testing.assert_allclose(a.location, b.location, atol=1e-12)
        assert a.yaw == pytest.approx(b.yaw, abs=1e-12)


def test_padding_rows_use_empty_class():
    stats = NormalizationStats.from_rooms([_room()])
    vocab = CategoryVocab.from_rooms([_room()])
    st = encode_scene(_room(), stats, vocab, 4)
    lay = Layout(vocab.k)
    pad = st.values[3]
    assert pad[lay.cls.start + vocab.empty_index] == 1.0
    assert np.all(pad[lay.size] == 0) and np.all(pad[lay.loc] == 0)
    assert pad[lay.rot].tolist() == [0.0, 1.0]
    assert vocab.name(vocab.empty_index) == EMPTY


def test_capacity_error():
    with pytest.raises(CapacityError):
        encode_scene(_room(), NormalizationStats.from_rooms([_room()]), CategoryVocab.from_rooms([_room()]), 1)


def test_unknown_category():
    with pytest.raises(KeyError):
        encode_scene(_room(), NormalizationStats.from_rooms([_room()]), CategoryVocab(["bed"]), 4)


def test_stats_reject_degenerate_ranges_but_widen_constants():
    with pytest.raises(ValueError):
        NormalizationStats((0, 0, 0), (0, 1, 1), (0, 0, 0), (1, 1, 1))
    one = Room("x", (ObjectInstance("a", (1, 1, 1), (0, 0, 0)),))
    st = NormalizationStats.from_rooms([one])
    assert np.all(np.isfinite(st.normalize_size((1, 1, 1))))


def test_normalization_maps_range_to_unit_interval(bedrooms):
    st = NormalizationStats.from_rooms(bedrooms)
    locs = np.array([o.location for r in bedrooms for o in r.objects])
    z = st.normalize_location(locs)
    assert z.min() >= -1 and z.max() <= 1
    np.testing.assert_allclose(st.denormalize_location(z), locs, atol=1e-12)


def test_encode_corpus_stacks(bedrooms):
    st = NormalizationStats.from_rooms(bedrooms)
    vocab = CategoryVocab.from_rooms(bedrooms)
    v, m = encode_corpus(bedrooms[:5], st, vocab, 32)
    assert v.shape == (5, 32, vocab.k + 8) and m.shape == (5, 32)
    assert m.sum() == sum(len(r) for r in bedrooms[:5])


def test_rotation_to_yaw_handles_unnormalized():
    assert rotation_to_yaw((2 * math.sin(1.0), 2 * math.cos(1.0))) == pytest.approx(1.0)
    assert rotation_to_yaw((0.0, 0.0)) == 0.0


def test_room_json_round_trip(tmp_path):
    p = tmp_path / "r.json"
    dump_room(_room(), p)
    assert load_room(p) == _room()


def test_object_validation():
    with pytest.raises(ValueError):
        ObjectInstance("a", (1, 0, 1), (0, 0, 0))
    with pytest.raises(ValueError):
        ObjectInstance("a", (1, 1), (0, 0, 0))


def test_generated_rooms_are_collision_free(bedrooms):
    assert all(pairwise_scene_iou(r) == 0.0 for r in bedrooms)
