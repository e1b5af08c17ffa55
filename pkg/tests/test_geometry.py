import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import axis_aligned_iou as aa_oracle
from oracles import monte_carlo_iou, polygon_area, random_box_pairs
from tsdsm.geometry import RotatedBox3D, axis_aligned_iou, iou_matrix, pairwise_iou_sum, rotated_iou_3d
from tsdsm.geometry import kernels
from tsdsm.geometry._kernels_numpy import footprint_corners, polygon_intersection_area

BACKENDS = sorted(kernels.BACKENDS)


def box(arr):
    return RotatedBox3D(tuple(arr[:3]), tuple(arr[3:6]), float(arr[6]))


@pytest.mark.parametrize("backend", BACKENDS)
def test_identical_boxes_have_unit_iou(backend):
    b = RotatedBox3D((0.3, -0.2, 0.5), (0.4, 0.7, 0.5), 0.9)
    assert rotated_iou_3d(b, b, backend) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_far_apart_boxes_have_zero_iou(backend):
    a = RotatedBox3D((0, 0, 0), (1, 1, 1), 0.3)
    b = RotatedBox3D((2 * math.sqrt(2) + 0.01, 0, 0), (1, 1, 1), 1.1)
    assert rotated_iou_3d(a, b, backend) == 0.0


@pytest.mark.parametrize("backend", BACKENDS)
def test_rotated_unit_cube_matches_analytic(backend):
    # the octagon shared by a square and its 45-degree turn has area 8(sqrt2 - 1)
    a = RotatedBox3D((0, 0, 0), (1, 1, 1), 0.0)
    b = RotatedBox3D((0, 0, 0), (1, 1, 1), math.pi / 4)
    inter = 8 * (math.sqrt(2) - 1) * 2
    expected = inter / (16 - inter)
    assert rotated_iou_3d(a, b, backend) == pytest.approx(expected, abs=1e-12)


def test_rotated_unit_cube_matches_monte_carlo():
    a = np.array([0, 0, 0, 1, 1, 1, 0.0])
    b = np.array([0, 0, 0, 1, 1, 1, math.pi / 4])
    mc = monte_carlo_iou(a, b, 1_000_000, np.random.default_rng(0))
    assert rotated_iou_3d(box(a), box(b)) == pytest.approx(mc, abs=1e-2)


@pytest.mark.parametrize("backend", BACKENDS)
def test_monte_carlo_agreement_on_random_pairs(backend):
    rng = np.random.default_rng(5)
    for a, b in random_box_pairs(rng, 10):
        mc = monte_carlo_iou(a, b, 200_000, rng)
        assert rotated_iou_3d(box(a), box(b), backend) == pytest.approx(mc, abs=2e-2)


@pytest.mark.parametrize("backend", BACKENDS)
def test_axis_aligned_closed_form(backend):
    rng = np.random.default_rng(6)
    for a, b in random_box_pairs(rng, 50, axis_aligned=True):
        got = rotated_iou_3d(box(a), box(b), backend)
        assert got == pytest.approx(aa_oracle(a, b), abs=1e-9)
        assert axis_aligned_iou(box(a), box(b)) == pytest.approx(aa_oracle(a, b), abs=1e-12)


def test_backends_agree_on_matrices():
    if len(BACKENDS) < 2:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(7)
    boxes = np.column_stack([rng.uniform(-2, 2, (80, 3)), rng.uniform(0.1, 1, (80, 3)), rng.uniform(-4, 4, 80)])
    np.testing.assert_allclose(iou_matrix(boxes, "numba"), iou_matrix(boxes, "numpy"), atol=1e-12)


def test_touching_faces_are_disjoint():
    table = RotatedBox3D((0, 0, 0.4), (0.5, 0.5, 0.4), 0.0)
    vase = RotatedBox3D((0, 0, 0.9), (0.1, 0.1, 0.1), 0.2)
    for be in BACKENDS:
        assert rotated_iou_3d(table, vase, be) == 0.0


def test_zero_volume_box_is_rejected():
    a = RotatedBox3D((0, 0, 0), (1, 0, 1), 0.0)
    with pytest.raises(ValueError, match="zero-volume"):
        rotated_iou_3d(a, a)


def test_corners_respect_front_convention():
    b = RotatedBox3D((1.0, 2.0, 0.5), (0.2, 0.4, 0.5), math.pi / 2)
    c = b.corners()
    assert c.shape == (8, 3)
    # a quarter turn swaps the footprint's x and y spans
    np.testing.assert_allclose(np.ptp(c[:, 0]), 0.8, atol=1e-12)
    np.testing.assert_allclose(np.ptp(c[:, 1]), 0.4, atol=1e-12)
    np.testing.assert_allclose(sorted(set(np.round(c[:, 2], 12))), [0.0, 1.0])


def test_pairwise_sum_examples():
    assert pairwise_iou_sum(np.zeros((0, 7))) == 0.0
    disjoint = np.array([[0, 0, 0, .4, .4, .4, 0], [3, 0, 0, .4, .4, .4, 1], [0, 3, 0, .4, .4, .4, 2]])
    assert pairwise_iou_sum(disjoint) == 0.0
    twin = np.array([[0, 0, 0, .4, .5, .6, .3]] * 2)
    assert pairwise_iou_sum(twin) == pytest.approx(1.0, abs=1e-12)


def test_candidate_area_against_shoelace_of_known_polygon():
    sq = footprint_corners(np.array([[0, 0, 0, 1, 1, 1, 0.0]]))
    shifted = footprint_corners(np.array([[1, 1, 0, 1, 1, 1, 0.0]]))
    assert polygon_intersection_area(sq, shifted)[0] == pytest.approx(1.0)
    assert polygon_area(sq[0]) == pytest.approx(4.0)


finite = st.floats(-2, 2, allow_nan=False)
half = st.floats(0.05, 1.5, allow_nan=False)
angle = st.floats(-math.pi, math.pi, allow_nan=False)
box_st = st.builds(lambda x, y, z, a, b, c, t: np.array([x, y, z, a, b, c, t]),
                   finite, finite, finite, half, half, half, angle)


@settings(max_examples=150, deadline=None)
@given(box_st, box_st)
def test_iou_symmetric_and_bounded(a, b):
    for be in BACKENDS:
        ab = rotated_iou_3d(box(a), box(b), be)
        ba = rotated_iou_3d(box(b), box(a), be)
        assert 0.0 <= ab <= 1.0
        assert ab == pytest.approx(ba, abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(box_st, box_st, angle, finite, finite, finite)
def test_iou_rigid_motion_invariance(a, b, theta, tx, ty, tz):
    c, s = math.cos(theta), math.sin(theta)

    def move(v):
        x, y = v[0], v[1]
        return np.array([c * x - s * y + tx, s * x + c * y + ty, v[2] + tz, *v[3:6], v[6] + theta])

    before = rotated_iou_3d(box(a), box(b))
    after = rotated_iou_3d(box(move(a)), box(move(b)))
    assert after == pytest.approx(before, abs=1e-9)


def test_env_flag_selects_numpy_backend():
    code = "from tsdsm.geometry import kernels; print(kernels.ACTIVE)"
    env = dict(os.environ, TSDSM_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
