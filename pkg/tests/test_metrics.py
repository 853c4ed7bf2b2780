import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mgsp.metrics import boundary_accuracy, boundary_map, overall_accuracy


def quadrant_map():
    m = np.zeros((5, 5), dtype=np.int32)
    m[:2, :2] = 1
    m[:2, 2:] = 2
    m[2:, :2] = 3
    m[2:, 2:] = 4
    return m


def test_overall_accuracy_extremes():
    a = np.arange(12).reshape(3, 4)
    mask = np.ones((3, 4), dtype=bool)
    assert overall_accuracy(a, a, mask) == 1.0
    assert overall_accuracy(a, a + 1, mask) == 0.0


def test_overall_accuracy_counts_only_masked_pixels():
    pred = np.array([[1, 1], [2, 2]])
    truth = np.array([[1, 2], [1, 2]])
    assert overall_accuracy(pred, truth, np.ones((2, 2), bool)) == 0.5
    left = np.array([[True, False], [True, False]])
    assert overall_accuracy(pred, truth, left) == 0.5
    top = np.array([[True, True], [False, False]])
    assert overall_accuracy(pred, truth, top) == 0.5
    only_hit = np.array([[True, False], [False, False]])
    assert overall_accuracy(pred, truth, only_hit) == 1.0


def test_overall_accuracy_errors():
    a = np.zeros((2, 2))
    with pytest.raises(ValueError, match="shape"):
        overall_accuracy(a, np.zeros((2, 3)), np.ones((2, 2), bool))
    with pytest.raises(ValueError, match="empty"):
        overall_accuracy(a, a, np.zeros((2, 2), bool))


def test_boundary_map_constant_and_two_tone():
    assert not boundary_map(np.full((4, 6), 7)).any()
    two = np.array([[0, 1], [0, 1]])
    assert boundary_map(two).all()


def test_boundary_map_quadrants_hand_mask():
    m = quadrant_map()
    got = boundary_map(m, neighborhood=4)
    want = np.zeros((5, 5), dtype=bool)
    want[1:3, :] = True
    want[:, 1:3] = True
    np.testing.assert_array_equal(got, want)


def test_boundary_map_eight_neighborhood_is_wider():
    m = np.zeros((5, 5), dtype=np.int32)
    m[2, 2] = 1
    four = boundary_map(m, 4)
    eight = boundary_map(m, 8)
    assert four[2, 2] and eight[2, 2]
    assert not four[1, 1]
    assert eight[1, 1] and eight[3, 3] and eight[1, 3] and eight[3, 1]
    assert np.all(eight | ~four)  # 8-neighborhood only adds pixels
    assert eight.sum() == 9
    assert four.sum() == 5


def test_boundary_map_errors():
    with pytest.raises(ValueError, match="2-d"):
        boundary_map(np.zeros(5, dtype=int))
    with pytest.raises(ValueError, match="neighborhood"):
        boundary_map(np.zeros((2, 2), dtype=int), neighborhood=6)


def test_boundary_map_background_transitions_count():
    m = np.array([[0, 0, 5, 5]])
    got = boundary_map(m)
    np.testing.assert_array_equal(got, [[False, True, True, False]])


def test_boundary_accuracy_identity_and_symmetry():
    m = quadrant_map()
    assert boundary_accuracy(m, m) == 1.0
    other = np.roll(m, 1, axis=1)
    assert boundary_accuracy(m, other) == boundary_accuracy(other, m)


def test_boundary_accuracy_constant_prediction():
    truth = quadrant_map()
    pred = np.zeros_like(truth)
    frac_boundary = boundary_map(truth).mean()
    assert boundary_accuracy(pred, truth) == pytest.approx(1.0 - frac_boundary)
    assert frac_boundary == pytest.approx(16 / 25)


def test_boundary_accuracy_label_permutation_invariant():
    truth = quadrant_map()
    relabeled = np.take(np.array([0, 4, 3, 2, 1]), truth)
    assert boundary_accuracy(relabeled, truth) == 1.0


def test_boundary_accuracy_shape_error():
    with pytest.raises(ValueError, match="shape"):
        boundary_accuracy(np.zeros((2, 2), int), np.zeros((3, 2), int))


@given(st.integers(0, 2**32 - 1))
def test_boundary_map_matches_neighbor_scan(seed):
    rng = np.random.default_rng(seed)
    h, w = int(rng.integers(1, 7)), int(rng.integers(1, 7))
    labels = rng.integers(0, 4, size=(h, w))
    for hood, offsets in (
        (4, [(-1, 0), (1, 0), (0, -1), (0, 1)]),
        (8, [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)]),
    ):
        want = np.zeros((h, w), dtype=bool)
        for r in range(h):
            for c in range(w):
                for dr, dc in offsets:
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < h and 0 <= cc < w and labels[rr, cc] != labels[r, c]:
                        want[r, c] = True
        np.testing.assert_array_equal(boundary_map(labels, hood), want)
