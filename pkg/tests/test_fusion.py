import logging
import math
from types import SimpleNamespace

import numpy as np
import pytest

from mgsp.classify import make_split
from mgsp.fusion import (
    STRATEGIES,
    FusionWeights,
    fuse_majority,
    graph_total_variation,
    mln_mrc,
    power_iteration_lmax,
    validation_accuracy,
    von_neumann_entropy,
    weight_dv,
    weight_mv,
    weight_tv,
    weight_va,
    weight_vn,
)
from mgsp.mln import MlnConfig, build_single_layer_graph
from mgsp.rng import SplitMix64, derive_seed

PATH3 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)


def brute_force_fuse(label_maps, weight_at):
    """Reference vote counter: visits every pixel and class explicitly.

    weight_at(j, idx) is resolution j's weight at pixel idx; classes are
    scanned in ascending order so exact ties keep the lowest id, and the
    per-class sums accumulate in resolution order to mirror float
    rounding."""
    shape = label_maps[0].shape
    classes = sorted({int(v) for lm in label_maps for v in lm.ravel()})
    out = np.empty(shape, dtype=np.int64)
    for idx in np.ndindex(shape):
        best_c = None
        best_s = -math.inf
        for c in classes:
            s = 0.0
            for j, lm in enumerate(label_maps):
                if lm[idx] == c:
                    s += weight_at(j, idx)
            if s > best_s:
                best_s = s
                best_c = c
        out[idx] = best_c
    return out


def test_fuse_single_map_is_identity():
    lm = np.array([[3, 1], [2, 3]])
    fused = fuse_majority([lm], weight_mv(1))
    np.testing.assert_array_equal(fused, lm)
    assert fused.dtype == np.int32


def test_fuse_majority_vote_and_tie():
    maps = [np.array([[1]]), np.array([[1]]), np.array([[2]])]
    assert fuse_majority(maps, weight_mv(3))[0, 0] == 1
    # exact tie resolves to the lowest class id
    assert fuse_majority([np.array([[2]]), np.array([[1]])], weight_mv(2))[0, 0] == 1


def test_fuse_respects_scalar_weights():
    truth = np.array([[1, 2], [2, 1]])
    wrong = 3 - truth
    w = FusionWeights(strategy="mv", per_resolution=np.array([0.9, 0.1]))
    np.testing.assert_array_equal(fuse_majority([truth, wrong], w), truth)
    # a zero-weight map contributes nothing
    w0 = FusionWeights(strategy="mv", per_resolution=np.array([1.0, 0.0]))
    np.testing.assert_array_equal(fuse_majority([truth, wrong], w0), truth)


def test_fuse_per_pixel_weights():
    lm1 = np.array([[1, 1]])
    lm2 = np.array([[2, 2]])
    w = FusionWeights(
        strategy="dv",
        per_pixel=(np.array([[0.9, 0.1]]), np.array([[0.2, 0.8]])),
    )
    np.testing.assert_array_equal(fuse_majority([lm1, lm2], w), [[1, 2]])


def test_fuse_unanimous_maps_under_any_weights():
    rng = SplitMix64(4)
    lm = np.arange(12).reshape(3, 4) % 5
    w = FusionWeights(
        strategy="dv",
        per_pixel=tuple(
            np.array([[rng.next_float() + 0.01 for _ in range(4)] for _ in range(3)])
            for _ in range(3)
        ),
    )
    np.testing.assert_array_equal(fuse_majority([lm, lm, lm], w), lm)


def test_fuse_equal_weights_match_mv():
    rng = np.random.default_rng(0)
    maps = [rng.integers(1, 5, size=(4, 5)) for _ in range(3)]
    same = FusionWeights(strategy="mv", per_resolution=np.full(3, 0.37))
    np.testing.assert_array_equal(
        fuse_majority(maps, same), fuse_majority(maps, weight_mv(3))
    )


def test_fuse_errors():
    with pytest.raises(ValueError, match="no label maps"):
        fuse_majority([], weight_mv(1))
    with pytest.raises(ValueError, match="shape"):
        fuse_majority([np.zeros((2, 2)), np.zeros((2, 3))], weight_mv(2))


def test_fuse_matches_brute_force_and_rescale():
    rng = np.random.default_rng(42)
    for trial in range(60):
        n_res = int(rng.integers(1, 7))
        n_classes = int(rng.integers(2, 9))
        shape = (int(rng.integers(1, 4)), int(rng.integers(1, 5)))
        maps = [rng.integers(1, n_classes + 1, size=shape) for _ in range(n_res)]
        if trial % 2 == 0:
            w = FusionWeights(
                strategy="mv", per_resolution=rng.uniform(0.05, 1.0, size=n_res)
            )
            weight_at = lambda j, idx: float(w.per_resolution[j])
        else:
            w = FusionWeights(
                strategy="dv",
                per_pixel=tuple(rng.uniform(0.05, 1.0, size=shape) for _ in range(n_res)),
            )
            weight_at = lambda j, idx: float(w.per_pixel[j][idx])
        fused = fuse_majority(maps, w)
        np.testing.assert_array_equal(fused, brute_force_fuse(maps, weight_at))
        if w.per_resolution is not None:
            for k in (0.125, 2.0, 7.3):
                scaled = FusionWeights(strategy="mv", per_resolution=w.per_resolution * k)
                np.testing.assert_array_equal(fuse_majority(maps, scaled), fused)


def test_weight_mv():
    w = weight_mv(4)
    assert w.strategy == "mv"
    np.testing.assert_allclose(w.per_resolution, 0.25)
    with pytest.raises(ValueError):
        weight_mv(0)


def test_weight_dv_takes_winning_decision_value():
    r1 = SimpleNamespace(decision=np.array([[[0.1, 0.9]]]))
    r2 = SimpleNamespace(decision=np.full((1, 1, 4), 0.25))
    w = weight_dv([r1, r2])
    assert w.strategy == "dv"
    np.testing.assert_allclose(w.per_pixel[0], [[0.9]])
    np.testing.assert_allclose(w.per_pixel[1], [[0.25]])


def test_power_iteration_known_spectra():
    lap = np.diag(PATH3.sum(axis=1)) - PATH3
    assert power_iteration_lmax(lap) == pytest.approx(3.0, rel=1e-8)
    assert power_iteration_lmax(np.array([[2.0]])) == pytest.approx(2.0, rel=1e-12)
    assert power_iteration_lmax(np.zeros((3, 3))) == 0.0


def test_total_variation_closed_forms():
    s = np.full(7, 2.0)
    ring = np.zeros((7, 7))
    for i in range(7):
        ring[i, (i + 1) % 7] = ring[(i + 1) % 7, i] = 0.5 + 0.1 * i
    tv = graph_total_variation(ring, s)
    assert tv.shape == (1,)
    assert tv[0] == pytest.approx(float(s @ s), abs=1e-10)

    assert graph_total_variation(PATH3, np.array([1.0, 0.0, -1.0]))[0] == pytest.approx(
        8.0 / 9.0, rel=1e-7
    )
    # eigenvector of the largest Laplacian eigenvalue is maximally rough
    assert graph_total_variation(PATH3, np.array([1.0, -2.0, 1.0]))[0] <= 1e-12
    assert graph_total_variation(PATH3, np.zeros(3))[0] == 0.0


def test_total_variation_multicolumn():
    sig = np.stack([np.full(3, 1.5), np.array([1.0, 0.0, -1.0])], axis=1)
    tv = graph_total_variation(PATH3, sig)
    assert tv.shape == (2,)
    assert tv[0] == pytest.approx(3 * 1.5**2, abs=1e-10)
    assert tv[1] == pytest.approx(8.0 / 9.0, rel=1e-7)


def test_entropy_single_edge_is_pure_state():
    for w in (1.0, 3.5, 0.25):
        a = np.array([[0.0, w], [w, 0.0]])
        h = von_neumann_entropy(a)
        assert h == 0.0
        assert math.exp(-h) == 1.0


def test_entropy_triangle_is_one_bit():
    a = np.ones((3, 3)) - np.eye(3)
    h = von_neumann_entropy(a)
    assert h == pytest.approx(1.0, abs=1e-12)
    assert math.exp(-h) == pytest.approx(math.exp(-1.0), abs=1e-12)


def test_entropy_spectrum_normalization_and_sign():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        a = rng.uniform(0, 1, size=(n, n))
        a = np.triu(a, 1)
        a = a + a.T
        lap = (np.diag(a.sum(axis=1)) - a) / a.sum()
        assert float(np.linalg.eigvalsh(lap).sum()) == pytest.approx(1.0, abs=1e-10)
        assert von_neumann_entropy(a) >= 0.0


def test_entropy_rejects_edgeless():
    with pytest.raises(ValueError, match="edge"):
        von_neumann_entropy(np.zeros((4, 4)))


def test_weight_tv_matches_direct_evaluation():
    # recompute the weight with eigvalsh instead of power iteration
    rng = np.random.default_rng(5)
    mats = [rng.uniform(0, 1, size=(12, 6)), rng.uniform(0, 1, size=(9, 4))]
    w = weight_tv(mats)
    assert w.strategy == "tv"
    assert w.per_resolution.shape == (2,)
    assert np.all(w.per_resolution > 0)
    assert np.all(w.per_resolution <= 1.0 + 1e-12)
    for got, feats in zip(w.per_resolution, mats):
        a = build_single_layer_graph(feats)
        lap = np.diag(a.sum(axis=1)) - a
        lmax = float(np.linalg.eigvalsh(lap)[-1])
        std = feats.std(axis=0)
        sig = (feats - feats.mean(axis=0)) / np.where(std > 0, std, 1.0)
        kept = sig - lap @ sig / lmax
        tv = np.einsum("ij,ij->j", kept, kept)
        assert got == pytest.approx(math.exp(-float(tv.mean())), rel=1e-6)


def test_weight_tv_warns_on_edgeless_graph(caplog):
    feats = np.array([[0.0, 0.0], [10.0, 10.0], [20.0, 20.0]])
    with caplog.at_level(logging.WARNING, logger="mgsp.fusion"):
        w = weight_tv([feats], tau=1e-6)
    assert "no edges" in caplog.text
    assert w.per_resolution.shape == (1,)


def test_weight_vn_range():
    rng = np.random.default_rng(6)
    mats = [rng.uniform(0, 1, size=(n, 5)) for n in (8, 14)]
    w = weight_vn(mats)
    assert w.strategy == "vn"
    assert np.all(w.per_resolution > 0)
    assert np.all(w.per_resolution <= 1.0)


@pytest.fixture(scope="module")
def mrc_inputs(small_scene):
    cube, labels = small_scene
    split = make_split(labels, per_class=3, seed=9)
    return cube, labels, split


def run_mrc(cube, labels, split, **kw):
    args = dict(
        resolutions=(8, 14), strategy="dv", mln_cfg=MlnConfig(layers=4),
        epochs=30, seed=21,
    )
    args.update(kw)
    return mln_mrc(cube, labels, args.pop("resolutions"), split, **args)


def test_mrc_argument_errors(mrc_inputs):
    cube, labels, split = mrc_inputs
    with pytest.raises(ValueError, match="at least 2"):
        mln_mrc(cube, labels, (10,), split)
    with pytest.raises(ValueError, match="distinct"):
        mln_mrc(cube, labels, (10, 10), split)
    with pytest.raises(ValueError, match="unknown strategy"):
        mln_mrc(cube, labels, (8, 14), split, strategy="median")


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_mrc_strategy_dispatch(mrc_inputs, strategy):
    cube, labels, split = mrc_inputs
    out = run_mrc(cube, labels, split, strategy=strategy)
    assert out.weights.strategy == strategy
    assert out.resolutions == (8, 14)
    assert len(out.per_resolution) == 2
    assert [r.resolution for r in out.per_resolution] == [8, 14]
    assert out.labels.shape == labels.shape
    assert set(np.unique(out.labels)) <= set(split.train_ids)
    if strategy == "dv":
        assert out.weights.per_pixel is not None
    else:
        assert out.weights.per_resolution.shape == (2,)


def test_mrc_weights_match_validation_accuracy(mrc_inputs):
    cube, labels, split = mrc_inputs
    out = run_mrc(cube, labels, split, strategy="va")
    va_seed = derive_seed(21, "va")
    for i, r in enumerate(out.per_resolution):
        direct = validation_accuracy(
            r, split, labels, seed=derive_seed(va_seed, "va-res", r.resolution)
        )
        assert out.weights.per_resolution[i] == direct
        assert 0.0 <= direct <= 1.0


def test_mrc_independent_of_jobs(mrc_inputs):
    cube, labels, split = mrc_inputs
    serial = run_mrc(cube, labels, split, jobs=1)
    threaded = run_mrc(cube, labels, split, jobs=2)
    np.testing.assert_array_equal(serial.labels, threaded.labels)
    for a, b in zip(serial.per_resolution, threaded.per_resolution):
        np.testing.assert_array_equal(a.labels, b.labels)


def test_mrc_deterministic(mrc_inputs):
    cube, labels, split = mrc_inputs
    a = run_mrc(cube, labels, split)
    b = run_mrc(cube, labels, split)
    np.testing.assert_array_equal(a.labels, b.labels)
