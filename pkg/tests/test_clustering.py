import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mgsp.clustering import (
    ClusterAssignment,
    graph_spectral_clustering,
    kmeans,
    mln_embedding,
    mln_spectral_clustering,
    regroup,
    select_p_largest_gap,
)
from mgsp.mln import MlnAdjacency

from conftest import best_permutation_agreement


def planted_multiplex(n, m, q, seed, in_w=1.0, cross_w=0.05, noise_layers=0):
    """Blocks of equal size; informative layers carry strong in-block
    weights, optional noise layers carry unstructured ones."""
    rng = np.random.default_rng(seed)
    truth = np.repeat(np.arange(q), n // q)
    mats = []
    for layer in range(m):
        if layer < m - noise_layers:
            same = truth[:, None] == truth[None, :]
            a = np.where(same, in_w * (0.5 + 0.5 * rng.random((n, n))),
                         cross_w * rng.random((n, n)))
        else:
            a = 0.5 * rng.random((n, n))
        a = np.triu(a, 1)
        a = a + a.T
        mats.append(a)
    return MlnAdjacency(intralayer=tuple(mats), interlayer_weight=1.0), truth


def sse_of(points, labels, k):
    total = 0.0
    for g in range(k):
        member = points[labels == g]
        total += float(np.sum((member - member.mean(axis=0)) ** 2))
    return total


def test_kmeans_recovers_separated_1d_groups():
    pts = np.array([[0.0], [0.1], [10.0], [10.1]])
    out = kmeans(pts, 2, seed=0)
    assert out.group_of_item[0] == out.group_of_item[1]
    assert out.group_of_item[2] == out.group_of_item[3]
    assert out.group_of_item[0] != out.group_of_item[2]
    # exhaustive check: no 2-assignment beats it on within-cluster SSE
    best = min(
        sse_of(pts, np.array(a), 2)
        for a in [(0, 0, 0, 1), (0, 0, 1, 0), (0, 0, 1, 1), (0, 1, 0, 0),
                  (0, 1, 0, 1), (0, 1, 1, 0), (0, 1, 1, 1)]
    )
    assert sse_of(pts, out.group_of_item, 2) == pytest.approx(best)


def test_kmeans_extremes():
    pts = np.random.default_rng(1).random((6, 3))
    one = kmeans(pts, 1, seed=0)
    assert one.count == 1 and np.all(one.group_of_item == 0)
    full = kmeans(pts, 6, seed=0)
    assert sorted(full.group_of_item) == list(range(6))
    assert sse_of(pts, full.group_of_item, 6) == pytest.approx(0.0)


def test_kmeans_duplicate_points_fill_all_clusters():
    pts = np.zeros((5, 2))
    out = kmeans(pts, 3, seed=2)
    assert np.bincount(out.group_of_item, minlength=3).min() >= 1


def test_kmeans_rejects_bad_k_and_values():
    pts = np.zeros((3, 2))
    with pytest.raises(ValueError):
        kmeans(pts, 0, seed=0)
    with pytest.raises(ValueError):
        kmeans(pts, 4, seed=0)
    with pytest.raises(ValueError):
        kmeans(np.array([[np.nan]]), 1, seed=0)


def test_kmeans_deterministic():
    pts = np.random.default_rng(3).random((40, 4))
    a = kmeans(pts, 5, seed=9)
    b = kmeans(pts, 5, seed=9)
    np.testing.assert_array_equal(a.group_of_item, b.group_of_item)


@settings(max_examples=30)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=8))
def test_kmeans_partitions_are_valid(seed, k):
    pts = np.random.default_rng(seed).random((12, 2))
    out = kmeans(pts, k, seed=seed)
    assert out.group_of_item.shape == (12,)
    assert out.group_of_item.min() >= 0 and out.group_of_item.max() < k
    assert np.bincount(out.group_of_item, minlength=k).min() >= 1


def test_select_p_examples():
    assert select_p_largest_gap(np.array([10.0, 9.0, 1.0, 0.9]), 1) == 2
    assert select_p_largest_gap(np.array([5.0, 4.0, 3.9, 0.5, 0.4]), 2) == 3
    # flat spectrum: no gap beats the first scanned position
    assert select_p_largest_gap(np.full(20, 3.0), 4) == 4
    # too short to scan: the full length comes back
    assert select_p_largest_gap(np.array([3.0, 2.0]), 5) == 2
    with pytest.raises(ValueError):
        select_p_largest_gap(np.array([1.0]), 0)


def test_select_p_depth_cap():
    # the huge drop sits at position 60, past the scan cap of 50; inside
    # the window every gap ties, so the first scanned position wins
    sv = np.concatenate([np.arange(200.0, 140.0, -1.0), np.full(60, 0.5)])
    assert select_p_largest_gap(sv, 2) == 2
    # a min_p beyond the cap lifts the cap to min_p exactly
    assert select_p_largest_gap(np.linspace(100.0, 1.0, 120), 56) == 56


def test_mln_spectral_clustering_recovers_planted_blocks():
    adj, truth = planted_multiplex(n=30, m=3, q=3, seed=4)
    out = mln_spectral_clustering(adj, 3, seed=0)
    assert best_permutation_agreement(out.group_of_item, truth) == 1.0


def test_mln_spectral_clustering_disconnected_components():
    # zero cross-block weight in every layer: components must come back exactly
    adj, truth = planted_multiplex(n=24, m=2, q=3, seed=5, cross_w=0.0)
    out = mln_spectral_clustering(adj, 3, seed=1)
    assert best_permutation_agreement(out.group_of_item, truth) == 1.0


def test_mln_spectral_clustering_extremes_and_errors():
    adj, _ = planted_multiplex(n=12, m=2, q=2, seed=6)
    one = mln_spectral_clustering(adj, 1, seed=0)
    assert np.all(one.group_of_item == 0)
    full = mln_spectral_clustering(adj, 12, seed=0)
    assert sorted(full.group_of_item) == list(range(12))
    with pytest.raises(ValueError):
        mln_spectral_clustering(adj, 13, seed=0)


def test_mln_spectral_clustering_permutation_invariant():
    adj, truth = planted_multiplex(n=24, m=3, q=2, seed=7)
    perm = np.random.default_rng(8).permutation(24)
    permuted = MlnAdjacency(
        intralayer=tuple(w[np.ix_(perm, perm)] for w in adj.intralayer),
        interlayer_weight=adj.interlayer_weight,
    )
    base = mln_spectral_clustering(adj, 2, seed=0).group_of_item
    moved = mln_spectral_clustering(permuted, 2, seed=0).group_of_item
    # same partition after undoing the permutation, up to renaming
    assert best_permutation_agreement(moved, base[perm]) == 1.0


def test_mln_embedding_keeps_at_least_min_p():
    adj, _ = planted_multiplex(n=20, m=2, q=4, seed=9)
    emb = mln_embedding(adj, min_p=4)
    assert emb.p >= 4
    assert emb.vectors.shape == (20, emb.p)
    assert np.all(np.diff(emb.singular_values) <= 1e-9)


def test_mln_embedding_identical_rows_stable():
    flat = MlnAdjacency(
        intralayer=(np.ones((6, 6)) - np.eye(6),) * 2, interlayer_weight=1.0
    )
    out = mln_spectral_clustering(flat, 2, seed=0)
    assert out.count == 2
    assert np.bincount(out.group_of_item, minlength=2).min() >= 1


def test_graph_spectral_clustering_two_components():
    w = np.zeros((6, 6))
    w[:3, :3] = 0.9
    w[3:, 3:] = 0.8
    np.fill_diagonal(w, 0.0)
    out = graph_spectral_clustering(w, 2, seed=0)
    truth = np.array([0, 0, 0, 1, 1, 1])
    assert best_permutation_agreement(out.group_of_item, truth) == 1.0
    with pytest.raises(ValueError):
        graph_spectral_clustering(np.zeros((2, 3)), 1, seed=0)


def test_multilayer_beats_flat_graph_with_noise_layers():
    """One informative layer among three noise layers: the multilayer
    spectrum still isolates the planted blocks, while the averaged flat
    graph mixes them. Means over a fixed seed block keep this stable."""
    mln_scores = []
    flat_scores = []
    for seed in range(24):
        adj, truth = planted_multiplex(
            n=60, m=4, q=3, seed=100 + seed, in_w=0.6, cross_w=0.35, noise_layers=3
        )
        out = mln_spectral_clustering(adj, 3, seed=seed)
        mln_scores.append(best_permutation_agreement(out.group_of_item, truth))
        mean_graph = np.mean(adj.intralayer, axis=0)
        flat = graph_spectral_clustering(mean_graph, 3, seed=seed)
        flat_scores.append(best_permutation_agreement(flat.group_of_item, truth))
    mln_mean = float(np.mean(mln_scores))
    flat_mean = float(np.mean(flat_scores))
    assert mln_mean >= 0.95
    assert mln_mean >= flat_mean + 0.10


def test_regroup_identity():
    feats = np.random.default_rng(10).random((5, 3))
    ident = ClusterAssignment(group_of_item=np.arange(5, dtype=np.int32), count=5)
    out, mapping = regroup(feats, ident)
    np.testing.assert_allclose(out, feats)
    np.testing.assert_array_equal(mapping, np.arange(5))


def test_regroup_weighted_mean_oracle():
    feats = np.array([[1.0, 0.0], [3.0, 4.0]])
    both = ClusterAssignment(group_of_item=np.zeros(2, dtype=np.int32), count=1)
    unweighted, _ = regroup(feats, both)
    np.testing.assert_allclose(unweighted[0], [2.0, 2.0])
    weighted, _ = regroup(feats, both, weights=np.array([1.0, 3.0]))
    np.testing.assert_allclose(weighted[0], (feats[0] + 3 * feats[1]) / 4.0)


def test_regroup_rejects_bad_weights():
    feats = np.zeros((2, 2))
    both = ClusterAssignment(group_of_item=np.zeros(2, dtype=np.int32), count=1)
    with pytest.raises(ValueError):
        regroup(feats, both, weights=np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        regroup(feats, both, weights=np.array([1.0]))
