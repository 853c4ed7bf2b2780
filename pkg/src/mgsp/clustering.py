"""Spectral clustering over multilayer and flat graphs, plus the
k-means workhorse they share.

k-means is written out here rather than imported so that the draw
sequence is pinned: k-means++ seeding consumes a SplitMix64 stream
(see rng.py), Lloyd iterations are plain argmin/mean updates, empty
clusters are re-seeded to the point farthest from its centroid. Given a
seed, the result is reproducible everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import SplitMix64
from .tensor import _fix_signs


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster id per item, ids 0..count-1, every cluster non-empty."""

    group_of_item: np.ndarray
    count: int


@dataclass(frozen=True)
class SpectralEmbedding:
    """First ``p`` singular vectors as rows-are-items coordinates,
    alongside the full descending singular-value sequence."""

    vectors: np.ndarray
    singular_values: np.ndarray
    p: int


def _assign(points: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # ||x - c||^2 expanded; ties go to the lowest center index via argmin
    d2 = (
        np.einsum("ij,ij->i", points, points)[:, None]
        - 2.0 * points @ centers.T
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )
    labels = np.argmin(d2, axis=1)
    return labels, np.maximum(d2[np.arange(points.shape[0]), labels], 0.0)


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> ClusterAssignment:
    """Lloyd's algorithm with k-means++ seeding.

    Stops when the largest centroid shift falls below ``tol`` or after
    ``max_iter`` sweeps. Deterministic under ``seed``.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be a 2-d array")
    n = points.shape[0]
    if not (1 <= k <= n):
        raise ValueError(f"k must be in 1..{n}, got {k}")
    if not np.all(np.isfinite(points)):
        raise ValueError("points have non-finite values")

    rng = SplitMix64(seed)
    chosen = [rng.next_below(n)]
    d2 = np.einsum("ij,ij->i", points - points[chosen[0]], points - points[chosen[0]])
    while len(chosen) < k:
        total = float(d2.sum())
        if total <= 0.0:
            # remaining mass is zero (duplicate points); walk the indices
            candidate = next(i for i in range(n) if i not in set(chosen))
        else:
            r = rng.next_float() * total
            candidate = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            candidate = min(candidate, n - 1)
        chosen.append(candidate)
        cand_d2 = np.einsum("ij,ij->i", points - points[candidate], points - points[candidate])
        d2 = np.minimum(d2, cand_d2)
    centers = points[chosen].copy()

    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        labels, dist2 = _assign(points, centers)
        counts = np.bincount(labels, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            far = int(np.argmax(dist2))
            labels[far] = empty
            dist2[far] = -np.inf  # keep ties from re-picking the same point
            counts = np.bincount(labels, minlength=k)
        new_centers = np.zeros_like(centers)
        for j in range(points.shape[1]):
            new_centers[:, j] = np.bincount(labels, weights=points[:, j], minlength=k)
        new_centers /= counts[:, None]
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        if shift < tol:
            break
    labels, _ = _assign(points, centers)
    counts = np.bincount(labels, minlength=k)
    if counts.min() == 0:
        # final assignment re-opened an empty cluster; patch it the same way
        _, dist2 = _assign(points, centers)
        for empty in np.flatnonzero(counts == 0):
            far = int(np.argmax(dist2))
            labels[far] = empty
            dist2[far] = -np.inf
            counts = np.bincount(labels, minlength=k)
    return ClusterAssignment(group_of_item=labels.astype(np.int32), count=k)


def select_p_largest_gap(singular_values: np.ndarray, min_p: int) -> int:
    """Embedding width by the largest spectral gap.

    Scans 1-indexed positions i in [min_p, min(50, len-1)] and returns
    the i maximizing sigma_i - sigma_{i+1} (first on ties). Sequences
    shorter than min_p + 1 yield their full length.
    """
    sv = np.asarray(singular_values, dtype=np.float64)
    if min_p < 1:
        raise ValueError(f"min_p must be >= 1, got {min_p}")
    n = sv.size
    if n < min_p + 1:
        return n
    # the depth cap never cuts below min_p; the embedding must keep at
    # least as many coordinates as clusters
    hi = min(max(50, min_p), n - 1)
    gaps = sv[min_p - 1:hi] - sv[min_p:hi + 1]
    return min_p + int(np.argmax(gaps))


def mln_spectral_clustering(adj, q: int, seed: int, normalize_rows: bool = False) -> ClusterAssignment:
    """Cluster the entities of a multilayer adjacency into q groups.

    Entity singular vectors come from the closed-form mode-2 Gram
    spectrum; the embedding keeps the first p columns (largest-gap rule
    with min_p = q) and k-means groups the rows. Rows are used as-is
    unless ``normalize_rows`` asks for unit length (variant, off by
    default).
    """
    emb = mln_embedding(adj, min_p=q)
    return _cluster_embedding(emb, q, seed, normalize_rows)


def mln_embedding(adj, min_p: int) -> SpectralEmbedding:
    from .mln import entity_spectrum  # local import, mln builds on this module

    sigma, es = entity_spectrum(adj)
    p = select_p_largest_gap(sigma, min_p)
    return SpectralEmbedding(vectors=es[:, :p], singular_values=sigma, p=p)


def graph_spectral_clustering(w: np.ndarray, q: int, seed: int, normalize_rows: bool = False) -> ClusterAssignment:
    """Single-layer counterpart: same gap rule and k-means over the
    singular vectors of the (symmetric, non-negative) affinity matrix."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("adjacency must be square")
    u, s, _ = np.linalg.svd(w)
    u = _fix_signs(u)
    p = select_p_largest_gap(s, q)
    emb = SpectralEmbedding(vectors=u[:, :p], singular_values=s, p=p)
    return _cluster_embedding(emb, q, seed, normalize_rows)


def _cluster_embedding(emb: SpectralEmbedding, q: int, seed: int, normalize_rows: bool) -> ClusterAssignment:
    vecs = emb.vectors
    if normalize_rows:
        norms = np.linalg.norm(vecs, axis=1, keepdims=True)
        vecs = np.where(norms > 0, vecs / np.where(norms > 0, norms, 1.0), vecs)
    return kmeans(vecs, q, seed=seed)


def regroup(
    features: np.ndarray,
    assignment: ClusterAssignment,
    weights: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Merge item features into group features.

    Group feature = weighted mean of its members' features (weights are
    the members' pixel counts in the pipeline; None means unweighted).
    Returns (group_features, group_of_item).
    """
    features = np.asarray(features, dtype=np.float64)
    labels = assignment.group_of_item
    n, k = features.shape
    if labels.shape[0] != n:
        raise ValueError("assignment does not match feature rows")
    if weights is None:
        weights = np.ones(n, dtype=np.float64)
    else:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (n,) or weights.min() <= 0:
            raise ValueError("weights must be positive, one per item")
    d = assignment.count
    wsum = np.bincount(labels, weights=weights, minlength=d)
    if wsum.min() <= 0:
        raise ValueError("every group must have at least one member")
    out = np.empty((d, k), dtype=np.float64)
    for j in range(k):
        out[:, j] = np.bincount(labels, weights=weights * features[:, j], minlength=d)
    return out / wsum[:, None], labels.copy()
