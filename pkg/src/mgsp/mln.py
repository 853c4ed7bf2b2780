"""Multilayer network construction over superpixels.

Bands are grouped into M layers by clustering their across-superpixel
profiles. Each layer alpha carries an intralayer Gaussian affinity
W(alpha) over the N superpixels, gated by BOTH a feature-distance
threshold p and a spatial centroid-distance threshold q. Entities are
additionally coupled across layers: every (alpha, i) connects to
(beta, i) for beta != alpha with a constant weight.

The whole structure is an order-4 adjacency tensor
A[alpha, i, beta, j] with

    A[alpha, i, alpha, j] = W(alpha)[i, j]
    A[alpha, i, beta, i]  = interlayer_weight   (alpha != beta)

and zeros elsewhere. It is partial-symmetric: A[a,i,b,j] == A[b,j,a,i].
Only the compact pieces are stored; ``expand_adjacency`` materializes
the dense tensor for small cross-checks, and ``entity_gram`` /
``layer_gram`` give the mode-2 / mode-1 unfolding Gram matrices in
closed form:

    G2 = sum_a W(a) W(a)^T + M(M-1) w^2 I
    G1 = diag(||W(a)||_F^2) + N w^2 ((M-1) I + (M-2) (J - I))

(the intralayer and interlayer entries of an unfolding row never share
a column, so no cross products survive; interlayer rows overlap each
other on N*(M-2) columns off the diagonal of G1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import kmeans
from .tensor import _fix_signs

_EXPAND_CAP = 64  # dense order-4 expansion is for tests only


@dataclass(frozen=True)
class MlnConfig:
    """Multilayer construction knobs.

    layers: number of band layers M.
    sigma: Gaussian width of the intralayer kernel; None self-tunes per
        layer to sigma^2 = mean squared intralayer feature distance.
    feature_threshold: feature-distance gate p; None self-tunes per
        layer to the mean pairwise intralayer feature distance.
    spatial_threshold: centroid-distance gate q, in pixels.
    interlayer_weight: constant coupling between copies of an entity.
    """

    layers: int = 10
    sigma: float | None = None
    feature_threshold: float | None = None
    spatial_threshold: float = 100.0
    interlayer_weight: float = 1.0

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.feature_threshold is not None and self.feature_threshold <= 0:
            raise ValueError(f"feature_threshold must be positive, got {self.feature_threshold}")
        if self.spatial_threshold <= 0:
            raise ValueError(f"spatial_threshold must be positive, got {self.spatial_threshold}")
        if self.interlayer_weight <= 0:
            raise ValueError(f"interlayer_weight must be positive, got {self.interlayer_weight}")


@dataclass(frozen=True)
class BandPartition:
    """Assignment of the K bands to M layers; every layer non-empty.
    Layers are numbered by first band occurrence."""

    layer_of_band: np.ndarray
    layer_count: int

    def bands_in_layer(self, layer: int) -> np.ndarray:
        return np.flatnonzero(self.layer_of_band == layer)


@dataclass(frozen=True)
class MlnAdjacency:
    """Compact multiplex adjacency: per-layer intralayer matrices
    (N x N, symmetric, zero diagonal, entries in [0, 1]) plus the
    constant interlayer weight."""

    intralayer: tuple[np.ndarray, ...]
    interlayer_weight: float

    @property
    def layer_count(self) -> int:
        return len(self.intralayer)

    @property
    def entity_count(self) -> int:
        return self.intralayer[0].shape[0]


def cluster_bands(features: np.ndarray, layers: int, seed: int) -> BandPartition:
    """Group bands by k-means on their across-superpixel profiles.

    ``features`` is (N, K) superpixel mean spectra, so each band is a
    point in R^N. Layers are renumbered by first band occurrence so the
    partition is stable under cluster-id permutations.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("features must be (superpixels, bands)")
    k_bands = features.shape[1]
    if layers > k_bands:
        raise ValueError(f"cannot split {k_bands} bands into {layers} layers")
    assign = kmeans(features.T, layers, seed=seed)
    raw = assign.group_of_item
    remap: dict[int, int] = {}
    out = np.empty(k_bands, dtype=np.int32)
    for i, g in enumerate(raw):
        g = int(g)
        if g not in remap:
            remap[g] = len(remap)
        out[i] = remap[g]
    return BandPartition(layer_of_band=out, layer_count=layers)


def _pairwise_sq_distances(x: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    d2 = np.maximum(d2, 0.0)
    return (d2 + d2.T) / 2.0


def build_mln_adjacency(
    features: np.ndarray,
    partition: BandPartition,
    centroids: np.ndarray,
    cfg: MlnConfig,
) -> MlnAdjacency:
    """Intralayer Gaussian affinities with the dual distance gate.

    W(alpha)[i, j] = exp(-d_f^2 / sigma_a^2) when d_f < p_a AND
    d_s < q, else 0; d_f is the feature distance restricted to layer
    alpha's bands, d_s the centroid distance. Diagonal is zero.
    """
    features = np.asarray(features, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    n = features.shape[0]
    if centroids.shape != (n, 2):
        raise ValueError(f"centroids must be ({n}, 2), got {centroids.shape}")
    if partition.layer_count != cfg.layers:
        raise ValueError("band partition layer count does not match config")
    spatial_ok = _pairwise_sq_distances(centroids) < cfg.spatial_threshold ** 2
    off_diag = ~np.eye(n, dtype=bool)
    mats = []
    for layer in range(partition.layer_count):
        bands = partition.bands_in_layer(layer)
        if bands.size == 0:
            raise ValueError(f"layer {layer} has no bands")
        d2 = _pairwise_sq_distances(features[:, bands])
        if cfg.feature_threshold is None:
            d = np.sqrt(d2)
            p = float(d[off_diag].mean()) if n > 1 else 0.0
        else:
            p = cfg.feature_threshold
        if cfg.sigma is None:
            sigma_sq = float(d2[off_diag].mean()) if n > 1 else 1.0
            if sigma_sq <= 0:
                sigma_sq = 1.0
        else:
            sigma_sq = float(cfg.sigma) ** 2
        w = np.exp(-d2 / sigma_sq)
        w[~((d2 < p * p) & spatial_ok)] = 0.0
        np.fill_diagonal(w, 0.0)
        mats.append(w)
    return MlnAdjacency(intralayer=tuple(mats), interlayer_weight=float(cfg.interlayer_weight))


def build_single_layer_graph(
    features: np.ndarray,
    sigma: float | None = None,
    tau: float | None = None,
) -> np.ndarray:
    """Flat Gaussian graph over the superpixel features (the single-layer
    baseline): w_ij = exp(-d^2 / sigma^2) when d^2 <= tau, zero diagonal.
    Defaults self-tune both sigma^2 and tau to the mean pairwise squared
    distance.
    """
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    d2 = _pairwise_sq_distances(features)
    off_diag = ~np.eye(n, dtype=bool)
    mean_d2 = float(d2[off_diag].mean()) if n > 1 else 1.0
    if sigma is None:
        sigma_sq = mean_d2 if mean_d2 > 0 else 1.0
    else:
        if sigma <= 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        sigma_sq = float(sigma) ** 2
    tau_val = mean_d2 if tau is None else float(tau)
    w = np.exp(-d2 / sigma_sq)
    w[d2 > tau_val] = 0.0
    np.fill_diagonal(w, 0.0)
    return w


def expand_adjacency(adj: MlnAdjacency) -> np.ndarray:
    """Dense (M, N, M, N) adjacency tensor. Guarded to small instances;
    the pipeline never needs the dense form."""
    m, n = adj.layer_count, adj.entity_count
    if m * n > _EXPAND_CAP:
        raise ValueError(f"dense expansion capped at M*N <= {_EXPAND_CAP}, got {m * n}")
    t = np.zeros((m, n, m, n), dtype=np.float64)
    for a in range(m):
        t[a, :, a, :] = adj.intralayer[a]
    idx = np.arange(n)
    for a in range(m):
        for b in range(m):
            if a != b:
                t[a, idx, b, idx] = adj.interlayer_weight
    return t


def entity_gram(adj: MlnAdjacency) -> np.ndarray:
    """Mode-2 unfolding Gram matrix in closed form (N x N)."""
    m, n = adj.layer_count, adj.entity_count
    g = np.zeros((n, n), dtype=np.float64)
    for w in adj.intralayer:
        g += w @ w.T
    g = (g + g.T) / 2.0
    g[np.diag_indices(n)] += m * (m - 1) * adj.interlayer_weight ** 2
    return g


def layer_gram(adj: MlnAdjacency) -> np.ndarray:
    """Mode-1 unfolding Gram matrix in closed form (M x M)."""
    m, n = adj.layer_count, adj.entity_count
    w2 = adj.interlayer_weight ** 2
    g = np.full((m, m), n * (m - 2) * w2, dtype=np.float64)
    norms = np.array([float(np.sum(w * w)) for w in adj.intralayer])
    g[np.diag_indices(m)] = norms + n * (m - 1) * w2
    return g


def _gram_spectrum(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(g)
    order = np.argsort(vals)[::-1]
    vals = np.maximum(vals[order], 0.0)
    return np.sqrt(vals), _fix_signs(vecs[:, order])


def entity_spectrum(adj: MlnAdjacency) -> tuple[np.ndarray, np.ndarray]:
    """Entity-side singular values (descending) and singular vectors of
    the mode-2 unfolding, from the closed-form Gram matrix."""
    return _gram_spectrum(entity_gram(adj))


def layer_spectrum(adj: MlnAdjacency) -> tuple[np.ndarray, np.ndarray]:
    """Layer-side counterpart of :func:`entity_spectrum` (mode 1)."""
    return _gram_spectrum(layer_gram(adj))
